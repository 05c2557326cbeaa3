//! Distance between perturbed and unperturbed orbits along words that keep
//! the unperturbed orbit in P-.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::fiber::{FiberFamily, SymbolVector};
use crate::geometry::{region_box, RegionId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyConfig {
    pub trials: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for DiscrepancyConfig {
    fn default() -> Self {
        DiscrepancyConfig { trials: 1000, max_len: 1000, seed: 0 }
    }
}

/// For each trial: a random point of P- and a random word of length up to
/// `max_len`, built letter by letter among the letters that keep the
/// unperturbed orbit in P- (the word stops early if there is none).
/// Certifies `sup |f_w(p) - g_w(p)| < rho` over all prefixes.
pub fn check_discrepancy_bound(fam: &FiberFamily, cfg: &DiscrepancyConfig) -> Certificate {
    let p = &fam.params;
    let k = p.k;
    let base = fam.unperturbed();
    let pm = region_box(p, RegionId::Pminus).expect("P-");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    let mut worst_len = 0usize;
    let mut total_len = 0usize;
    let mut single = 0.0f64;
    let symbols: Vec<u32> = SymbolVector::all(k).map(|s| s.bits).collect();
    for _ in 0..cfg.trials {
        let x0: Vec<f64> = (0..k).map(|i| rng.gen_range(pm.lo[i]..=pm.hi[i])).collect();
        let len = rng.gen_range(1..=cfg.max_len.max(1));
        let (mut f, mut g) = (x0.clone(), x0);
        let mut used = 0;
        for step in 0..len {
            let ok: Vec<u32> = symbols
                .iter()
                .copied()
                .filter(|&b| {
                    let mut y = f.clone();
                    base.apply_in_place(b, &mut y);
                    pm.contains(&y)
                })
                .collect();
            if ok.is_empty() {
                break;
            }
            let l = ok[rng.gen_range(0..ok.len())];
            base.apply_in_place(l, &mut f);
            fam.apply_in_place(l, &mut g);
            used += 1;
            let d = f.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if step == 0 {
                single = single.max(d);
            }
            if d > worst {
                worst = d;
                worst_len = step + 1;
            }
        }
        total_len += used;
    }
    let sup_e = fam
        .perturbation
        .as_ref()
        .map(|e| symbols.iter().map(|&b| e.sup_bound(b).iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    // the slowest contraction on P is the first coordinate of f_00
    let geometric = sup_e / (1.0 - p.lambda);
    Certificate::new("sup |f_w(p) - g_w(p)| < rho along words staying in P-", worst < p.rho, p.rho - worst)
        .with_witness(vec![worst_len as f64])
        .with_values([
            ("max_discrepancy", worst),
            ("rho", p.rho),
            ("single_letter_max", single),
            ("mean_word_length", total_len as f64 / cfg.trials.max(1) as f64),
            ("geometric_bound", geometric),
        ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::perturb::make_perturbation;

    #[test]
    fn unperturbed_is_zero_and_perturbed_below_rho() {
        let p = derive_params(16, 2).unwrap();
        let cfg = DiscrepancyConfig { trials: 50, max_len: 1000, seed: 1 };
        let c = check_discrepancy_bound(&FiberFamily::new(p), &cfg);
        assert_eq!(c.value("max_discrepancy"), Some(0.0));
        let pert = make_perturbation(&p, p.r / 2.0, 2).unwrap();
        let fam = FiberFamily::perturbed(p, pert.spec);
        let c = check_discrepancy_bound(&fam, &cfg);
        assert!(c.pass, "{c:?}");
        assert!(c.value("single_letter_max").unwrap() <= p.r / 2.0);
        assert!(c.value("mean_word_length").unwrap() > 10.0, "{c:?}");
    }
}
