//! Smooth random perturbations `psi_s = id + e_s` of the fiber maps.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::fiber::{FiberFamily, Jacobian, SymbolVector};
use crate::geometry::{region_box, RegionId};
use crate::params::Params;

const BUMPS_PER_SYMBOL: usize = 4;
const MAX_RETRIES: usize = 10;

/// `A u prod_l cos^2(pi (y_l - c_l) / (2w))` on `|y_l - c_l| < w`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    /// Amplitude times unit direction.
    pub amp: Vec<f64>,
}

impl Bump {
    #[inline]
    fn profile(&self, y: &[f64]) -> f64 {
        let mut v = 1.0;
        for (yl, cl) in y.iter().zip(&self.center) {
            let t = yl - cl;
            if t.abs() >= self.width {
                return 0.0;
            }
            v *= (PI * t / (2.0 * self.width)).cos().powi(2);
        }
        v
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let k = y.len();
        let w = self.width;
        let mut c = vec![0.0; k];
        let mut dc = vec![0.0; k];
        for l in 0..k {
            let t = y[l] - self.center[l];
            if t.abs() >= w {
                return vec![0.0; k];
            }
            let a = PI * t / (2.0 * w);
            c[l] = a.cos().powi(2);
            dc[l] = -(PI / (2.0 * w)) * (2.0 * a).sin();
        }
        (0..k).map(|l| (0..k).map(|m| if m == l { dc[m] } else { c[m] }).product()).collect()
    }

    fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub seed: u64,
    /// One list of bumps per symbol, indexed by the symbol bits.
    pub fields: Vec<Vec<Bump>>,
}

impl PerturbationSpec {
    pub fn identity(k: usize) -> Self {
        PerturbationSpec { delta: 0.0, seed: 0, fields: vec![Vec::new(); 1 << k] }
    }

    #[inline]
    pub fn add_displacement(&self, bits: u32, y: &mut [f64]) {
        let bumps = &self.fields[bits as usize];
        if bumps.is_empty() {
            return;
        }
        let k = y.len();
        let mut e = [0.0f64; crate::params::MAX_K];
        for b in bumps {
            let w = b.profile(y);
            if w != 0.0 {
                for i in 0..k {
                    e[i] += b.amp[i] * w;
                }
            }
        }
        for i in 0..k {
            y[i] += e[i];
        }
    }

    pub fn displacement(&self, bits: u32, y: &[f64]) -> Vec<f64> {
        let mut z = y.to_vec();
        self.add_displacement(bits, &mut z);
        z.iter().zip(y).map(|(a, b)| a - b).collect()
    }

    /// Derivative of `e_s` at `y`.
    pub fn jacobian(&self, bits: u32, y: &[f64]) -> Jacobian {
        let k = y.len();
        let mut j = Jacobian::zeros(k);
        for b in &self.fields[bits as usize] {
            let g = b.gradient(y);
            for i in 0..k {
                for l in 0..k {
                    j.set(i, l, j.get(i, l) + b.amp[i] * g[l]);
                }
            }
        }
        j
    }

    /// Solves `z + e_s(z) = y` by fixed-point iteration.
    pub fn inverse_displacement(&self, bits: u32, y: &[f64]) -> Vec<f64> {
        let mut z = y.to_vec();
        if self.fields[bits as usize].is_empty() {
            return z;
        }
        for _ in 0..200 {
            let e = self.displacement(bits, &z);
            let next: Vec<f64> = y.iter().zip(&e).map(|(a, b)| a - b).collect();
            let diff = next.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            z = next;
            if diff <= 1e-17 {
                break;
            }
        }
        z
    }

    /// Componentwise bound on `|e_s|`.
    pub fn sup_bound(&self, bits: u32) -> Vec<f64> {
        let bumps = &self.fields[bits as usize];
        let k = self.fields.len().trailing_zeros() as usize;
        (0..k).map(|i| bumps.iter().map(|b| b.amp[i].abs()).sum()).collect()
    }

    /// Bound on the operator norm of `De_s`.
    pub fn derivative_bound(&self, bits: u32) -> f64 {
        let k = self.fields.len().trailing_zeros() as f64;
        self.fields[bits as usize].iter().map(|b| b.norm() * PI / (2.0 * b.width) * k.sqrt()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOutcome {
    pub spec: PerturbationSpec,
    pub warnings: Vec<String>,
    pub attempts: usize,
}

fn sample_spec(p: &Params, delta: f64, seed: u64, attempt: u64) -> PerturbationSpec {
    let k = p.k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    let q = region_box(p, RegionId::Qplus).expect("Q+ is always defined");
    let mut fields = Vec::with_capacity(1 << k);
    for _ in 0..1u32 << k {
        let mut bumps = Vec::with_capacity(BUMPS_PER_SYMBOL);
        for _ in 0..BUMPS_PER_SYMBOL {
            let center: Vec<f64> = (0..k).map(|i| rng.gen_range(q.lo[i]..q.hi[i])).collect();
            let width = rng.gen_range(0.15..0.5);
            let mut dir: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-3);
            let weight: f64 = rng.gen_range(0.5..1.0);
            for d in &mut dir {
                *d *= weight / norm;
            }
            bumps.push(Bump { center, width, amp: dir });
        }
        // scale so that the derivative bound equals delta / 2
        let raw: f64 = bumps.iter().map(|b| b.norm() * PI / (2.0 * b.width) * (k as f64).sqrt()).sum();
        let scale = if raw > 0.0 { 0.5 * delta / raw } else { 0.0 };
        for b in &mut bumps {
            for a in &mut b.amp {
                *a *= scale;
            }
        }
        fields.push(bumps);
    }
    PerturbationSpec { delta, seed, fields }
}

/// Samples a perturbation of size `delta` and certifies that every perturbed
/// map keeps Q+ inside itself. Retries with fresh streams, then gives up.
pub fn make_perturbation(p: &Params, delta: f64, seed: u64) -> Result<PerturbationOutcome> {
    let mut warnings = Vec::new();
    if delta > p.r / 2.0 {
        warnings.push(format!("delta = {delta} exceeds r/2 = {}; invisibility bounds are not guaranteed", p.r / 2.0));
    }
    if delta == 0.0 {
        return Ok(PerturbationOutcome { spec: PerturbationSpec::identity(p.k), warnings, attempts: 0 });
    }
    let q = region_box(p, RegionId::Qplus)?;
    for attempt in 0..MAX_RETRIES {
        let spec = sample_spec(p, delta, seed, attempt as u64);
        let fam = FiberFamily::perturbed(*p, spec);
        let ok = SymbolVector::all(p.k).all(|s| q.contains_box(&fam.image_box(s.bits, &q)));
        if ok {
            let spec = fam.perturbation.expect("set above");
            return Ok(PerturbationOutcome { spec, warnings, attempts: attempt + 1 });
        }
    }
    Err(Error::PerturbationRetries(MAX_RETRIES))
}

/// Grid-measured distances between the perturbed and unperturbed maps,
/// one certificate per symbol: `C^0` distance of the maps and of their
/// inverses and `C^1` distance of the maps at most `delta`. The `C^1`
/// distance of the inverses is reported as a value.
pub fn measure_distance(fam: &FiberFamily, grid: usize) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let base = fam.unperturbed();
    let delta = fam.perturbation.as_ref().map_or(0.0, |e| e.delta);
    let q = region_box(p, RegionId::Qplus).expect("Q+");
    let side = grid.max(2);
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut out = Vec::new();
    for s in SymbolVector::all(k) {
        let (mut c0, mut c0_inv, mut c1, mut c1_inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut x = q.center();
        for i in 0..side {
            for j in 0..side {
                x[k - 2] = q.lo[k - 2] + q.width(k - 2) * i as f64 / (side - 1) as f64;
                x[k - 1] = q.lo[k - 1] + q.width(k - 1) * j as f64 / (side - 1) as f64;
                let g = fam.eval(s, &x).expect("dimension");
                let f = base.eval(s, &x).expect("dimension");
                c0 = c0.max(dist(&g, &f));
                let back = base.inverse_unrestricted(s, &g, 1e-15).expect("dimension");
                c0_inv = c0_inv.max(dist(&back, &x));
                let dg = fam.jacobian(s, &x).expect("dimension");
                let df = base.jacobian(s, &x).expect("dimension");
                c1 = c1.max(dg.sub(&df).spectral_norm());
                // D(g^-1)(g(x)) = Dg(x)^-1 and D(f^-1)(g(x)) = Df(f^-1(g(x)))^-1
                let df_back = base.jacobian(s, &back).expect("dimension");
                if let (Some(a), Some(b)) = (dg.inverse(), df_back.inverse()) {
                    c1_inv = c1_inv.max(a.sub(&b).spectral_norm());
                }
            }
        }
        let margin = delta - c0.max(c0_inv).max(c1);
        out.push(
            Certificate::new(format!("perturbed f_{s} is delta-close to f_{s} (C0 of map and inverse, C1 of map)"), margin >= 0.0, margin)
                .with_values([("delta", delta), ("c0", c0), ("c0_inverse", c0_inv), ("c1", c1), ("c1_inverse", c1_inv)]),
        );
    }
    out
}
