//! The invisibility rate of R: theoretical epsilon, zero-run statistics and
//! R visits in one report.

use serde::{Deserialize, Serialize};

use super::zero_run::{check_zero_run_lemma, directed_descent_base, run_crafted, LemmaCheckConfig, RunOutcome};
use crate::error::Result;
use crate::fiber::FiberFamily;

/// Below this many expected long runs the frequency cannot be measured directly.
const OBSERVABLE_RUNS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvisibilityReport {
    pub n: u32,
    pub k: usize,
    pub config: LemmaCheckConfig,
    /// `epsilon = 2^epsilon_log2`, `epsilon_log2 = -n^k`.
    pub epsilon_log2: f64,
    /// Zero when `2^-n^k` underflows.
    pub epsilon_theoretical: f64,
    /// Expected number of long zero runs over all random steps.
    pub expected_long_runs: f64,
    pub direct_measurement_feasible: bool,
    pub random_steps: u64,
    pub random_long_runs: u64,
    pub random_r_visits: u64,
    pub empirical_r_frequency: f64,
    pub random_violations: u64,
    pub crafted: Vec<RunOutcome>,
    pub verdict: String,
}

impl InvisibilityReport {
    /// R visits never outnumber the long zero runs on the same base.
    pub fn implication_consistent(&self) -> bool {
        self.random_r_visits <= self.random_long_runs && self.crafted.iter().all(|c| c.r_visits <= c.long_runs)
    }
}

/// Random-orbit statistics plus one crafted base with `windows` descent windows.
pub fn invisibility_report(fam: &FiberFamily, cfg: &LemmaCheckConfig, windows: usize) -> Result<InvisibilityReport> {
    let p = &fam.params;
    let rep = check_zero_run_lemma(fam, cfg)?;
    let horizon = (p.n as u64).pow(p.k as u32);
    let random_steps = cfg.steps.saturating_sub(horizon) * cfg.orbits as u64;
    let epsilon_log2 = p.epsilon_log2();
    let expected = random_steps as f64 * epsilon_log2.exp2();
    let feasible = expected >= OBSERVABLE_RUNS;

    let mut crafted = Vec::new();
    if windows > 0 {
        let hold = if p.k > 2 { horizon as usize } else { 0 };
        let span = (hold + 8 * horizon as usize).max(8_000);
        let x0 = vec![0.5; p.k];
        let db = directed_descent_base(fam, &x0, cfg.seed, span * windows, windows, hold)?;
        crafted.push(run_crafted(fam, &db.base, &db.x0, &format!("{windows} descent windows"))?);
    }
    let violations = rep.violations() + crafted.iter().map(|c| c.violations()).sum::<u64>();
    let verdict = if violations > 0 {
        format!("implication violated {violations} times")
    } else if feasible {
        "measured directly".to_string()
    } else {
        "bounded by zero-run frequency".to_string()
    };
    Ok(InvisibilityReport {
        n: p.n,
        k: p.k,
        config: cfg.clone(),
        epsilon_log2,
        epsilon_theoretical: p.epsilon(),
        expected_long_runs: expected,
        direct_measurement_feasible: feasible,
        random_steps,
        random_long_runs: rep.random_long_runs,
        random_r_visits: rep.random_r_visits,
        empirical_r_frequency: if random_steps > 0 { rep.random_r_visits as f64 / random_steps as f64 } else { 0.0 },
        random_violations: rep.violations(),
        crafted,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn n16_report() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let rep = invisibility_report(&fam, &LemmaCheckConfig { orbits: 2, steps: 100_000, seed: 3 }, 3).unwrap();
        assert_eq!(rep.epsilon_log2, -256.0);
        assert_eq!(rep.epsilon_theoretical, 2f64.powi(-256));
        assert_eq!(rep.empirical_r_frequency, 0.0);
        assert_eq!(rep.verdict, "bounded by zero-run frequency");
        assert!(rep.crafted[0].r_visits >= 3);
        assert!(rep.implication_consistent());
    }

    #[test]
    fn n11_epsilon() {
        let p = derive_params(11, 2).unwrap();
        let fam = FiberFamily::new(p);
        let rep = invisibility_report(&fam, &LemmaCheckConfig { orbits: 1, steps: 1_000, seed: 3 }, 0).unwrap();
        assert_eq!(rep.epsilon_log2, -121.0);
        assert!(!rep.direct_measurement_feasible);
    }
}
