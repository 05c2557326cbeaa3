//! Zero-run implications: a visit to W' (or R) is always preceded by a long
//! run of zeros in the relevant base coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{FiberFamily, SymbolVector};
use crate::geometry::{region_box, RegionId, RegionTest};
use crate::orbit::{Orbit, StepObserver};
use crate::symbolic::{BaseSequence, BernoulliSource, Word};

const CHUNK: usize = 1 << 16;

/// Which fiber points trigger a check.
#[derive(Debug, Clone)]
pub enum Gate {
    Region(RegionTest),
    /// `lo < x[index] < hi`.
    Coordinate { index: usize, lo: f64, hi: f64 },
}

impl Gate {
    #[inline]
    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Gate::Region(t) => t.contains(x),
            Gate::Coordinate { index, lo, hi } => *lo < x[*index] && x[*index] < *hi,
        }
    }
}

/// "Every visit to `gate` at time `t > horizon` is preceded by `horizon`
/// zeros in each coordinate of `coords`" (coordinates 1-based).
#[derive(Debug, Clone)]
pub struct Implication {
    pub name: String,
    pub gate: Gate,
    pub coords: Vec<usize>,
    pub horizon: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImplicationOutcome {
    pub name: String,
    pub coords: Vec<usize>,
    pub horizon: u64,
    pub visits: u64,
    pub violations: u64,
    /// `(time, shortest zero run)` of the first violation.
    pub first_violation: Option<(u64, u64)>,
    /// Shortest zero run seen at a checked visit.
    pub min_run_at_visit: Option<u64>,
}

impl ImplicationOutcome {
    fn merge(&mut self, o: &ImplicationOutcome) {
        self.visits += o.visits;
        self.violations += o.violations;
        if self.first_violation.is_none() {
            self.first_violation = o.first_violation;
        }
        self.min_run_at_visit = match (self.min_run_at_visit, o.min_run_at_visit) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

/// The implications checked for a parameter set.
///
/// For `k = 2`: W' needs `n` zeros in both coordinates, R needs `n^2` zeros in
/// the second. For `k >= 3` the W' step is replaced by the two-dimensional
/// statement one level down (`x_{k-1}` in `(-2nu, 1/10)` needs `n^{k-1}`
/// zeros in coordinate `k-1`), and R needs `n^k` zeros in coordinate `k`.
pub fn standard_implications(fam: &FiberFamily) -> Vec<Implication> {
    let p = &fam.params;
    let (n, k) = (p.n as u64, p.k);
    let r = Implication {
        name: "R".into(),
        gate: Gate::Region(RegionTest::new(p, RegionId::R).expect("R")),
        coords: vec![k],
        horizon: n.pow(k as u32),
    };
    let first = if k == 2 {
        Implication {
            name: "W'".into(),
            gate: Gate::Region(RegionTest::new(p, RegionId::Wprime).expect("W'")),
            coords: vec![1, 2],
            horizon: n,
        }
    } else {
        Implication {
            name: format!("x{} in (-2nu, 1/10)", k - 1),
            gate: Gate::Coordinate { index: k - 2, lo: -2.0 * p.nu, hi: 0.1 },
            coords: vec![k - 1],
            horizon: n.pow(k as u32 - 1),
        }
    };
    vec![first, r]
}

/// Observer tracking zero runs per coordinate and checking each implication.
pub struct LemmaChecker {
    implications: Vec<Implication>,
    runs: Vec<u64>,
    outcomes: Vec<ImplicationOutcome>,
    r_index: usize,
    /// Steps `t > r_horizon` at which the R-run condition holds.
    pub long_runs: u64,
    pub r_visits: u64,
}

impl LemmaChecker {
    pub fn new(k: usize, implications: Vec<Implication>) -> Self {
        let outcomes = implications
            .iter()
            .map(|i| ImplicationOutcome { name: i.name.clone(), coords: i.coords.clone(), horizon: i.horizon, ..Default::default() })
            .collect();
        let r_index = implications.iter().position(|i| i.name == "R").unwrap_or(implications.len().saturating_sub(1));
        LemmaChecker { implications, runs: vec![0; k], outcomes, r_index, long_runs: 0, r_visits: 0 }
    }

    pub fn outcomes(&self) -> &[ImplicationOutcome] {
        &self.outcomes
    }
}

impl StepObserver for LemmaChecker {
    #[inline]
    fn observe(&mut self, t: u64, letter: u32, x: &[f64]) {
        for (i, r) in self.runs.iter_mut().enumerate() {
            if letter >> i & 1 == 0 {
                *r += 1;
            } else {
                *r = 0;
            }
        }
        for (j, imp) in self.implications.iter().enumerate() {
            if t <= imp.horizon {
                continue;
            }
            let run = imp.coords.iter().map(|&c| self.runs[c - 1]).min().unwrap_or(0);
            if j == self.r_index && run >= imp.horizon {
                self.long_runs += 1;
            }
            if !imp.gate.contains(x) {
                continue;
            }
            let o = &mut self.outcomes[j];
            o.visits += 1;
            if j == self.r_index {
                self.r_visits += 1;
            }
            o.min_run_at_visit = Some(o.min_run_at_visit.map_or(run, |m| m.min(run)));
            if run < imp.horizon {
                o.violations += 1;
                if o.first_violation.is_none() {
                    o.first_violation = Some((t, run));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckConfig {
    pub orbits: usize,
    pub steps: u64,
    pub seed: u64,
}

impl LemmaCheckConfig {
    pub fn validate(&self, fam: &FiberFamily) -> Result<()> {
        let horizon = (fam.params.n as u64).pow(fam.params.k as u32);
        if self.steps <= horizon {
            return Err(Error::Parse(format!("steps ({}) must exceed the burn-in n^k = {horizon}", self.steps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub label: String,
    pub steps: u64,
    pub r_visits: u64,
    pub long_runs: u64,
    pub implications: Vec<ImplicationOutcome>,
}

impl RunOutcome {
    pub fn violations(&self) -> u64 {
        self.implications.iter().map(|o| o.violations).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRunReport {
    pub n: u32,
    pub k: usize,
    pub config: LemmaCheckConfig,
    pub burn_in: u64,
    /// Merged over all random orbits.
    pub random: Vec<ImplicationOutcome>,
    pub random_r_visits: u64,
    pub random_long_runs: u64,
    pub escapes: u64,
}

impl ZeroRunReport {
    pub fn violations(&self) -> u64 {
        self.random.iter().map(|o| o.violations).sum()
    }
}

/// Uniform starting point in Q+ for orbit `index`.
pub fn start_point(fam: &FiberFamily, seed: u64, index: u64) -> Vec<f64> {
    let q = region_box(&fam.params, RegionId::Qplus).expect("Q+");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5747);
    rng.set_stream(index);
    (0..fam.k()).map(|i| rng.gen_range(q.lo[i]..=q.hi[i])).collect()
}

/// Runs one orbit along a streamed random base.
pub fn run_random_orbit(fam: &FiberFamily, seed: u64, index: u64, steps: u64) -> Result<RunOutcome> {
    let k = fam.k();
    let x0 = start_point(fam, seed, index);
    let mut orbit = Orbit::new(fam, &x0, 0, &[])?;
    let mut checker = LemmaChecker::new(k, standard_implications(fam));
    let mut src = BernoulliSource::new(seed, index, k);
    let mut buf = vec![0u32; CHUNK];
    let mut left = steps;
    while left > 0 {
        let len = (left as usize).min(CHUNK);
        src.fill(&mut buf[..len]);
        orbit.advance(&buf[..len], &mut checker)?;
        left -= len as u64;
    }
    Ok(RunOutcome {
        label: format!("random orbit {index}"),
        steps,
        r_visits: checker.r_visits,
        long_runs: checker.long_runs,
        implications: checker.outcomes().to_vec(),
    })
}

/// Runs `cfg.orbits` random orbits (stream `i` for orbit `i`) and merges the outcomes.
pub fn check_zero_run_lemma(fam: &FiberFamily, cfg: &LemmaCheckConfig) -> Result<ZeroRunReport> {
    cfg.validate(fam)?;
    let p = &fam.params;
    let runs: Vec<Result<RunOutcome>> = (0..cfg.orbits as u64).into_par_iter().map(|i| run_random_orbit(fam, cfg.seed, i, cfg.steps)).collect();
    let mut merged: Vec<ImplicationOutcome> = standard_implications(fam)
        .iter()
        .map(|i| ImplicationOutcome { name: i.name.clone(), coords: i.coords.clone(), horizon: i.horizon, ..Default::default() })
        .collect();
    let (mut r_visits, mut long_runs, mut escapes) = (0, 0, 0);
    for run in runs {
        match run {
            Ok(o) => {
                for (m, x) in merged.iter_mut().zip(&o.implications) {
                    m.merge(x);
                }
                r_visits += o.r_visits;
                long_runs += o.long_runs;
            }
            Err(Error::Escape { .. }) => escapes += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(ZeroRunReport {
        n: p.n,
        k: p.k,
        config: cfg.clone(),
        burn_in: p.default_burn_in(),
        random: merged,
        random_r_visits: r_visits,
        random_long_runs: long_runs,
        escapes,
    })
}

/// Runs the implication checks along a fixed base.
pub fn run_crafted(fam: &FiberFamily, base: &BaseSequence, x0: &[f64], label: &str) -> Result<RunOutcome> {
    let mut orbit = Orbit::new(fam, x0, 0, &[])?;
    let mut checker = LemmaChecker::new(fam.k(), standard_implications(fam));
    orbit.advance(&base.letters, &mut checker)?;
    Ok(RunOutcome {
        label: label.to_string(),
        steps: base.len() as u64,
        r_visits: checker.r_visits,
        long_runs: checker.long_runs,
        implications: checker.outcomes().to_vec(),
    })
}

/// Letters that drive `x` into R: wait with the all-zero letter until the
/// coupling weight `alpha(x_{k-1})` is nearly full, then fire the special
/// letter, until `x_k < target`. Then `dwell` more all-zero letters.
pub fn descent_word(fam: &FiberFamily, x: &[f64], target: f64, dwell: usize, cap: usize) -> Result<Word> {
    let k = fam.k();
    let special = SymbolVector::special(k).bits;
    let mut x = x.to_vec();
    let mut w = Word::empty(k);
    let mut last_fire = false;
    while x[k - 1] >= target {
        if w.len() >= cap {
            return Err(Error::SearchCap(cap));
        }
        let fire = !last_fire && fam.alpha.eval(x[k - 2]) >= 0.99;
        let l = if fire { special } else { 0 };
        fam.apply_in_place(l, &mut x);
        w.push(l);
        last_fire = fire;
    }
    for _ in 0..dwell {
        w.push(0);
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentBase {
    pub base: BaseSequence,
    pub x0: Vec<f64>,
    /// `[start, end)` of every inserted window (hold plus descent).
    pub windows: Vec<(usize, usize)>,
}

/// Random base with `windows` directed-descent insertions at evenly spaced
/// positions. Each insertion is `hold` all-zero letters followed by a
/// [`descent_word`] computed from the orbit state at that point.
pub fn directed_descent_base(fam: &FiberFamily, x0: &[f64], seed: u64, length: usize, windows: usize, hold: usize) -> Result<DescentBase> {
    let k = fam.k();
    let mut src = BernoulliSource::new(seed, 0, k);
    let mut letters = Vec::with_capacity(length);
    let mut x = x0.to_vec();
    let mut spans = Vec::new();
    let spacing = length / windows.max(1);
    let target = 0.1 - fam.params.h / 2.0;
    for w in 0..windows {
        let start = w * spacing + spacing / 4;
        while letters.len() < start {
            let l = src.next_letter();
            fam.apply_in_place(l, &mut x);
            letters.push(l);
        }
        for _ in 0..hold {
            fam.apply_in_place(0, &mut x);
            letters.push(0);
        }
        let word = descent_word(fam, &x, target, 32, length)?;
        for &l in &word.letters {
            fam.apply_in_place(l, &mut x);
            letters.push(l);
        }
        if letters.len() > (w + 1) * spacing {
            return Err(Error::OutOfBounds { position: start, len: letters.len() - start, length });
        }
        spans.push((start, letters.len()));
    }
    while letters.len() < length {
        let l = src.next_letter();
        letters.push(l);
    }
    Ok(DescentBase { base: BaseSequence::new(k, letters), x0: x0.to_vec(), windows: spans })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::symbolic::{find_zero_runs, sample_base_stream};

    #[test]
    fn checker_matches_naive_runs() {
        // the checker's run counters against find_zero_runs on the same base
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let base = sample_base_stream(4, 0, 20_000, 2);
        let mut checker = LemmaChecker::new(2, vec![Implication { name: "R".into(), gate: Gate::Coordinate { index: 0, lo: -10.0, hi: 10.0 }, coords: vec![2], horizon: 5 }]);
        let mut orbit = Orbit::new(&fam, &[0.5, 0.5], 0, &[]).unwrap();
        orbit.advance(&base.letters, &mut checker).unwrap();
        let naive = find_zero_runs(&base, 2, 5).into_iter().filter(|&t| t > 5).count() as u64;
        assert_eq!(checker.long_runs, naive);
        assert_eq!(checker.outcomes()[0].violations, 20_000 - 5 - naive);
    }

    #[test]
    fn random_orbits_never_reach_r() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let rep = check_zero_run_lemma(&fam, &LemmaCheckConfig { orbits: 4, steps: 200_000, seed: 1 }).unwrap();
        assert_eq!(rep.violations(), 0);
        assert_eq!(rep.random_r_visits, 0);
    }

    #[test]
    fn directed_descent_reaches_r_with_long_runs() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let db = directed_descent_base(&fam, &[0.5, 0.5], 3, 40_000, 3, 0).unwrap();
        let out = run_crafted(&fam, &db.base, &db.x0, "descent").unwrap();
        assert!(out.r_visits >= 3, "{out:?}");
        assert_eq!(out.violations(), 0, "{out:?}");
        assert!(out.r_visits <= out.long_runs);
    }
}
