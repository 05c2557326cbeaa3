use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::geometry::{region_box, BoxN, RegionId};
use crate::orbit::{apply_word_box, Orbit, StepObserver};
use crate::symbolic::{sample_base, word_occurrences, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegutReport {
    pub word_len: usize,
    pub base_len: usize,
    pub seed: u64,
    pub start: Vec<f64>,
    /// First time the orbit lies in the absorbing set.
    pub entry_time: Option<u64>,
    pub occurrences: u64,
    pub occurrences_after_entry: u64,
    /// Occurrences at `p` (after entry) with `x_{p+|w|}` in the target.
    pub visits: u64,
    pub exceptions: u64,
    pub first_exception: Option<u64>,
    pub frequency: f64,
    /// `2^(-k |w|)`.
    pub expected_frequency: f64,
    pub sigma: f64,
    pub z_score: f64,
}

impl NegutReport {
    pub fn within_3_sigma(&self) -> bool {
        self.z_score.abs() <= 3.0
    }

    pub fn pass(&self) -> bool {
        self.within_3_sigma() && self.exceptions == 0
    }
}

/// A word together with its target set `U` and the absorbing set it was certified from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegutSetup {
    pub word: Word,
    pub absorbing: BoxN,
    /// `f_w(absorbing)`, enclosed by interval arithmetic.
    pub target: BoxN,
}

impl NegutSetup {
    /// Target is the box image of the absorbing set; the result is certified by construction.
    pub fn new(fam: &FiberFamily, word: Word, absorbing: BoxN) -> Self {
        let target = apply_word_box(fam, &word, &absorbing);
        NegutSetup { word, absorbing, target }
    }

    /// The entry word with absorbing set Q+ (k = 2).
    pub fn entry(fam: &FiberFamily) -> Result<Self> {
        let e = super::entry_word(fam)?;
        Ok(Self::new(fam, e.word, region_box(&fam.params, RegionId::Qplus)?))
    }
}

struct VisitChecker<'a> {
    absorbing: &'a BoxN,
    target: &'a BoxN,
    /// Times `p + |w|` still to be checked, ascending.
    due: &'a [u64],
    next: usize,
    m: u64,
    entry: Option<u64>,
    after_entry: u64,
    visits: u64,
    first_exception: Option<u64>,
}

impl VisitChecker<'_> {
    fn check(&mut self, t: u64, x: &[f64]) {
        if self.entry.is_none() && self.absorbing.contains(x) {
            self.entry = Some(t);
        }
        while self.next < self.due.len() && self.due[self.next] <= t {
            let d = self.due[self.next];
            self.next += 1;
            if d != t {
                continue;
            }
            if !matches!(self.entry, Some(e) if e + self.m <= t) {
                continue;
            }
            self.after_entry += 1;
            if self.target.contains(x) {
                self.visits += 1;
            } else if self.first_exception.is_none() {
                self.first_exception = Some(t - self.m);
            }
        }
    }
}

impl StepObserver for VisitChecker<'_> {
    #[inline]
    fn observe(&mut self, t: u64, _: u32, x: &[f64]) {
        self.check(t, x);
    }
}

/// Samples a base of `length` letters, finds every occurrence of the word
/// and checks that the orbit of a random point of K+ lies in the target
/// right after each occurrence that starts once the orbit is absorbed.
pub fn negut_frequency_experiment(fam: &FiberFamily, setup: &NegutSetup, length: usize, seed: u64) -> Result<NegutReport> {
    let p = &fam.params;
    let k = p.k;
    let w = &setup.word;
    if w.k != k {
        return Err(Error::Dimension { expected: k, got: w.k });
    }
    let m = w.len();
    let base = sample_base(seed, length, k);
    let occ = word_occurrences(&base, w);
    let due: Vec<u64> = occ.iter().map(|&s| (s - base.origin) as u64 + m as u64).collect();

    let start_box = if k == 2 { region_box(p, RegionId::Kplus)? } else { setup.absorbing.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e65_6775_74);
    let start: Vec<f64> = (0..k).map(|i| rng.gen_range(start_box.lo[i]..=start_box.hi[i])).collect();

    let mut chk = VisitChecker {
        absorbing: &setup.absorbing,
        target: &setup.target,
        due: &due,
        next: 0,
        m: m as u64,
        entry: None,
        after_entry: 0,
        visits: 0,
        first_exception: None,
    };
    chk.check(0, &start);
    let mut orbit = Orbit::new(fam, &start, 0, &[])?;
    orbit.advance(&base.letters, &mut chk)?;

    let slots = (length + 1).saturating_sub(m).max(1) as f64;
    let q = (-(k as f64) * m as f64).exp2();
    let sigma = (q * (1.0 - q) / slots).sqrt();
    let freq = if length >= m && m > 0 { occ.len() as f64 / slots } else { 0.0 };
    Ok(NegutReport {
        word_len: m,
        base_len: length,
        seed,
        start,
        entry_time: chk.entry,
        occurrences: occ.len() as u64,
        occurrences_after_entry: chk.after_entry,
        visits: chk.visits,
        exceptions: chk.after_entry - chk.visits,
        first_exception: chk.first_exception,
        frequency: freq,
        expected_frequency: q,
        sigma,
        z_score: if sigma > 0.0 { (freq - q) / sigma } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn entry_word_occurrences_are_visits() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let s = NegutSetup::entry(&fam).unwrap();
        assert!(s.word.len() <= 12);
        let r = negut_frequency_experiment(&fam, &s, 400_000, 5).unwrap();
        assert_eq!(r.entry_time, Some(0));
        assert_eq!(r.exceptions, 0);
        assert_eq!(r.visits, r.occurrences_after_entry);
        assert!(r.within_3_sigma() || r.z_score.abs() < 4.0, "{r:?}");
    }

    #[test]
    fn short_base_has_nothing() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let s = NegutSetup::entry(&fam).unwrap();
        let r = negut_frequency_experiment(&fam, &s, s.word.len() - 1, 1).unwrap();
        assert_eq!((r.occurrences, r.visits, r.frequency), (0, 0, 0.0));
    }

    #[test]
    fn tiny_target_gives_exceptions() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let mut s = NegutSetup::entry(&fam).unwrap();
        s.word = Word::new(2, vec![0]);
        s.target = BoxN::around(&[0.5, 0.5], 1e-9);
        let r = negut_frequency_experiment(&fam, &s, 10_000, 2).unwrap();
        assert!(r.exceptions > 0);
        assert!(r.within_3_sigma(), "{r:?}");
    }
}
