//! Forward iteration of the skew product along a base sequence.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::geometry::{BoxN, RegionId, RegionTest};
use crate::symbolic::Word;

/// Called after every step with the post-step time `t`, the letter just
/// applied (`letter = omega_{t-1}`) and the new fiber point `x_t`.
pub trait StepObserver {
    fn observe(&mut self, t: u64, letter: u32, x: &[f64]);
}

impl StepObserver for () {
    #[inline]
    fn observe(&mut self, _: u64, _: u32, _: &[f64]) {}
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCount {
    pub hits: u64,
    pub freq: f64,
    pub first_hit: Option<u64>,
}

/// Visit counts: a visit at time `t` means `x_t` lies in the region; visits
/// with `t <= burn_in` are not counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitStats {
    pub steps: u64,
    pub burn_in: u64,
    pub counts: BTreeMap<String, RegionCount>,
}

impl VisitStats {
    pub fn freq(&self, id: RegionId) -> f64 {
        self.counts.get(&id.to_string()).map(|c| c.freq).unwrap_or(0.0)
    }

    pub fn hits(&self, id: RegionId) -> u64 {
        self.counts.get(&id.to_string()).map(|c| c.hits).unwrap_or(0)
    }
}

/// A running orbit. Advancing in several chunks gives the same state and
/// statistics as one call over the concatenated letters.
#[derive(Debug, Clone)]
pub struct Orbit<'a> {
    fam: &'a FiberFamily,
    pub time: u64,
    pub x: Vec<f64>,
    burn_in: u64,
    qplus: BoxN,
    tests: Vec<RegionTest>,
    hits: Vec<u64>,
    first: Vec<Option<u64>>,
}

impl<'a> Orbit<'a> {
    pub fn new(fam: &'a FiberFamily, x0: &[f64], burn_in: u64, regions: &[RegionId]) -> Result<Self> {
        let p = &fam.params;
        if x0.len() != p.k {
            return Err(Error::Dimension { expected: p.k, got: x0.len() });
        }
        let tests = regions.iter().map(|&r| RegionTest::new(p, r)).collect::<Result<Vec<_>>>()?;
        let n = tests.len();
        Ok(Orbit {
            fam,
            time: 0,
            x: x0.to_vec(),
            burn_in,
            qplus: crate::geometry::region_box(p, RegionId::Qplus)?,
            tests,
            hits: vec![0; n],
            first: vec![None; n],
        })
    }

    /// Applies the letters in order, aborting when the orbit leaves Q+.
    pub fn advance<O: StepObserver>(&mut self, letters: &[u32], obs: &mut O) -> Result<()> {
        for &l in letters {
            self.fam.apply_in_place(l, &mut self.x);
            self.time += 1;
            if !self.qplus.contains(&self.x) {
                return Err(Error::Escape { time: self.time, point: self.x.clone() });
            }
            if self.time > self.burn_in {
                for (i, t) in self.tests.iter().enumerate() {
                    if t.contains(&self.x) {
                        self.hits[i] += 1;
                        if self.first[i].is_none() {
                            self.first[i] = Some(self.time);
                        }
                    }
                }
            }
            obs.observe(self.time, l, &self.x);
        }
        Ok(())
    }

    pub fn stats(&self) -> VisitStats {
        let counted = self.time.saturating_sub(self.burn_in);
        let counts = self
            .tests
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let freq = if counted > 0 { self.hits[i] as f64 / counted as f64 } else { 0.0 };
                (t.id.to_string(), RegionCount { hits: self.hits[i], freq, first_hit: self.first[i] })
            })
            .collect();
        VisitStats { steps: self.time, burn_in: self.burn_in, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRun {
    pub x: Vec<f64>,
    pub stats: VisitStats,
}

/// Iterates `x0` along all letters of `base` and collects visit statistics.
pub fn iterate(fam: &FiberFamily, base: &[u32], x0: &[f64], burn_in: u64, regions: &[RegionId]) -> Result<OrbitRun> {
    let mut o = Orbit::new(fam, x0, burn_in, regions)?;
    o.advance(base, &mut ())?;
    Ok(OrbitRun { x: o.x.clone(), stats: o.stats() })
}

/// Records `(t, x_t)` every `stride` steps.
pub struct TraceRecorder<W: Write> {
    pub stride: u64,
    out: W,
    pub error: Option<std::io::Error>,
}

impl<W: Write> TraceRecorder<W> {
    pub fn new(stride: u64, out: W) -> Self {
        TraceRecorder { stride: stride.max(1), out, error: None }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> StepObserver for TraceRecorder<W> {
    fn observe(&mut self, t: u64, _: u32, x: &[f64]) {
        if self.error.is_none() && t.is_multiple_of(self.stride) {
            let line = serde_json::json!({ "t": t, "x": x });
            if let Err(e) = writeln!(self.out, "{line}") {
                self.error = Some(e);
            }
        }
    }
}

/// `f_w(x)`: letters applied left to right.
pub fn apply_word(fam: &FiberFamily, w: &Word, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &l in &w.letters {
        fam.apply_in_place(l, &mut y);
    }
    y
}

/// Outward-rounded enclosure of `f_w(b)`.
pub fn apply_word_box(fam: &FiberFamily, w: &Word, b: &BoxN) -> BoxN {
    let mut bx = b.clone();
    for &l in &w.letters {
        bx = fam.image_box(l, &bx);
    }
    bx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::symbolic::sample_base;

    #[test]
    fn chunked_equals_single() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let base = sample_base(9, 20_000, 2);
        let regions = [RegionId::R, RegionId::P, RegionId::A(2)];
        let one = iterate(&fam, &base.letters, &[0.5, 0.5], 256, &regions).unwrap();
        let mut o = Orbit::new(&fam, &[0.5, 0.5], 256, &regions).unwrap();
        for chunk in base.letters.chunks(777) {
            o.advance(chunk, &mut ()).unwrap();
        }
        assert_eq!(o.stats(), one.stats);
        assert_eq!(o.x, one.x);
    }

    #[test]
    fn all_zero_base_converges_to_origin_level() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let y = apply_word(&fam, &Word::repeat(2, 0, 4000), &[0.7, 0.6]);
        assert!(y[0].abs() < 1e-12);
        assert!((y[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn escape_is_reported() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let err = iterate(&fam, &[0, 0], &[1.5, 0.5], 0, &[]).unwrap_err();
        assert!(matches!(err, Error::Escape { time: 1, .. }));
    }

    #[test]
    fn box_image_contains_orbit() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let w = Word::new(2, sample_base(4, 300, 2).letters);
        let b = BoxN::around(&[0.4, 0.4], 1e-3);
        let img = apply_word_box(&fam, &w, &b);
        assert!(img.contains(&apply_word(&fam, &w, &[0.4, 0.4])));
    }
}
