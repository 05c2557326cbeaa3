//! Finite words that steer orbits: the upper IFS, greedy critical words,
//! entry words, backward ascent and the full critical-word pipeline.

mod ascent;
mod critical;
mod greedy;
mod negut;

pub use ascent::{ascent_word, AscentRegion, AscentWord};
pub use critical::{critical_word_for, descent_tail, CriticalMethod, CriticalWord};
pub use greedy::{entry_word, greedy_critical_word, EntryWord, GreedyWord};
pub use negut::{negut_frequency_experiment, NegutReport, NegutSetup};

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::{f1, g0};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance to the nearest endpoint; negative outside.
    pub fn depth(&self, x: f64) -> f64 {
        (x - self.lo).min(self.hi - x)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// Intervals of the upper iterated function system
/// `f_{m,v} = h_m x g_v`, `h_m = f1 o f0^m`, `|v| = m + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentData {
    pub a: f64,
    pub c: f64,
    pub kc: u32,
    pub lambda: f64,
    pub l_minus: Interval,
    pub l: Interval,
    pub l_plus: Interval,
    pub j_minus: Interval,
    pub j: Interval,
    pub j_plus: Interval,
    pub delta_j: f64,
}

impl DescentData {
    /// Intervals only, with no coverage check.
    pub fn from_params(p: &Params) -> Self {
        Self::with_delta_j(p, p.h / 8.0)
    }

    pub fn with_delta_j(p: &Params, delta_j: f64) -> Self {
        let (a, c, h) = (p.a, p.c, p.h);
        let j = Interval::new(0.25 + h / 2.0, 1.0 - h / 2.0);
        DescentData {
            a,
            c,
            kc: p.kc,
            lambda: p.lambda,
            l_minus: Interval::new(a + 2.0 * c, 1.0 - c),
            l: Interval::new(a + c, 1.0 - 0.75 * c),
            l_plus: Interval::new(a, 1.0 + c),
            j_minus: Interval::new(j.lo + delta_j, j.hi - delta_j),
            j,
            j_plus: Interval::new(0.25 - h / 2.0, 1.0 + h / 2.0),
            delta_j,
        }
    }

    /// `h_m(x) = f1(lambda^m x)`.
    pub fn h_m(&self, m: u32, x: f64) -> f64 {
        f1(self.lambda.powi(m as i32) * x)
    }

    /// Closed-form coverage margin of `U_m h_m(L-)` over `L`.
    pub fn coverage_margin_closed_form(&self) -> f64 {
        self.c / 3.0 - (4.0 / 3.0) * self.c * self.c / self.a
    }
}

/// Builds the upper IFS and checks robust coverage.
pub fn build_upper_ifs(p: &Params) -> Result<DescentData> {
    build_upper_ifs_with(p, p.h / 8.0)
}

pub fn build_upper_ifs_with(p: &Params, delta_j: f64) -> Result<DescentData> {
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    if p.c > p.a / 4.0 {
        // f1(L') covers L only when c <= a/4; report the amount of violation
        let violation = (2.0 / 3.0) * p.c + (4.0 / 3.0) * p.c * p.c / p.a - p.c;
        return Err(Error::CoverageFails { margin: violation });
    }
    let dd = DescentData::with_delta_j(p, delta_j);
    let margin = coverage_l(&dd).min(coverage_j(p, &dd));
    if margin < 0.0 || dd.l_minus.is_empty() {
        return Err(Error::CoverageFails { margin });
    }
    Ok(dd)
}

/// Margin by which `U_m h_m(L-)` covers `L`, from the actual union of intervals.
fn coverage_l(dd: &DescentData) -> f64 {
    if dd.l_minus.is_empty() {
        return -dd.l_minus.width().abs();
    }
    let mut pieces: Vec<(f64, f64)> = (0..=dd.kc).map(|m| (dd.h_m(m, dd.l_minus.lo), dd.h_m(m, dd.l_minus.hi))).collect();
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut margin = dd.l.lo - pieces[0].0;
    let mut reach = pieces[0].1;
    for &(lo, hi) in &pieces[1..] {
        if lo > dd.l.hi {
            break;
        }
        if lo > reach && reach < dd.l.hi {
            // a gap inside L
            margin = margin.min(reach - lo);
        }
        reach = reach.max(hi);
    }
    margin.min(reach - dd.l.hi)
}

/// Margin by which `g0(J-) U g1(J-)` covers `J`.
fn coverage_j(p: &Params, dd: &DescentData) -> f64 {
    let (a0, b0) = (g0(p, dd.j_minus.lo), g0(p, dd.j_minus.hi));
    let (a1, b1) = (f1(dd.j_minus.lo), f1(dd.j_minus.hi));
    let mut m = (dd.j.lo - a0.min(a1)).min(b0.max(b1) - dd.j.hi);
    if a1 > b0 {
        m = m.min(b0 - a1);
    }
    m
}

/// Robust inclusion, invariance, contraction and coverage of the upper IFS.
pub fn check_ifs_assumptions(p: &Params, dd: &DescentData) -> Vec<Certificate> {
    let mut out = Vec::new();

    let incl = [
        dd.l_minus.lo - dd.l.lo,
        dd.l.hi - dd.l_minus.hi,
        dd.l.lo - dd.l_plus.lo,
        dd.l_plus.hi - dd.l.hi,
        dd.j_minus.lo - dd.j.lo,
        dd.j.hi - dd.j_minus.hi,
        dd.j.lo - dd.j_plus.lo,
        dd.j_plus.hi - dd.j.hi,
    ];
    let gap = incl.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(Certificate::from_margin("robust inclusion K- in K in K+", gap).with_values([("epsilon", gap / 2.0)]));

    let mut inv = f64::INFINITY;
    let mut inv_at = 0.0;
    for m in 0..=dd.kc {
        let lo = dd.h_m(m, dd.l_plus.lo) - dd.l_plus.lo;
        let hi = dd.l_plus.hi - dd.h_m(m, dd.l_plus.hi);
        if lo.min(hi) < inv {
            inv = lo.min(hi);
            inv_at = m as f64;
        }
    }
    for (lo, hi) in [(g0(p, dd.j_plus.lo), g0(p, dd.j_plus.hi)), (f1(dd.j_plus.lo), f1(dd.j_plus.hi))] {
        inv = inv.min(lo - dd.j_plus.lo).min(dd.j_plus.hi - hi);
    }
    out.push(Certificate::from_margin("robust invariance f_{m,v}(K+) in int K+", inv).with_witness(vec![inv_at]));

    // g0' on J+ peaks at its left endpoint, where it equals 1
    let (_, g0_sup) = crate::scalar::derivative_range(crate::scalar::ScalarMapId::G0, p, dd.j_plus.lo, dd.j_plus.hi);
    // cos(pi (4n - 1/2)) is exactly zero
    let g0_sup = if (g0_sup - 1.0).abs() < 1e-12 { 1.0 } else { g0_sup };
    let x_factor: f64 = 2.0 / 3.0;
    let max_factor = x_factor.max(g0_sup).max(2.0 / 3.0);
    out.push(
        Certificate::from_margin("non-expansion on K+ (strict off the left edge of J+)", 1.0 - max_factor)
            .with_witness(vec![dd.l_plus.lo, dd.j_plus.lo])
            .with_values([("max_factor", max_factor), ("x_factor", x_factor), ("g0_sup_on_J+", g0_sup)]),
    );

    let cl = coverage_l(dd);
    let closed = dd.coverage_margin_closed_form();
    out.push(Certificate::from_margin("robust coverage of L", cl).with_values([("closed_form", closed), ("interval_union", cl)]));
    let cj = coverage_j(p, dd);
    out.push(Certificate::from_margin("robust coverage of J", cj).with_values([("delta_j", dd.delta_j)]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn n128_certificates() {
        let p = derive_params(128, 2).unwrap();
        let dd = build_upper_ifs(&p).unwrap();
        let certs = check_ifs_assumptions(&p, &dd);
        assert!(certs.iter().all(|c| c.pass), "{certs:#?}");
        let cov = &certs[3];
        assert!((cov.margin - dd.coverage_margin_closed_form()).abs() < 1e-10);
    }

    #[test]
    fn j_coverage_breaks_when_delta_grows() {
        let p = derive_params(128, 2).unwrap();
        let m = |d: f64| coverage_j(&p, &DescentData::with_delta_j(&p, d));
        // h/6 - 2 delta/3
        assert!((m(p.h / 8.0) - p.h / 12.0).abs() < 1e-15);
        assert!(build_upper_ifs_with(&p, p.h / 2.0).is_err());
    }

    #[test]
    fn small_n_fails_coverage() {
        let p = derive_params(16, 2).unwrap();
        match build_upper_ifs(&p) {
            Err(Error::CoverageFails { margin }) => assert!((margin - 1.0 / 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
