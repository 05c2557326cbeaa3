use serde::{Deserialize, Serialize};

use super::DescentData;
use crate::error::{Error, Result};
use crate::fiber::{FiberFamily, SymbolVector};
use crate::geometry::{region_box, strip_index, RegionId};
use crate::orbit::apply_word;
use crate::scalar::{f1, f1_inv, g0_inv};
use crate::symbolic::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AscentRegion {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentWord {
    /// Forward word: `f_word(preimage) = q`.
    pub word: Word,
    pub preimage: Vec<f64>,
    /// `|f_word(preimage) - q|` recomputed forward.
    pub roundtrip_error: f64,
    /// Strip index of each backward preimage (0 once above 1/4).
    pub strip_trace: Vec<u32>,
    pub region: AscentRegion,
}

const TOL: f64 = 1e-15;

/// Backward search for a word carrying a point of K to `q`.
///
/// Points above `y = 1/4` are pulled back by choosing `g0^-1` or `g1^-1`
/// letter by letter while the first coordinate follows `f0^-1` / `f1^-1` into L.
/// Points below climb strip by strip: wait with `f00^-1` until the first
/// coordinate enters `f10(D)`, then hop with `f10^-1`.
pub fn ascent_word(fam: &FiberFamily, dd: &DescentData, q: &[f64], cap: usize) -> Result<AscentWord> {
    let p = &fam.params;
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    if !region_box(p, RegionId::Qminus)?.contains(q) {
        return Err(Error::TargetOutsideQminus(q.to_vec()));
    }
    let n = p.n as f64;
    let hop = (f1(2.0 / n), f1(3.0 / n));
    let region = if q[1] > 0.25 { AscentRegion::Upper } else { AscentRegion::Lower };
    let mut back: Vec<u32> = Vec::new();
    let mut trace = Vec::new();
    let mut pt = q.to_vec();
    let mut pending_f0 = 0u32;
    let strip = |y: f64| strip_index(p, y).unwrap_or(0);

    loop {
        if back.len() >= cap {
            return Err(Error::SearchCap(cap));
        }
        let upper = pt[1] > 0.25;
        if upper && pending_f0 == 0 && dd.l.contains(pt[0]) && dd.j.contains(pt[1]) {
            break;
        }
        let letter = if upper {
            let bx = if pending_f0 > 0 {
                pending_f0 -= 1;
                0
            } else if pt[0] < dd.l.lo {
                0
            } else if pt[0] > dd.l.hi {
                1
            } else {
                // one IFS round: f1^-1 now, then m steps of f0^-1
                pending_f0 = best_round(dd, pt[0]);
                1
            };
            let c0 = g0_inv(p, pt[1], TOL);
            let c1 = f1_inv(pt[1]);
            let by = if pt[1] < dd.j.lo {
                0
            } else if pt[1] > dd.j.hi {
                1
            } else if c1 < 0.25 || dd.j.depth(c0) >= dd.j.depth(c1) {
                0
            } else {
                1
            };
            by << 1 | bx
        } else if pt[0] >= hop.0 && pt[0] <= hop.1 {
            1
        } else if pt[0] < hop.0 {
            0
        } else {
            1
        };
        let s = SymbolVector::new(letter, 2)?;
        pt = fam.inverse_unrestricted(s, &pt, TOL)?;
        back.push(letter);
        trace.push(strip(pt[1]));
    }
    back.reverse();
    let word = Word::new(2, back);
    let fwd = apply_word(fam, &word, &pt);
    let roundtrip_error = ((fwd[0] - q[0]).powi(2) + (fwd[1] - q[1]).powi(2)).sqrt();
    Ok(AscentWord { word, preimage: pt, roundtrip_error, strip_trace: trace, region })
}

fn best_round(dd: &DescentData, x: f64) -> u32 {
    let u0 = f1_inv(x);
    let mut best = (f64::NEG_INFINITY, 0);
    let mut lam = 1.0;
    for m in 0..=dd.kc {
        let d = dd.l.depth(u0 / lam);
        if d > best.0 {
            best = (d, m);
        }
        lam *= dd.lambda;
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::words::build_upper_ifs;

    #[test]
    fn upper_target_roundtrips() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let dd = build_upper_ifs(&p).unwrap();
        let a = ascent_word(&fam, &dd, &[0.5, 0.6], 10_000).unwrap();
        assert_eq!(a.region, AscentRegion::Upper);
        assert!(a.roundtrip_error < 1e-8, "{}", a.roundtrip_error);
        assert!(dd.l.contains(a.preimage[0]) && dd.j.contains(a.preimage[1]));
    }

    #[test]
    fn lower_target_climbs_monotonically() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let dd = build_upper_ifs(&p).unwrap();
        let a = ascent_word(&fam, &dd, &[0.5, 0.2], 1_000_000).unwrap();
        assert_eq!(a.region, AscentRegion::Lower);
        let bad: Vec<_> = a.strip_trace.windows(2).enumerate().filter(|(_, w)| w[1] > w[0]).map(|(i, w)| (i, w[0], w[1])).take(5).collect();
        assert!(bad.is_empty(), "{bad:?} {}", a.strip_trace.len());
        assert_eq!(*a.strip_trace.last().unwrap(), 0);
    }

    #[test]
    fn rejects_points_outside_qminus() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let dd = build_upper_ifs(&p).unwrap();
        assert!(matches!(ascent_word(&fam, &dd, &[0.01, 0.5], 100), Err(Error::TargetOutsideQminus(_))));
    }
}
