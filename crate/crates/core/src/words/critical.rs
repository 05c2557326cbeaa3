use serde::{Deserialize, Serialize};

use super::{ascent_word, entry_word, greedy_critical_word, AscentRegion, DescentData};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::geometry::{region_box, BoxN, RegionId};
use crate::orbit::apply_word_box;
use crate::symbolic::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalMethod {
    /// The entry word alone already lands in the ball.
    Entry,
    /// entry, greedy word to the K-preimage, then the forward ascent word.
    Upper,
    /// entry, greedy word to the centre of K, then a forward descent tail.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalWord {
    pub word: Word,
    pub method: CriticalMethod,
    pub entry_len: usize,
    pub greedy_len: usize,
    pub tail_len: usize,
    /// `f_word(Q+)` lies in the ball around the target.
    pub certificate: Certificate,
}

const ASCENT_CAP: usize = 1_000_000;
const RETRIES: usize = 12;

/// A word `w` with `f_w(Q+)` inside the ball of `radius` around `x`, for `x` in Q-.
pub fn critical_word_for(fam: &FiberFamily, dd: &DescentData, x: &[f64], radius: f64) -> Result<CriticalWord> {
    let p = &fam.params;
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    let q = region_box(p, RegionId::Qplus)?;
    if !region_box(p, RegionId::Qminus)?.contains(x) {
        return Err(Error::TargetOutsideQminus(x.to_vec()));
    }
    let entry = entry_word(fam)?;
    let certify = |w: &Word| {
        let img = apply_word_box(fam, w, &q);
        let far = img.farthest_corner_distance(x);
        Certificate::from_margin(format!("f_w(Q+) inside B({x:?}, {radius})"), radius - far).with_values([
            ("farthest_corner", far),
            ("length", w.len() as f64),
        ])
    };

    let cert = certify(&entry.word);
    if cert.pass {
        return Ok(CriticalWord { word: entry.word.clone(), method: CriticalMethod::Entry, entry_len: entry.word.len(), greedy_len: 0, tail_len: 0, certificate: cert });
    }

    let (tail, anchor, method, expansion) = if x[1] > 0.25 {
        let a = ascent_word(fam, dd, x, ASCENT_CAP)?;
        debug_assert_eq!(a.region, AscentRegion::Upper);
        let e = expansion_of(fam, &a.word, &a.preimage);
        (a.word, a.preimage, CriticalMethod::Upper, e)
    } else {
        (Word::empty(2), vec![0.5 * (dd.l.lo + dd.l.hi), 0.5 * (dd.j.lo + dd.j.hi)], CriticalMethod::Lower, 1.0)
    };

    let mut r = (radius / (2.0 * expansion.max(1.0))).min(0.01);
    let mut last = None;
    for _ in 0..RETRIES {
        let g = greedy_critical_word(fam, dd, &anchor, r)?;
        let mut w = Word::concat(&[&entry.word, &g.word]);
        let tail_now = match method {
            CriticalMethod::Lower => {
                let start = apply_word_box(fam, &w, &q).center();
                descent_tail(fam, &start, x)
            }
            _ => tail.clone(),
        };
        w.extend(&tail_now);
        let cert = certify(&w);
        if cert.pass {
            return Ok(CriticalWord {
                entry_len: entry.word.len(),
                greedy_len: g.word.len(),
                tail_len: tail_now.len(),
                word: w,
                method,
                certificate: cert,
            });
        }
        last = Some(cert);
        r /= 2.0;
    }
    Err(Error::Parse(format!("critical word not certified: {:?}", last.map(|c| c.margin))))
}

/// Growth of a tiny box around `pt` along `w`, measured on the box image.
fn expansion_of(fam: &FiberFamily, w: &Word, pt: &[f64]) -> f64 {
    let s = 1e-9;
    let img = apply_word_box(fam, w, &BoxN::around(pt, s));
    (0..2).map(|i| img.width(i) / (2.0 * s)).fold(1.0, f64::max)
}

/// Forward word from `start` (above `y = 1/4`) to near `target`:
/// drop one attracting level per firing of `f10` in `D`, let the second
/// coordinate settle, then position the first coordinate.
pub fn descent_tail(fam: &FiberFamily, start: &[f64], target: &[f64]) -> Word {
    let p = &fam.params;
    let n = p.n as f64;
    let mut w = Word::empty(2);
    let mut pt = start.to_vec();
    let step = |w: &mut Word, pt: &mut Vec<f64>, l: u32| {
        w.push(l);
        fam.apply_in_place(l, pt);
    };
    let levels = ((0.25 - target[1]) / (2.0 * p.h)).round().max(0.0) as usize;
    for _ in 0..levels {
        while pt[0] > 2.5 / n {
            step(&mut w, &mut pt, 0);
        }
        step(&mut w, &mut pt, 1);
    }
    // outside W, f10 = f1 x g0: pushes x to 1 while y settles on its level
    for _ in 0..200 {
        step(&mut w, &mut pt, 1);
    }
    while pt[0] > target[0] {
        step(&mut w, &mut pt, 0);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::apply_word;
    use crate::params::derive_params;
    use crate::words::build_upper_ifs;

    #[test]
    fn upper_and_lower_targets() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let dd = build_upper_ifs(&p).unwrap();
        for (x, r) in [([0.5, 0.6], 1e-3), ([0.3, 0.15], 0.01)] {
            let cw = critical_word_for(&fam, &dd, &x, r).unwrap();
            assert!(cw.certificate.pass, "{x:?} {:?}", cw.certificate);
            let y = apply_word(&fam, &cw.word, &[0.0, 1.0]);
            assert!(((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt() <= r);
        }
    }
}
