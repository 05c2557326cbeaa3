use serde::{Deserialize, Serialize};

use super::{DescentData, Interval};
use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::geometry::{region_box, BoxN, RegionId};
use crate::orbit::{apply_word, apply_word_box};
use crate::scalar::{f1, f1_inv, g0, g0_inv};
use crate::symbolic::Word;

const GREEDY_LETTER_CAP: usize = 100_000;

/// One IFS map `f_{m,v}`; `v` has `m + 1` letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IfsMapRef {
    pub m: u32,
    pub v: Vec<u8>,
}

impl IfsMapRef {
    /// Forward letters `(0,v_1) ... (0,v_m) (1,v_{m+1})`.
    pub fn letters(&self) -> Vec<u32> {
        let m = self.m as usize;
        (0..=m).map(|j| (self.v[j] as u32) << 1 | (j == m) as u32).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyWord {
    pub word: Word,
    /// IFS maps in the order they act (first acts first).
    pub maps: Vec<IfsMapRef>,
    /// Image of K+ under the word.
    pub image: BoxN,
    /// Worst contraction factor among the maps used.
    pub q_hat: f64,
}

impl GreedyWord {
    /// `ceil(log(radius / diam K+) / log q_hat) * (Kc + 1)` letters.
    pub fn budget(&self, dd: &DescentData, kplus_diam: f64, radius: f64) -> usize {
        let rounds = ((radius / kplus_diam).ln() / self.q_hat.ln()).ceil().max(1.0);
        rounds as usize * (dd.kc as usize + 1)
    }
}

fn width_ratio(fam: &FiberFamily, v: &[u8], j: Interval) -> f64 {
    let p = &fam.params;
    let (mut lo, mut hi) = (j.lo, j.hi);
    for &b in v {
        if b == 1 {
            lo = f1(lo);
            hi = f1(hi);
        } else {
            lo = g0(p, lo);
            hi = g0(p, hi);
        }
    }
    (hi - lo) / j.width()
}

/// Word `w` with `f_w(K+)` inside the ball of `radius` around `target`.
///
/// Each round picks the IFS map whose inverse sends the current point deepest
/// into K; maps chosen later act first.
pub fn greedy_critical_word(fam: &FiberFamily, dd: &DescentData, target: &[f64], radius: f64) -> Result<GreedyWord> {
    let p = &fam.params;
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    if !(dd.l.contains(target[0]) && dd.j.contains(target[1])) {
        return Err(Error::TargetOutsideK(target.to_vec()));
    }
    let kplus = region_box(p, RegionId::Kplus)?;
    let mut maps: Vec<IfsMapRef> = Vec::new();
    let mut pt = target.to_vec();
    let mut total = 0usize;
    let mut q_hat: f64 = 0.0;
    loop {
        let u0 = f1_inv(pt[0]);
        let mut best = (f64::NEG_INFINITY, 0u32, 0.0);
        let mut lam = 1.0;
        for m in 0..=dd.kc {
            let u = u0 / lam;
            let depth = dd.l.depth(u);
            if depth > best.0 {
                best = (depth, m, u);
            }
            if u > dd.l.hi {
                break;
            }
            lam *= dd.lambda;
        }
        let (depth, m, ux) = best;
        if depth < 0.0 {
            return Err(Error::CoverageFails { margin: depth });
        }
        let mut v = vec![0u8; m as usize + 1];
        let mut y = pt[1];
        for j in (0..=m as usize).rev() {
            let c0 = g0_inv(p, y, 1e-15);
            let c1 = f1_inv(y);
            let (b, next) = if dd.j.depth(c0) >= dd.j.depth(c1) { (0, c0) } else { (1, c1) };
            if dd.j.depth(next) < 0.0 {
                return Err(Error::CoverageFails { margin: dd.j.depth(next) });
            }
            v[j] = b;
            y = next;
        }
        pt = vec![ux, y];
        let map = IfsMapRef { m, v };
        q_hat = q_hat.max((2.0 / 3.0) * dd.lambda.powi(m as i32)).max(width_ratio(fam, &map.v, dd.j_plus));
        total += map.m as usize + 1;
        maps.push(map);
        if total > GREEDY_LETTER_CAP {
            return Err(Error::WordCap(GREEDY_LETTER_CAP));
        }
        let word = assemble(&maps);
        let image = apply_word_box(fam, &word, &kplus);
        if image.inside_ball(target, radius) {
            return Ok(GreedyWord { word, maps: maps.into_iter().rev().collect(), image, q_hat });
        }
    }
}

/// Maps chosen later act first.
fn assemble(maps: &[IfsMapRef]) -> Word {
    let mut w = Word::empty(2);
    for m in maps.iter().rev() {
        for l in m.letters() {
            w.push(l);
        }
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryWord {
    pub word: Word,
    pub repeats: usize,
    pub image: BoxN,
    /// Fixed point of `f_11`, found by iteration.
    pub fixed_point: Vec<f64>,
}

/// Shortest `(11)^m (00)` whose image of Q+ lies in K+.
pub fn entry_word(fam: &FiberFamily) -> Result<EntryWord> {
    let p = &fam.params;
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    let q = region_box(p, RegionId::Qplus)?;
    let kplus = region_box(p, RegionId::Kplus)?;
    let fixed_point = apply_word(fam, &Word::repeat(2, 3, 200), &q.center());
    for m in 0..=200 {
        let mut w = Word::repeat(2, 3, m);
        w.push(0);
        let image = apply_word_box(fam, &w, &q);
        if kplus.contains_box(&image) {
            return Ok(EntryWord { word: w, repeats: m, image, fixed_point });
        }
    }
    Err(Error::SearchCap(200))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::words::build_upper_ifs;

    #[test]
    fn ifs_letters_order() {
        let m = IfsMapRef { m: 2, v: vec![1, 0, 1] };
        // (0,1) (0,0) (1,1)
        assert_eq!(m.letters(), vec![2, 0, 3]);
    }

    #[test]
    fn large_radius_gives_one_map() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let dd = build_upper_ifs(&p).unwrap();
        let g = greedy_critical_word(&fam, &dd, &[0.6, 0.6], 2.0).unwrap();
        assert_eq!(g.maps.len(), 1);
    }

    #[test]
    fn greedy_hits_target() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let dd = build_upper_ifs(&p).unwrap();
        let target = [0.55, 0.7];
        let g = greedy_critical_word(&fam, &dd, &target, 1e-4).unwrap();
        let kplus = region_box(&p, RegionId::Kplus).unwrap();
        for c in [kplus.lo.clone(), kplus.hi.clone(), kplus.center()] {
            let y = apply_word(&fam, &g.word, &c);
            assert!(((y[0] - target[0]).powi(2) + (y[1] - target[1]).powi(2)).sqrt() <= 1e-4);
        }
        assert!(greedy_critical_word(&fam, &dd, &[0.1, 0.7], 1e-2).is_err());
    }

    #[test]
    fn entry_word_lands_in_kplus() {
        let p = derive_params(128, 2).unwrap();
        let fam = FiberFamily::new(p);
        let e = entry_word(&fam).unwrap();
        assert!(e.word.len() <= 12);
        assert!((e.fixed_point[0] - 1.0).abs() < 1e-12 && (e.fixed_point[1] - 1.0).abs() < 1e-12);
    }
}
