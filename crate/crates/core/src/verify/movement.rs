//! Uniform direction of movement on the pieces of Q+ away from the
//! invariant manifolds of each fiber map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::midpoints;
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::fiber::{FiberFamily, SymbolVector};
use crate::geometry::BoxN;
use crate::params::Params;
use crate::scalar::{self, ScalarMapId};

const MAX_LEAVES: usize = 4096;
const SAMPLES_PER_SIDE: usize = 16;

/// One rectangle of `Q+` minus the rho-bands (and minus W for the special symbol).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementPiece {
    pub symbol: String,
    pub bounds: BoxN,
    /// Direction per coordinate: +1 right/up, -1 left/down.
    pub sign: [i8; 2],
    /// Certified lower bound on `sign * (f(q) - q)` per coordinate.
    pub certified: [f64; 2],
    /// Smallest sampled value of `sign * (f(q) - q)` per coordinate.
    pub observed: [f64; 2],
}

fn bands(lo: f64, hi: f64, fixed: &[f64], rho: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = fixed.iter().copied().filter(|v| *v + rho > lo && *v - rho < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut start = lo;
    for c in cuts {
        if c - rho > start {
            out.push((start, c - rho));
        }
        start = start.max(c + rho);
    }
    if start < hi {
        out.push((start, hi));
    }
    out
}

/// Rectangles covering `Q+` minus the rho-neighbourhoods of the invariant
/// lines of `f_bits`, and minus W for the coupled symbol.
pub fn movement_pieces(p: &Params, bits: u32) -> Vec<BoxN> {
    let (ql, qr) = (-2.0 * p.nu, 1.0 + 2.0 * p.nu);
    let n = p.n as f64;
    let xfix = if bits & 1 == 1 { 1.0 } else { 0.0 };
    let yfix: Vec<f64> = if bits >> 1 & 1 == 1 { vec![1.0] } else { (0..=4 * p.n as i64).map(|j| p.level(j)).collect() };
    let coupled = bits == 1;
    let (wx, wy) = ((1.0 / n, 4.0 / n), (-2.0 / n, 0.25 + 2.0 / n));
    let mut out = Vec::new();
    for &(x0, x1) in &bands(ql, qr, &[xfix], p.rho) {
        for &(y0, y1) in &bands(ql, qr, &yfix, p.rho) {
            let r = BoxN::new(vec![x0, y0], vec![x1, y1]);
            let meets_w = coupled && x0 < wx.1 && x1 > wx.0 && y0 < wy.1 && y1 > wy.0;
            if !meets_w {
                out.push(r);
                continue;
            }
            if x0 < wx.0 {
                out.push(BoxN::new(vec![x0, y0], vec![wx.0, y1]));
            }
            if x1 > wx.1 {
                out.push(BoxN::new(vec![wx.1, y0], vec![x1, y1]));
            }
            let (mx0, mx1) = (x0.max(wx.0), x1.min(wx.1));
            if y1 > wy.1 {
                out.push(BoxN::new(vec![mx0, wy.1], vec![mx1, y1]));
            }
            if y0 < wy.0 {
                out.push(BoxN::new(vec![mx0, y0], vec![mx1, wy.0]));
            }
        }
    }
    out
}

/// Centered-form enclosure of coordinate `i` of `f_bits(q) - q` over `b`,
/// for the unperturbed map.
fn displacement_enclosure(fam: &FiberFamily, bits: u32, b: &BoxN, i: usize) -> (f64, f64) {
    let p = &fam.params;
    let base = fam.unperturbed();
    let c = b.center();
    let mut fc = c.clone();
    base.apply_in_place(bits, &mut fc);
    let dc = fc[i] - c[i];
    let half = [b.width(0) / 2.0, b.width(1) / 2.0];
    let spread = if i == 0 {
        let a0: f64 = if bits & 1 == 1 { 2.0 / 3.0 } else { p.lambda };
        (1.0 - a0) * half[0]
    } else {
        let id = if bits >> 1 & 1 == 1 { ScalarMapId::G1 } else { ScalarMapId::G0 };
        let (dmin, dmax) = scalar::derivative_range(id, p, b.lo[1], b.hi[1]);
        let mut ry = (1.0 - dmin).abs().max((dmax - 1.0).abs());
        let mut rx = 0.0;
        if bits == 1 {
            let amax = fam.alpha.range(b.lo[0], b.hi[0]).1;
            let bmax = fam.beta.range(b.lo[1], b.hi[1]).1;
            if amax > 0.0 && bmax > 0.0 {
                ry += amax * fam.beta.max_abs_derivative();
                rx = fam.alpha.max_abs_derivative() * bmax;
            }
        }
        ry * half[1] + rx * half[0]
    };
    let pad = 1e-15 * (1.0 + dc.abs()) + spread * 1e-12;
    (dc - spread - pad, dc + spread + pad)
}

/// Bisects `b` until the enclosure of coordinate `i` excludes zero.
/// Returns the certified `sign * displacement` lower bound, or a
/// non-positive number when the sign could not be certified.
fn certify_coordinate(fam: &FiberFamily, bits: u32, b: &BoxN, i: usize, sign: i8, pad: f64) -> f64 {
    let mut stack = vec![b.clone()];
    let mut leaves = 0usize;
    let mut worst = f64::INFINITY;
    while let Some(bx) = stack.pop() {
        let (lo, hi) = displacement_enclosure(fam, bits, &bx, i);
        let bound = if sign > 0 { lo } else { -hi } - pad;
        if bound > 0.0 || leaves + stack.len() >= MAX_LEAVES {
            worst = worst.min(bound);
            leaves += 1;
            continue;
        }
        let dim = if i == 0 || bx.width(1) < bx.width(0) * 1e-3 { 0 } else { 1 };
        let mid = 0.5 * (bx.lo[dim] + bx.hi[dim]);
        let mut a = bx.clone();
        let mut c = bx;
        a.hi[dim] = mid;
        c.lo[dim] = mid;
        stack.push(a);
        stack.push(c);
    }
    worst
}

/// Certifies and samples the movement direction on every piece, for every symbol.
pub fn movement_pieces_report(fam: &FiberFamily) -> Result<Vec<MovementPiece>> {
    let p = &fam.params;
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    let base = fam.unperturbed();
    let mut out = Vec::new();
    for s in SymbolVector::all(2) {
        let pad = fam.perturbation.as_ref().map(|e| e.sup_bound(s.bits)).unwrap_or_else(|| vec![0.0, 0.0]);
        let pieces = movement_pieces(p, s.bits);
        if pieces.is_empty() {
            return Err(Error::InvalidN(p.n));
        }
        let done: Vec<MovementPiece> = pieces
            .into_par_iter()
            .map(|b| {
                let c = b.center();
                let fc = base.eval(s, &c).expect("dimension");
                let sign = [if fc[0] >= c[0] { 1 } else { -1 }, if fc[1] >= c[1] { 1 } else { -1 }];
                let certified = [
                    certify_coordinate(fam, s.bits, &b, 0, sign[0], pad[0]),
                    certify_coordinate(fam, s.bits, &b, 1, sign[1], pad[1]),
                ];
                let mut observed = [f64::INFINITY; 2];
                for x in midpoints(b.lo[0], b.hi[0], SAMPLES_PER_SIDE).chain([b.lo[0], b.hi[0]]) {
                    for y in midpoints(b.lo[1], b.hi[1], SAMPLES_PER_SIDE).chain([b.lo[1], b.hi[1]]) {
                        let q = [x, y];
                        let fq = fam.eval(s, &q).expect("dimension");
                        for i in 0..2 {
                            observed[i] = observed[i].min(sign[i] as f64 * (fq[i] - q[i]));
                        }
                    }
                }
                MovementPiece { symbol: s.to_string(), bounds: b, sign, certified, observed }
            })
            .collect();
        out.extend(done);
    }
    Ok(out)
}

/// One certificate per symbol: the direction is uniform on each piece
/// (interval enclosure, with the perturbation size as padding), and one
/// per symbol for sampled agreement with the unperturbed directions.
pub fn check_directional_movement(fam: &FiberFamily) -> Result<Vec<Certificate>> {
    let pieces = movement_pieces_report(fam)?;
    let mut out = Vec::new();
    for s in SymbolVector::all(2) {
        let name = s.to_string();
        let mine: Vec<&MovementPiece> = pieces.iter().filter(|m| m.symbol == name).collect();
        let cert = mine.iter().flat_map(|m| m.certified).fold(f64::INFINITY, f64::min);
        let obs = mine.iter().flat_map(|m| m.observed).fold(f64::INFINITY, f64::min);
        let disagreements = mine.iter().flat_map(|m| m.observed).filter(|v| *v <= 0.0).count();
        out.push(
            Certificate::new(format!("f_{s} moves every piece of Q+ minus the rho-bands in one direction per coordinate"), cert > 0.0, cert)
                .with_values([("pieces", mine.len() as f64), ("certified_alpha", cert), ("observed_alpha", obs)]),
        );
        out.push(
            Certificate::new(format!("sampled: f_{s} directions agree with the unperturbed map"), disagreements == 0, obs)
                .with_values([("sign_disagreements", disagreements as f64)]),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use std::f64::consts::PI;

    #[test]
    fn bands_skip_neighbourhoods() {
        let b = bands(0.0, 1.0, &[0.0, 0.5], 0.1);
        assert_eq!(b, vec![(0.1, 0.4), (0.6, 1.0)]);
    }

    #[test]
    fn unperturbed_directions() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let certs = check_directional_movement(&fam).unwrap();
        assert!(certs.iter().all(|c| c.pass), "{certs:#?}");
        let pieces = movement_pieces_report(&fam).unwrap();
        // f00 on a strip between levels: vertical movement at least (h/3pi) sin(pi rho/h)
        let bound = p.h / (3.0 * PI) * (PI * p.rho / p.h).sin();
        let inner: Vec<_> = pieces.iter().filter(|m| m.symbol == "00" && m.bounds.lo[1] > 0.0 && m.bounds.hi[1] < 0.25).collect();
        assert!(!inner.is_empty());
        let obs = inner.iter().map(|m| m.observed[1]).fold(f64::INFINITY, f64::min);
        assert!((obs - bound).abs() < 1e-12, "{obs} {bound}");
        // f11 right of the band around x = 1 moves left, toward 1
        assert!(pieces.iter().filter(|m| m.symbol == "11" && m.bounds.lo[0] > 1.0).all(|m| m.sign[0] == -1));
    }
}
