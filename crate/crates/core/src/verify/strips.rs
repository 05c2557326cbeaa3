//! Strip and block dynamics in the lower part of Q+.

use rayon::prelude::*;

use super::{all_one, all_zero, cylinder, midpoints, top_one};
use crate::certificate::Certificate;
use crate::fiber::{FiberFamily, SymbolVector};
use crate::geometry::{pi_bounds, pi_index, region_box, strip_index, RegionId};
use crate::params::Params;
use crate::scalar::{self, ScalarMapId};

/// Sample points per block for the sampled block checks (a square grid).
pub const BLOCK_SAMPLES: usize = 10_000;

const TOL: f64 = 1e-15;

fn w_x(p: &Params) -> (f64, f64) {
    let n = p.n as f64;
    (1.0 / n, 4.0 / n)
}

fn qx(p: &Params) -> (f64, f64) {
    (-2.0 * p.nu, 1.0 + 2.0 * p.nu)
}

/// Interval certificates for the strips `A_m` and the global inclusions, plus
/// the forward block checks and sampled backward block checks.
pub fn check_strip_dynamics(fam: &FiberFamily) -> Vec<Certificate> {
    let mut out = global_inclusions(fam);
    out.extend(strip_certificates(fam));
    out.extend(block_certificates(fam));
    out.extend(sampled_block_certificates(fam, BLOCK_SAMPLES));
    out.extend(backward_block_certificates(fam, BLOCK_SAMPLES));
    out
}

/// `f_s(Q+) in Q+` for every symbol, and (unperturbed only) `f_01, f_11`
/// send the unit cube into P.
pub fn global_inclusions(fam: &FiberFamily) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let q = region_box(p, RegionId::Qplus).expect("Q+");
    let mut out = Vec::new();
    for s in SymbolVector::all(k) {
        let img = fam.image_box(s.bits, &q);
        out.push(
            Certificate::from_margin(format!("f_{s}(Q+) in Q+"), q.inclusion_margin(&img))
                .with_witness(img.lo.iter().chain(&img.hi).copied().collect()),
        );
    }
    // the images touch the boundary of P, so a perturbation cannot keep this
    if fam.perturbation.is_some() {
        return out;
    }
    let unit = crate::geometry::BoxN::cube(k, 0.0, 1.0);
    let pbox = region_box(p, RegionId::P).expect("P");
    for bits in [top_one(k), all_one(k)] {
        let s = SymbolVector::new(bits, k).expect("symbol");
        // uncoupled and increasing in each coordinate, so the corners give the image;
        // both sides touch the boundary of P exactly (0 and 1 are fixed)
        let img = crate::geometry::BoxN::new(fam.eval(s, &unit.lo).expect("dimension"), fam.eval(s, &unit.hi).expect("dimension"));
        out.push(Certificate::from_margin(format!("f_{s}([0,1]^k) in P"), pbox.inclusion_margin(&img)));
    }
    out
}

/// `f_00(A_m) in A_m`, `f_10(A_m \ W) in A_m`, and
/// `f_10(A_m & W)` misses every `A_l` with `l > m + 2`.
///
/// The first two hold because the boundaries of `A_m` are fixed by the
/// increasing map `g0`, so they are checked on the boundary heights. The
/// third is an interval enclosure.
pub fn strip_certificates(fam: &FiberFamily) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let strips = 4 * p.n;
    let special = SymbolVector::special(k);
    let mut out = Vec::new();

    let mut resid: f64 = 0.0;
    for j in 0..=strips as i64 {
        let y = p.level(j);
        resid = resid.max((scalar::g0(p, y) - y).abs());
    }
    let (dmin, _) = scalar::derivative_range(ScalarMapId::G0, p, p.level(strips as i64), p.level(0));
    let mut sampled_escapes = 0u64;
    for m in 1..=strips {
        let (lo, hi) = (p.level(m as i64), p.level(m as i64 - 1));
        for y in midpoints(lo, hi, 1000) {
            if strip_index(p, scalar::g0(p, y)) != Some(m) {
                sampled_escapes += 1;
            }
        }
    }
    out.push(
        Certificate::new("f_00(A_m) in A_m for every m", resid <= 1e-15 && sampled_escapes == 0, dmin)
            .with_values([("strips", strips as f64), ("boundary_residual", resid), ("inf_g0_derivative", dmin), ("sampled_escapes", sampled_escapes as f64)]),
    );

    // away from W the coupling vanishes identically
    let (wl, wr) = w_x(p);
    let (ql, qr) = qx(p);
    let mut leak: f64 = 0.0;
    for (lo, hi) in [(ql, wl), (wr, qr)] {
        leak = leak.max(fam.alpha.range(lo, hi).1);
    }
    out.push(
        Certificate::new(format!("f_{special}(A_m \\ W) in A_m for every m"), leak == 0.0 && resid <= 1e-15, dmin)
            .with_values([("alpha_outside_W", leak), ("boundary_residual", resid)]),
    );

    let mut worst = f64::INFINITY;
    let mut worst_m = 0;
    for m in 1..=strips {
        let b = cylinder(p, (wl, wr), (p.level(m as i64), p.level(m as i64 - 1)));
        let img = fam.image_box(special.bits, &b);
        let margin = img.lo[k - 1] - p.level(m as i64 + 2);
        if margin < worst {
            worst = margin;
            worst_m = m;
        }
    }
    let sup_ab = fam.alpha.amplitude * fam.beta.amplitude;
    out.push(
        Certificate::from_margin(format!("f_{special}(A_m & W) misses A_l for l > m + 2"), worst)
            .with_witness(vec![worst_m as f64])
            .with_values([("sup_alpha_beta", sup_ab), ("two_strip_height", 2.0 * p.h), ("strict_gap", 2.0 * p.h - sup_ab)]),
    );
    out
}

/// Lower edge of the block `Pi_m`, also for `m = 2n + 1`.
fn block_floor(p: &Params, m: u32) -> f64 {
    if m <= 2 * p.n {
        pi_bounds(p, m).0
    } else {
        p.level(2 * m as i64 + 1) + p.rho
    }
}

/// Interval certificates that the blocks do not go down:
/// `f_s(Pi_m)` misses the lower blocks for `s != special`,
/// `f_special(Pi_m \ W)` likewise, and `f_special(Pi_m & W)` drops at most one block.
pub fn block_certificates(fam: &FiberFamily) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let special = SymbolVector::special(k);
    let (wl, wr) = w_x(p);
    let (ql, qr) = qx(p);
    let mut out = Vec::new();
    for s in SymbolVector::all(k) {
        let pieces: Vec<((f64, f64), u32)> = if s == special { vec![((ql, wl), 0), ((wr, qr), 0), ((wl, wr), 1)] } else { vec![((ql, qr), 0)] };
        for (xr, allowed) in pieces {
            let mut worst = f64::INFINITY;
            let mut worst_m = 0;
            for m in 0..=2 * p.n {
                let b = cylinder(p, xr, pi_bounds(p, m));
                let img = fam.image_box(s.bits, &b);
                let margin = img.lo[k - 1] - block_floor(p, m + allowed);
                if margin < worst {
                    worst = margin;
                    worst_m = m;
                }
            }
            let claim = match (s == special, allowed) {
                (false, _) => format!("f_{s}(Pi_m) misses Pi_l for l > m"),
                (true, 0) => format!("f_{s}(Pi_m \\ W) misses Pi_l for l > m (x in [{xr0:.6}, {xr1:.6}])", xr0 = xr.0, xr1 = xr.1),
                (true, _) => format!("f_{s}(Pi_m & W) misses Pi_l for l > m + 1"),
            };
            // strict: the blocks are half-open at the bottom
            out.push(Certificate::new(claim, worst > 0.0, worst).with_witness(vec![worst_m as f64]));
        }
    }
    out
}

/// Forward sampled version of [`block_certificates`] with `samples` points per block.
pub fn sampled_block_certificates(fam: &FiberFamily, samples: usize) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let special = SymbolVector::special(k);
    let side = (samples as f64).sqrt().ceil() as usize;
    let (wl, wr) = w_x(p);
    let (ql, qr) = qx(p);
    let center = region_box(p, RegionId::Qplus).expect("Q+").center();
    let mut out = Vec::new();
    for s in SymbolVector::all(k) {
        let per_block: Vec<(u64, f64)> = (0..=2 * p.n)
            .into_par_iter()
            .map(|m| {
                let (ylo, yhi) = pi_bounds(p, m);
                let mut bad = 0u64;
                let mut margin = f64::INFINITY;
                let mut x = center.clone();
                for xv in midpoints(ql, qr, side) {
                    for yv in midpoints(ylo, yhi, side) {
                        x[k - 2] = xv;
                        x[k - 1] = yv;
                        let in_w = s == special && xv >= wl && xv <= wr;
                        let allowed = m + in_w as u32;
                        let y = fam.eval(s, &x).expect("dimension");
                        if pi_index(p, y[k - 1]) > allowed as i64 {
                            bad += 1;
                        }
                        margin = margin.min(y[k - 1] - block_floor(p, allowed));
                    }
                }
                (bad, margin)
            })
            .collect();
        let bad: u64 = per_block.iter().map(|t| t.0).sum();
        let margin = per_block.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        out.push(
            Certificate::new(format!("sampled: f_{s} does not move Pi-blocks down (one block inside W for the special symbol)"), bad == 0, margin)
                .with_values([("samples_per_block", (side * side) as f64), ("violations", bad as f64)]),
        );
    }
    out
}

/// Sampled backward checks on the lower blocks: preimages under `f_00` and
/// `f_special` of points of `Z_m = S-_m u U_m u S+_m` stay above the bottom of
/// `Z_m`, and those of `D_m` stay above the bottom of `D_m`.
///
/// The blocks are intersected with Q- when that leaves anything (n >= 20);
/// otherwise the first coordinate ranges over the Q- interval alone.
pub fn backward_block_certificates(fam: &FiberFamily, samples: usize) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let side = (samples as f64).sqrt().ceil() as usize;
    let qm = region_box(p, RegionId::Qminus).expect("Q-");
    let restricted = qm.lo[k - 1] < 0.25;
    let center = qm.center();
    let mut out = Vec::new();
    for bits in [all_zero(), SymbolVector::special(k).bits] {
        let s = SymbolVector::new(bits, k).expect("symbol");
        let per_block: Vec<(u64, f64, u64)> = (1..=2 * p.n)
            .into_par_iter()
            .map(|m| {
                let m = m as i64;
                let z = (p.level(2 * m - 1) - p.rho, p.level(2 * m - 2) + p.rho);
                let d = (p.level(2 * m) + p.rho, p.level(2 * m - 1) - p.rho);
                let mut bad = 0u64;
                let mut margin = f64::INFINITY;
                let mut count = 0u64;
                for (ylo, yhi) in [z, d] {
                    let (ylo_s, yhi_s) = if restricted { (ylo.max(qm.lo[k - 1]), yhi.min(qm.hi[k - 1])) } else { (ylo, yhi) };
                    if ylo_s >= yhi_s {
                        continue;
                    }
                    let mut x = center.clone();
                    for xv in midpoints(qm.lo[k - 2], qm.hi[k - 2], side) {
                        for yv in midpoints(ylo_s, yhi_s, side) {
                            x[k - 2] = xv;
                            x[k - 1] = yv;
                            let pre = fam.inverse_unrestricted(s, &x, TOL).expect("dimension");
                            count += 1;
                            let mg = pre[k - 1] - ylo;
                            if mg < 0.0 {
                                bad += 1;
                            }
                            margin = margin.min(mg);
                        }
                    }
                }
                (bad, margin, count)
            })
            .collect();
        let bad: u64 = per_block.iter().map(|t| t.0).sum();
        let count: u64 = per_block.iter().map(|t| t.2).sum();
        let margin = per_block.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        out.push(
            Certificate::new(format!("sampled: backward f_{s} keeps lower blocks from going down"), bad == 0 && count > 0, margin)
                .with_values([("samples", count as f64), ("violations", bad as f64), ("restricted_to_Qminus", restricted as u8 as f64)]),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::perturb::make_perturbation;

    #[test]
    fn unperturbed_n16_passes() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let certs = check_strip_dynamics(&fam);
        assert!(certs.iter().all(|c| c.pass), "{certs:#?}");
        let two = certs.iter().find(|c| c.claim.contains("l > m + 2")).unwrap();
        // 2h - 1/(10n) = 1/(40n), less the rounding pad
        assert!((two.margin - 1.0 / 640.0).abs() < 1e-12, "{}", two.margin);
    }

    #[test]
    fn small_perturbation_keeps_blocks() {
        let p = derive_params(16, 2).unwrap();
        let pert = make_perturbation(&p, p.r / 2.0, 11).unwrap();
        let fam = FiberFamily::perturbed(p, pert.spec);
        let certs = check_strip_dynamics(&fam);
        let blocks: Vec<_> = certs.iter().filter(|c| c.claim.contains("Pi") || c.claim.contains("backward")).collect();
        assert!(blocks.iter().all(|c| c.pass), "{blocks:#?}");
    }

    #[test]
    fn oversized_perturbation_breaks_a_block() {
        let p = derive_params(16, 2).unwrap();
        let pert = make_perturbation(&p, 10.0 * p.rho, 11).unwrap();
        let fam = FiberFamily::perturbed(p, pert.spec);
        assert!(block_certificates(&fam).iter().any(|c| !c.pass));
    }
}
