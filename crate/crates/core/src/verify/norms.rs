//! Grid certificates for Jacobian norms and the coupling bump.

use rayon::prelude::*;

use crate::certificate::Certificate;
use crate::fiber::{FiberFamily, Jacobian, SymbolVector};
use crate::geometry::{region_box, BoxN, RegionId};
use crate::scalar::{self, ScalarMapId};

pub const LIPSCHITZ_BOUND: f64 = 1.85;
pub const CONTRACTION_ON_P: f64 = 5.0 / 6.0;
pub const BUMP_BOUND: f64 = 0.125;
pub const IDENTITY_DISTANCE: f64 = 0.1;
pub const IDENTITY_DISTANCE_SHARP: f64 = 5.0 / 24.0;

/// Maximum and minimum of `f` over a `side x side` grid of `b` (first two coordinates).
/// Returns `(max, argmax, min, argmin)`.
fn grid_extremes(b: &BoxN, side: usize, f: impl Fn(&[f64]) -> (f64, f64) + Sync) -> (f64, Vec<f64>, f64, Vec<f64>) {
    let side = side.max(2);
    let k = b.dim();
    let rows: Vec<(f64, Vec<f64>, f64, Vec<f64>)> = (0..side)
        .into_par_iter()
        .map(|i| {
            let mut x = b.center();
            x[k - 2] = b.lo[k - 2] + b.width(k - 2) * i as f64 / (side - 1) as f64;
            let mut best = (f64::NEG_INFINITY, x.clone(), f64::INFINITY, x.clone());
            for j in 0..side {
                x[k - 1] = b.lo[k - 1] + b.width(k - 1) * j as f64 / (side - 1) as f64;
                let (hi, lo) = f(&x);
                if hi > best.0 {
                    best.0 = hi;
                    best.1 = x.clone();
                }
                if lo < best.2 {
                    best.2 = lo;
                    best.3 = x.clone();
                }
            }
            best
        })
        .collect();
    rows.into_iter().fold((f64::NEG_INFINITY, Vec::new(), f64::INFINITY, Vec::new()), |acc, r| {
        let (mut a, mut b) = (acc.0, acc.1);
        let (mut c, mut d) = (acc.2, acc.3);
        if r.0 > a {
            a = r.0;
            b = r.1;
        }
        if r.2 < c {
            c = r.2;
            d = r.3;
        }
        (a, b, c, d)
    })
}

/// Lipschitz, contraction-on-P, bump and distance-from-identity certificates
/// for a two-dimensional family, on `grid x grid` grids.
pub fn norm_certificates(fam: &FiberFamily, grid: usize) -> Vec<Certificate> {
    let p = &fam.params;
    let k = p.k;
    let q = region_box(p, RegionId::Qplus).expect("Q+");
    let pbox = region_box(p, RegionId::P).expect("P");
    let mut out = Vec::new();

    for s in SymbolVector::all(k) {
        let (fwd, at_fwd, neg_inv, at_inv) = grid_extremes(&q, grid, |x| {
            let (smax, smin) = fam.jacobian(s, x).expect("dimension").singular_extremes();
            (smax, -1.0 / smin)
        });
        let inv = -neg_inv;
        let at = if fwd >= inv { at_fwd } else { at_inv };
        out.push(
            Certificate::from_margin(format!("|Df_{s}| and |Df_{s}^-1| <= 1.85 on Q+"), LIPSCHITZ_BOUND + 1e-9 - fwd.max(inv))
                .with_witness(at)
                .with_values([("sup_forward", fwd), ("sup_inverse", inv)]),
        );
    }

    let mut sup_p = Vec::new();
    for s in SymbolVector::all(k) {
        let (m, at, _, _) = grid_extremes(&pbox, grid, |x| (fam.jacobian(s, x).expect("dimension").spectral_norm(), 0.0));
        sup_p.push((s, m, at));
    }
    let special = SymbolVector::special(k);
    let (_, f10, at10) = sup_p.iter().find(|(s, _, _)| *s == special).cloned().expect("special symbol");
    out.push(
        Certificate::from_margin(format!("|Df_{special}| <= 5/6 on P"), CONTRACTION_ON_P + 1e-9 - f10)
            .with_witness(at10)
            .with_values([("sup_on_P", f10)]),
    );
    let worst = sup_p.iter().map(|t| t.1).fold(0.0, f64::max);
    let mut c = Certificate::from_margin("every map is uniformly contracting on P", 1.0 - worst);
    for (s, m, _) in &sup_p {
        c.values.insert(format!("sup_on_P_{s}"), *m);
    }
    out.push(c);

    // coupling gradient, grid and analytic
    let (a, b) = (fam.alpha, fam.beta);
    let (gmax, gat, _, _) = grid_extremes(&q, grid, |x| {
        let (u, v) = (x[k - 2], x[k - 1]);
        let g = ((a.derivative(u) * b.eval(v)).powi(2) + (a.eval(u) * b.derivative(v)).powi(2)).sqrt();
        (g, 0.0)
    });
    let analytic = ((a.max_abs_derivative() * b.amplitude).powi(2) + (a.amplitude * b.max_abs_derivative()).powi(2)).sqrt();
    out.push(
        Certificate::from_margin("|grad(alpha beta)| < 1/8", BUMP_BOUND - gmax.max(analytic))
            .with_witness(gat)
            .with_values([("grid_sup", gmax), ("analytic_sup", analytic)]),
    );

    let (_, _, dmin, dat) = grid_extremes(&q, grid, |x| {
        let j = fam.jacobian(special, x).expect("dimension");
        let d = j.sub(&Jacobian::identity(k)).spectral_norm();
        (0.0, d)
    });
    out.push(
        Certificate::from_margin(format!("|Df_{special} - Id| >= 1/10 on Q+"), dmin - IDENTITY_DISTANCE)
            .with_witness(dat)
            .with_values([("inf_distance", dmin), ("sharp_target_5_24_met", (dmin > IDENTITY_DISTANCE_SHARP) as u8 as f64)]),
    );
    out
}

/// Fixed points, multipliers, inverse round trips and Lipschitz bounds of the scalar maps.
pub fn scalar_certificates(fam: &FiberFamily, samples: usize) -> Vec<Certificate> {
    let p = &fam.params;
    let mut out = Vec::new();
    let fps = scalar::scalar_fixed_points(ScalarMapId::G0, p);
    let mut resid: f64 = 0.0;
    let mut mult_err: f64 = 0.0;
    for (m, &x) in fps.iter().enumerate() {
        resid = resid.max((scalar::g0(p, x) - x).abs());
        let expected = if m % 2 == 0 { 2.0 / 3.0 } else { 4.0 / 3.0 };
        mult_err = mult_err.max((scalar::g0_deriv(p, x) - expected).abs());
    }
    // fixed points of g0 on [-1, 2] are exactly the multiples of h in [0, 1/4]; count sign changes on a fine grid
    let cells = 64 * 4 * p.n as usize;
    let mut sign_changes = 0;
    let mut prev = scalar::g0(p, -1.0) + 1.0;
    for i in 0..cells * 12 {
        let x = -1.0 + 3.0 * (i as f64 + 0.5) / (cells * 12) as f64;
        let d = scalar::g0(p, x) - x;
        if d.signum() != prev.signum() {
            sign_changes += 1;
        }
        prev = d;
    }
    let count_ok = fps.len() == 4 * p.n as usize + 1 && sign_changes == fps.len();
    out.push(
        Certificate::new("g0 has 4n+1 fixed points with multipliers 2/3, 4/3 alternating", count_ok && mult_err <= 1e-12, 1e-12 - resid.max(mult_err))
            .with_values([("count", fps.len() as f64), ("sign_changes", sign_changes as f64), ("residual", resid), ("multiplier_error", mult_err)]),
    );

    let mut worst: f64 = 0.0;
    for id in [ScalarMapId::F0, ScalarMapId::F1, ScalarMapId::G0, ScalarMapId::G1] {
        for i in 0..samples {
            let x = -1.0 + 3.0 * (i as f64 + 0.5) / samples as f64;
            let y = scalar::scalar_eval(id, p, x);
            let back = scalar::scalar_inverse(id, p, y, 1e-14).expect("image of domain");
            worst = worst.max((back - x).abs());
        }
    }
    out.push(Certificate::from_margin("scalar inverses round-trip within 2e-12", 2e-12 - worst).with_values([("max_error", worst)]));

    for id in [ScalarMapId::F0, ScalarMapId::F1, ScalarMapId::G0, ScalarMapId::G1] {
        out.push(scalar::lipschitz_certificate(id, p, scalar::DOMAIN.0, scalar::DOMAIN.1, samples));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn f00_is_not_five_sixths_contracting() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let j = fam.jacobian(SymbolVector::new(0, 2).unwrap(), &[0.5, 0.6]).unwrap();
        assert!((j.spectral_norm() - (1.0 - 1.0 / 128.0)).abs() < 1e-15);
    }

    #[test]
    fn small_grid_passes() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let certs = norm_certificates(&fam, 101);
        assert!(certs.iter().all(|c| c.pass), "{certs:#?}");
        let s = scalar_certificates(&fam, 1000);
        assert!(s.iter().all(|c| c.pass), "{s:#?}");
    }
}
