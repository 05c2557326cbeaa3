//! The one-dimensional building blocks `f0`, `f1`, `g0`, `g1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarMapId {
    F0,
    F1,
    G0,
    G1,
}

pub const DOMAIN: (f64, f64) = (-1.0, 2.0);

#[inline]
pub fn f0(p: &Params, x: f64) -> f64 {
    p.lambda * x
}

#[inline]
pub fn f1(x: f64) -> f64 {
    1.0 - (2.0 / 3.0) * (1.0 - x)
}

#[inline]
pub fn f1_inv(y: f64) -> f64 {
    1.0 - 1.5 * (1.0 - y)
}

#[inline]
pub fn g0(p: &Params, x: f64) -> f64 {
    if x < 0.0 {
        (2.0 / 3.0) * x
    } else if x <= 0.25 {
        x - p.h / (3.0 * PI) * (PI * x / p.h).sin()
    } else {
        0.25 + (2.0 / 3.0) * (x - 0.25)
    }
}

#[inline]
pub fn g0_deriv(p: &Params, x: f64) -> f64 {
    if (0.0..=0.25).contains(&x) {
        1.0 - (PI * x / p.h).cos() / 3.0
    } else {
        2.0 / 3.0
    }
}

/// Inverse of `g0`. Closed form on the affine pieces, bisection on `[0, 1/4]`.
pub fn g0_inv(p: &Params, y: f64, tol: f64) -> f64 {
    if y < 0.0 {
        1.5 * y
    } else if y > 0.25 {
        0.25 + 1.5 * (y - 0.25)
    } else {
        // g0 is increasing on [0, 1/4] with g0(0) = 0, g0(1/4) = 1/4
        // and |g0(x) - x| <= h/(3 pi), so the root is within that distance of y.
        let pad = p.h / (3.0 * PI) * 1.0001;
        // g0 fixes every jh, so the preimage stays in the same cell [jh, (j+1)h]
        let j = (y / p.h).floor();
        let mut lo = (y - pad).max(0.0).max(j * p.h);
        let mut hi = (y + pad).min(0.25).min((j + 1.0) * p.h);
        if lo > y {
            lo = y;
        }
        if hi < y {
            hi = y;
        }
        bisect(|x| g0(p, x) - y, &mut lo, &mut hi, tol);
        0.5 * (lo + hi)
    }
}

/// Shrinks `[lo, hi]` around a sign change of the increasing function `f`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, lo: &mut f64, hi: &mut f64, tol: f64) {
    for _ in 0..200 {
        if *hi - *lo <= tol / 2.0 {
            break;
        }
        let mid = 0.5 * (*lo + *hi);
        if mid <= *lo || mid >= *hi {
            break;
        }
        if f(mid) < 0.0 {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
}

pub fn scalar_eval(id: ScalarMapId, p: &Params, x: f64) -> f64 {
    match id {
        ScalarMapId::F0 => f0(p, x),
        ScalarMapId::F1 | ScalarMapId::G1 => f1(x),
        ScalarMapId::G0 => g0(p, x),
    }
}

/// Evaluation restricted to the domain `I = [-1, 2]`.
pub fn scalar_eval_checked(id: ScalarMapId, p: &Params, x: f64) -> Result<f64> {
    if !(DOMAIN.0..=DOMAIN.1).contains(&x) {
        return Err(Error::OutOfDomain { value: x });
    }
    Ok(scalar_eval(id, p, x))
}

pub fn scalar_derivative(id: ScalarMapId, p: &Params, x: f64) -> f64 {
    match id {
        ScalarMapId::F0 => p.lambda,
        ScalarMapId::F1 | ScalarMapId::G1 => 2.0 / 3.0,
        ScalarMapId::G0 => g0_deriv(p, x),
    }
}

/// Image of the domain `I` under the map.
pub fn scalar_image_of_domain(id: ScalarMapId, p: &Params) -> (f64, f64) {
    (scalar_eval(id, p, DOMAIN.0), scalar_eval(id, p, DOMAIN.1))
}

pub fn scalar_inverse(id: ScalarMapId, p: &Params, y: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = scalar_image_of_domain(id, p);
    if !(lo..=hi).contains(&y) {
        return Err(Error::NotInRange { value: y });
    }
    Ok(match id {
        ScalarMapId::F0 => y / p.lambda,
        ScalarMapId::F1 | ScalarMapId::G1 => f1_inv(y),
        ScalarMapId::G0 => g0_inv(p, y, tol),
    })
}

/// Fixed points inside `[-2nu, 1+2nu]`.
pub fn scalar_fixed_points(id: ScalarMapId, p: &Params) -> Vec<f64> {
    match id {
        ScalarMapId::F0 => vec![0.0],
        ScalarMapId::F1 | ScalarMapId::G1 => vec![1.0],
        ScalarMapId::G0 => (0..=4 * p.n).map(|m| m as f64 * p.h).collect(),
    }
}

/// Image of `[lo, hi]` (all four maps are increasing).
#[inline]
pub fn scalar_image(id: ScalarMapId, p: &Params, lo: f64, hi: f64) -> (f64, f64) {
    (scalar_eval(id, p, lo), scalar_eval(id, p, hi))
}

/// Exact range of the derivative over `[lo, hi]`.
pub fn derivative_range(id: ScalarMapId, p: &Params, lo: f64, hi: f64) -> (f64, f64) {
    match id {
        ScalarMapId::F0 => (p.lambda, p.lambda),
        ScalarMapId::F1 | ScalarMapId::G1 => (2.0 / 3.0, 2.0 / 3.0),
        ScalarMapId::G0 => {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut take = |v: f64| {
                min = min.min(v);
                max = max.max(v);
            };
            if lo < 0.0 || hi > 0.25 {
                take(2.0 / 3.0);
            }
            let a = lo.max(0.0);
            let b = hi.min(0.25);
            if a <= b {
                take(g0_deriv(p, a));
                take(g0_deriv(p, b));
                // extrema of 1 - cos(pi x/h)/3 sit at multiples of h
                let first = (a / p.h).ceil() as i64;
                let last = (b / p.h).floor() as i64;
                if last >= first {
                    let has_even = (first..=last.min(first + 1)).any(|j| j % 2 == 0);
                    let has_odd = (first..=last.min(first + 1)).any(|j| j % 2 != 0);
                    if has_even {
                        take(2.0 / 3.0);
                    }
                    if has_odd {
                        take(4.0 / 3.0);
                    }
                }
            }
            (min, max)
        }
    }
}

/// Certifies that the map and its inverse are 3/2-Lipschitz on `[lo, hi]`.
///
/// The analytic derivative range is cross-checked on a grid of `grid` points.
pub fn lipschitz_certificate(id: ScalarMapId, p: &Params, lo: f64, hi: f64, grid: usize) -> Certificate {
    let (dmin, dmax) = derivative_range(id, p, lo, hi);
    let mut gmin = f64::INFINITY;
    let mut gmax = f64::NEG_INFINITY;
    let steps = grid.max(2);
    let mut witness = lo;
    for i in 0..steps {
        let x = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let d = scalar_derivative(id, p, x);
        if d > gmax {
            gmax = d;
            witness = x;
        }
        gmin = gmin.min(d);
    }
    let consistent = gmin >= dmin - 1e-12 && gmax <= dmax + 1e-12;
    let margin = (1.5 - dmax).min(dmin - 2.0 / 3.0);
    Certificate::new(
        format!("{id:?} and its inverse are 3/2-Lipschitz on [{lo}, {hi}]"),
        consistent && margin >= -1e-15,
        margin,
    )
    .with_witness(vec![witness])
    .with_values([("sup_derivative", dmax), ("inf_derivative", dmin), ("grid_sup", gmax)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn g0_fixed_points_and_multipliers() {
        let p = derive_params(16, 2).unwrap();
        for m in 0..=4 * p.n {
            let x = m as f64 * p.h;
            assert!((g0(&p, x) - x).abs() < 1e-15);
            let expected = 1.0 - (1.0 / 3.0) * if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((g0_deriv(&p, x) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn pieces_are_continuous() {
        let p = derive_params(20, 2).unwrap();
        assert!((g0(&p, -1e-15) - g0(&p, 0.0)).abs() < 1e-14);
        assert!((g0(&p, 0.25 + 1e-15) - g0(&p, 0.25)).abs() < 1e-14);
    }

    #[test]
    fn inverses() {
        let p = derive_params(16, 2).unwrap();
        for &x in &[-0.9, -0.01, 0.0, 0.003, 0.1, 0.2499, 0.25, 0.7, 1.9] {
            for id in [ScalarMapId::F0, ScalarMapId::F1, ScalarMapId::G0, ScalarMapId::G1] {
                let y = scalar_eval(id, &p, x);
                let back = scalar_inverse(id, &p, y, 1e-14).unwrap();
                assert!((back - x).abs() < 1e-12, "{id:?} {x} {back}");
            }
        }
        assert!(scalar_inverse(ScalarMapId::F0, &p, 5.0, 1e-12).is_err());
        assert!(scalar_eval_checked(ScalarMapId::F0, &p, 2.5).is_err());
    }

    #[test]
    fn lipschitz_on_domain() {
        let p = derive_params(16, 2).unwrap();
        for id in [ScalarMapId::F0, ScalarMapId::F1, ScalarMapId::G0, ScalarMapId::G1] {
            let c = lipschitz_certificate(id, &p, -1.0, 2.0, 10_001);
            assert!(c.pass, "{id:?} {c:?}");
        }
        let (lo, hi) = derivative_range(ScalarMapId::G0, &p, -1.0, 2.0);
        assert_eq!((lo, hi), (2.0 / 3.0, 4.0 / 3.0));
    }
}
