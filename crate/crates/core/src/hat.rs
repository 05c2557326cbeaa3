//! Smooth trapezoid ("hat") functions used for the coupling term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

/// Fraction of the slope excess spent in the rounded shoulders of a ramp.
const SLOPE_EXCESS: f64 = 0.01;

/// `C^1` trapezoid: zero outside `[ka, kd]`, equal to `amplitude` on `[kb, kc]`,
/// monotone on the ramps. The slope never exceeds `1.01 * amplitude / ramp width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatSpec {
    pub ka: f64,
    pub kb: f64,
    pub kc: f64,
    pub kd: f64,
    pub amplitude: f64,
}

/// Ramp of height `amp` over `[0, w]`: slope `s = 1.01 amp / w` with
/// raised-cosine shoulders of width `sigma` at both ends.
#[derive(Debug, Clone, Copy)]
struct Ramp {
    w: f64,
    s: f64,
    sigma: f64,
    amp: f64,
}

impl Ramp {
    fn new(w: f64, amp: f64) -> Self {
        let s = (1.0 + SLOPE_EXCESS) * amp / w;
        let sigma = w * SLOPE_EXCESS / (1.0 + SLOPE_EXCESS);
        Ramp { w, s, sigma, amp }
    }

    fn shoulder(&self, t: f64) -> f64 {
        0.5 * self.s * (t - self.sigma / PI * (PI * t / self.sigma).sin())
    }

    fn shoulder_d(&self, t: f64) -> f64 {
        0.5 * self.s * (1.0 - (PI * t / self.sigma).cos())
    }

    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= self.w {
            self.amp
        } else if t <= self.sigma {
            self.shoulder(t)
        } else if t < self.w - self.sigma {
            0.5 * self.s * self.sigma + self.s * (t - self.sigma)
        } else {
            self.amp - self.shoulder(self.w - t)
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.w {
            0.0
        } else if t <= self.sigma {
            self.shoulder_d(t)
        } else if t < self.w - self.sigma {
            self.s
        } else {
            self.shoulder_d(self.w - t)
        }
    }
}

impl HatSpec {
    pub fn new(ka: f64, kb: f64, kc: f64, kd: f64, amplitude: f64) -> Result<Self> {
        if !(ka < kb && kb <= kc && kc < kd) {
            return Err(Error::InvalidHat(format!("knots must satisfy a < b <= c < d, got {ka} {kb} {kc} {kd}")));
        }
        if !(amplitude > 0.0) {
            return Err(Error::InvalidHat(format!("amplitude must be positive, got {amplitude}")));
        }
        Ok(HatSpec { ka, kb, kc, kd, amplitude })
    }

    /// `alpha(x) = phi(x; 1/n, 2/n, 3/n, 4/n)`.
    pub fn alpha(p: &Params) -> Self {
        let n = p.n as f64;
        HatSpec { ka: 1.0 / n, kb: 2.0 / n, kc: 3.0 / n, kd: 4.0 / n, amplitude: 1.0 }
    }

    /// `beta(y) = (1/(10n)) phi(y; -2/n, 0, 1/4, 1/4 + 2/n)`.
    pub fn beta(p: &Params) -> Self {
        let n = p.n as f64;
        HatSpec { ka: -2.0 / n, kb: 0.0, kc: 0.25, kd: 0.25 + 2.0 / n, amplitude: 1.0 / (10.0 * n) }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.ka || x >= self.kd {
            0.0
        } else if x < self.kb {
            Ramp::new(self.kb - self.ka, self.amplitude).value(x - self.ka)
        } else if x <= self.kc {
            self.amplitude
        } else {
            Ramp::new(self.kd - self.kc, self.amplitude).value(self.kd - x)
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.ka || x >= self.kd {
            0.0
        } else if x < self.kb {
            Ramp::new(self.kb - self.ka, self.amplitude).deriv(x - self.ka)
        } else if x <= self.kc {
            0.0
        } else {
            -Ramp::new(self.kd - self.kc, self.amplitude).deriv(self.kd - x)
        }
    }

    /// Analytic bound on `|phi'|`.
    pub fn max_abs_derivative(&self) -> f64 {
        let w = (self.kb - self.ka).min(self.kd - self.kc);
        (1.0 + SLOPE_EXCESS) * self.amplitude / w
    }

    /// Exact range of the hat over `[lo, hi]`.
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.eval(lo);
        let b = self.eval(hi);
        let min = a.min(b);
        let max = if hi >= self.kb && lo <= self.kc { self.amplitude } else { a.max(b) };
        (min, max)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.ka, self.kd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn plateau_and_support() {
        let p = derive_params(16, 2).unwrap();
        let a = HatSpec::alpha(&p);
        assert_eq!(a.eval(2.5 / 16.0), 1.0);
        assert_eq!(a.eval(0.5 / 16.0), 0.0);
        assert_eq!(a.eval(4.0 / 16.0), 0.0);
        let b = HatSpec::beta(&p);
        assert_eq!(b.eval(0.1), 1.0 / 160.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = derive_params(16, 2).unwrap();
        let a = HatSpec::alpha(&p);
        let bound = a.max_abs_derivative();
        assert!((bound - 1.01 * 16.0).abs() < 1e-12);
        let e = 1e-7;
        for i in 1..2000 {
            let x = 0.5 / 16.0 + 4.0 / 16.0 * i as f64 / 2000.0;
            let fd = (a.eval(x + e) - a.eval(x - e)) / (2.0 * e);
            assert!((fd - a.derivative(x)).abs() < 1e-3 * bound, "{x}");
            assert!(a.derivative(x).abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ramp_is_continuous() {
        let h = HatSpec::new(0.0, 1.0, 2.0, 3.0, 2.0).unwrap();
        let r = Ramp::new(1.0, 2.0);
        for t in [r.sigma, 1.0 - r.sigma] {
            assert!((h.eval(t - 1e-12) - h.eval(t + 1e-12)).abs() < 1e-10);
        }
        assert!((h.eval(1.0 - 1e-12) - 2.0).abs() < 1e-10);
        assert!(HatSpec::new(1.0, 0.0, 2.0, 3.0, 1.0).is_err());
    }
}
