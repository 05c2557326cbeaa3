//! Derived constants of the construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All constants fixed by the choice of `n` (and the dimension `k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub k: usize,
    pub nu: f64,
    pub h: f64,
    pub rho: f64,
    pub r: f64,
    pub d: f64,
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
    pub c: f64,
    #[serde(rename = "Kc")]
    pub kc: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamWarning {
    /// n <= 100: contraction and discrepancy bounds have little slack.
    SmallN,
    /// c > a/4: the robust-coverage inequality for the upper IFS is not guaranteed.
    CoverageNotGuaranteed,
    /// a < d: no power of lambda brings a into [d, 2d); Kc = 0 and c = a are used.
    DescentUnreachable,
}

impl ParamWarning {
    pub fn message(self) -> &'static str {
        match self {
            ParamWarning::SmallN => "n <= 100: estimates may be tight",
            ParamWarning::CoverageNotGuaranteed => "c > a/4: robust coverage not guaranteed",
            ParamWarning::DescentUnreachable => "descent constant unreachable (a < d), using Kc = 0",
        }
    }
}

pub const MAX_K: usize = 31;

/// Derives every constant from `n` and `k`.
///
/// Fails for `n <= 10` and for `k` outside `2..=31`.
pub fn derive_params(n: u32, k: usize) -> Result<Params> {
    if n <= 10 {
        return Err(Error::InvalidN(n));
    }
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::InvalidK(k));
    }
    let nf = n as f64;
    let nu = 1.0 / nf;
    let h = 1.0 / (16.0 * nf);
    let rho = h / 10.0;
    let r = h * nu / 10.0;
    let d = 5.0 / nf;
    let lambda = 1.0 - 1.0 / (8.0 * nf);
    let mu = 2.0 / 3.0;
    let a = 1.0 / 3.0;

    let (kc, c) = if a < d {
        (0, a)
    } else {
        let mut kc = 0u32;
        while a * lambda.powi(kc as i32) >= 2.0 * d {
            kc += 1;
        }
        (kc, a * lambda.powi(kc as i32))
    };

    Ok(Params { n, k, nu, h, rho, r, d, lambda, mu, a, c, kc })
}

impl Params {
    pub fn warnings(&self) -> Vec<ParamWarning> {
        let mut out = Vec::new();
        if self.n <= 100 {
            out.push(ParamWarning::SmallN);
        }
        if self.a < self.d {
            out.push(ParamWarning::DescentUnreachable);
        }
        if self.c > self.a / 4.0 {
            out.push(ParamWarning::CoverageNotGuaranteed);
        }
        out
    }

    /// Level `y_j = 1/4 - j h`. Even `j` are attracting fixed points of `g0`, odd are saddles.
    #[inline]
    pub fn level(&self, j: i64) -> f64 {
        0.25 - j as f64 * self.h
    }

    /// Number of symbols, `2^k`.
    #[inline]
    pub fn symbols(&self) -> u32 {
        1u32 << self.k
    }

    /// `log2` of the invisibility bound `2^(-n^k)`.
    pub fn epsilon_log2(&self) -> f64 {
        -(self.n as f64).powi(self.k as i32)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_log2().exp2()
    }

    /// Burn-in used by default for visit statistics: `n^k` steps.
    pub fn default_burn_in(&self) -> u64 {
        (self.n as u64).saturating_pow(self.k as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_n() {
        assert!(matches!(derive_params(10, 2), Err(Error::InvalidN(10))));
        assert!(derive_params(11, 2).is_ok());
        assert!(matches!(derive_params(16, 1), Err(Error::InvalidK(1))));
    }

    #[test]
    fn n16_constants() {
        let p = derive_params(16, 2).unwrap();
        assert_eq!(p.kc, 0);
        assert_eq!(p.c, 1.0 / 3.0);
        assert_eq!(p.h, 1.0 / 256.0);
        assert_eq!(p.lambda, 1.0 - 1.0 / 128.0);
        assert!(p.warnings().contains(&ParamWarning::SmallN));
        assert!(p.warnings().contains(&ParamWarning::CoverageNotGuaranteed));
    }

    #[test]
    fn n128_kc_is_minimal() {
        let p = derive_params(128, 2).unwrap();
        // independent: smallest K with a*lambda^K < 2d, by logarithms
        let k_star = ((2.0 * p.d / p.a).ln() / p.lambda.ln()).ceil() as u32;
        assert_eq!(p.kc, k_star);
        assert!(p.c >= p.d && p.c < 2.0 * p.d);
        let mut direct = p.a;
        for _ in 0..p.kc {
            direct *= p.lambda;
        }
        assert!((direct - p.c).abs() < 1e-12);
        assert!(p.c <= p.a / 4.0);
        assert!(!p.warnings().contains(&ParamWarning::CoverageNotGuaranteed));
    }

    #[test]
    fn n11_uses_fallback() {
        let p = derive_params(11, 2).unwrap();
        assert_eq!(p.kc, 0);
        assert!(p.warnings().contains(&ParamWarning::DescentUnreachable));
    }

    #[test]
    fn json_keys() {
        let p = derive_params(32, 2).unwrap();
        let v = serde_json::to_value(p).unwrap();
        for key in ["n", "k", "nu", "h", "rho", "r", "d", "lambda", "mu", "a", "c", "Kc"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
