//! Fiber maps `f_s` of the skew product, their Jacobians, inverses and box images.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxN;
use crate::hat::HatSpec;
use crate::params::Params;
use crate::perturb::PerturbationSpec;
use crate::scalar::{self, f1, g0, g0_deriv, g0_inv};

/// A letter of the alphabet `{0,1}^k`. Bit `i` is coordinate `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolVector {
    pub bits: u32,
    pub k: u8,
}

impl SymbolVector {
    pub fn new(bits: u32, k: usize) -> Result<Self> {
        if !(2..=crate::params::MAX_K).contains(&k) {
            return Err(Error::InvalidK(k));
        }
        if bits >> k != 0 {
            return Err(Error::BadSymbol(bits));
        }
        Ok(SymbolVector { bits, k: k as u8 })
    }

    /// Builds a symbol from coordinates `b_1, ..., b_k`.
    pub fn from_coords(coords: &[u8]) -> Result<Self> {
        let mut bits = 0;
        for (i, &b) in coords.iter().enumerate() {
            match b {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(Error::BadSymbol(b as u32)),
            }
        }
        Self::new(bits, coords.len())
    }

    /// The symbol `(1, ..., 1, 0)` that switches the coupling on in the last coordinate.
    pub fn special(k: usize) -> Self {
        SymbolVector { bits: (1 << (k - 1)) - 1, k: k as u8 }
    }

    #[inline]
    pub fn coord(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn all(k: usize) -> impl Iterator<Item = SymbolVector> {
        (0..1u32 << k).map(move |bits| SymbolVector { bits, k: k as u8 })
    }
}

impl fmt::Display for SymbolVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.k as usize {
            write!(f, "{}", self.coord(i))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SymbolVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coords: Vec<u8> = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad symbol {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_coords(&coords)
    }
}

/// Coordinate (0-based) carrying the coupling term for the letter `bits`:
/// the first zero bit, provided all earlier bits are one and it is not the first coordinate.
#[inline]
pub fn coupling_coordinate(bits: u32, k: usize) -> Option<usize> {
    let i = bits.trailing_ones() as usize;
    if i >= 1 && i < k {
        Some(i)
    } else {
        None
    }
}

/// Dense `k x k` Jacobian, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub k: usize,
    pub m: Vec<f64>,
}

impl Jacobian {
    pub fn zeros(k: usize) -> Self {
        Jacobian { k, m: vec![0.0; k * k] }
    }

    pub fn identity(k: usize) -> Self {
        let mut j = Self::zeros(k);
        for i in 0..k {
            j.m[i * k + i] = 1.0;
        }
        j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.m[i * self.k + j] = v;
    }

    pub fn mul(&self, other: &Jacobian) -> Jacobian {
        let k = self.k;
        let mut out = Jacobian::zeros(k);
        for i in 0..k {
            for j in 0..k {
                out.m[i * k + j] = (0..k).map(|l| self.get(i, l) * other.get(l, j)).sum();
            }
        }
        out
    }

    pub fn sub(&self, other: &Jacobian) -> Jacobian {
        Jacobian { k: self.k, m: self.m.iter().zip(&other.m).map(|(a, b)| a - b).collect() }
    }

    /// Largest and smallest singular values.
    pub fn singular_extremes(&self) -> (f64, f64) {
        let k = self.k;
        if k == 2 {
            let (a, b, c, d) = (self.m[0], self.m[1], self.m[2], self.m[3]);
            let t = a * a + b * b + c * c + d * d;
            let det = (a * d - b * c).abs();
            let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
            let smax = (0.5 * (t + disc)).sqrt();
            let smin = if smax > 0.0 { det / smax } else { 0.0 };
            return (smax, smin);
        }
        let mut ata = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                ata[i * k + j] = (0..k).map(|l| self.get(l, i) * self.get(l, j)).sum();
            }
        }
        let eig = symmetric_eigenvalues(&mut ata, k);
        let max = eig.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt();
        (max, min)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_extremes().0
    }

    /// Matrix inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Jacobian> {
        let k = self.k;
        let mut a = self.m.clone();
        let mut inv = Jacobian::identity(k).m;
        for c in 0..k {
            let piv = (c..k).max_by(|&x, &y| a[x * k + c].abs().total_cmp(&a[y * k + c].abs()))?;
            if a[piv * k + c] == 0.0 {
                return None;
            }
            for j in 0..k {
                a.swap(c * k + j, piv * k + j);
                inv.swap(c * k + j, piv * k + j);
            }
            let d = a[c * k + c];
            for j in 0..k {
                a[c * k + j] /= d;
                inv[c * k + j] /= d;
            }
            for r in 0..k {
                if r != c {
                    let f = a[r * k + c];
                    for j in 0..k {
                        a[r * k + j] -= f * a[c * k + j];
                        inv[r * k + j] -= f * inv[c * k + j];
                    }
                }
            }
        }
        Some(Jacobian { k, m: inv })
    }

    /// Norm of the inverse, `1 / sigma_min`.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.singular_extremes().1
    }
}

/// Cyclic Jacobi rotations; `a` is destroyed.
fn symmetric_eigenvalues(a: &mut [f64], k: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * k + j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[r * k + p];
                    let arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p * k + r];
                    let aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..k).map(|i| a[i * k + i]).collect()
}

/// Relative outward padding applied to box images.
const PAD: f64 = 4.0 * f64::EPSILON;

#[inline]
fn pad_down(v: f64) -> f64 {
    v - PAD * (1.0 + v.abs())
}

#[inline]
fn pad_up(v: f64) -> f64 {
    v + PAD * (1.0 + v.abs())
}

/// The family `{f_s}` for one parameter set, optionally perturbed by `psi_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberFamily {
    pub params: Params,
    pub alpha: HatSpec,
    pub beta: HatSpec,
    pub perturbation: Option<PerturbationSpec>,
}

impl FiberFamily {
    pub fn new(params: Params) -> Self {
        FiberFamily { params, alpha: HatSpec::alpha(&params), beta: HatSpec::beta(&params), perturbation: None }
    }

    pub fn perturbed(params: Params, spec: PerturbationSpec) -> Self {
        let mut f = Self::new(params);
        f.perturbation = Some(spec);
        f
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn unperturbed(&self) -> FiberFamily {
        FiberFamily { perturbation: None, ..self.clone() }
    }

    /// In-place application of `f_bits`. No checks.
    #[inline]
    pub fn apply_in_place(&self, bits: u32, x: &mut [f64]) {
        let p = &self.params;
        let k = x.len();
        let coupled = coupling_coordinate(bits, k);
        for i in (1..k).rev() {
            let xi = x[i];
            let mut v = if bits >> i & 1 == 1 { f1(xi) } else { g0(p, xi) };
            if coupled == Some(i) {
                v -= self.alpha.eval(x[i - 1]) * self.beta.eval(xi);
            }
            x[i] = v;
        }
        x[0] = if bits & 1 == 1 { f1(x[0]) } else { p.lambda * x[0] };
        if let Some(pert) = &self.perturbation {
            pert.add_displacement(bits, x);
        }
    }

    pub fn eval(&self, s: SymbolVector, x: &[f64]) -> Result<Vec<f64>> {
        self.check(s, x)?;
        let mut y = x.to_vec();
        self.apply_in_place(s.bits, &mut y);
        Ok(y)
    }

    fn check(&self, s: SymbolVector, x: &[f64]) -> Result<()> {
        if s.k as usize != self.k() {
            return Err(Error::Dimension { expected: self.k(), got: s.k as usize });
        }
        if x.len() != self.k() {
            return Err(Error::Dimension { expected: self.k(), got: x.len() });
        }
        Ok(())
    }

    /// Jacobian of the unperturbed map at `x`.
    pub fn base_jacobian(&self, bits: u32, x: &[f64]) -> Jacobian {
        let p = &self.params;
        let k = x.len();
        let mut j = Jacobian::zeros(k);
        j.set(0, 0, if bits & 1 == 1 { 2.0 / 3.0 } else { p.lambda });
        for i in 1..k {
            j.set(i, i, if bits >> i & 1 == 1 { 2.0 / 3.0 } else { g0_deriv(p, x[i]) });
        }
        if let Some(i) = coupling_coordinate(bits, k) {
            let a = self.alpha.eval(x[i - 1]);
            let da = self.alpha.derivative(x[i - 1]);
            let b = self.beta.eval(x[i]);
            let db = self.beta.derivative(x[i]);
            j.set(i, i, j.get(i, i) - a * db);
            j.set(i, i - 1, -da * b);
        }
        j
    }

    pub fn jacobian(&self, s: SymbolVector, x: &[f64]) -> Result<Jacobian> {
        self.check(s, x)?;
        let base = self.base_jacobian(s.bits, x);
        Ok(match &self.perturbation {
            None => base,
            Some(pert) => {
                let mut y = x.to_vec();
                self.unperturbed().apply_in_place(s.bits, &mut y);
                let mut d = pert.jacobian(s.bits, &y);
                for i in 0..self.k() {
                    d.set(i, i, d.get(i, i) + 1.0);
                }
                d.mul(&base)
            }
        })
    }

    /// Inverse of the unperturbed map. Fails when the preimage leaves the domain.
    fn base_inverse(&self, bits: u32, y: &[f64], tol: f64) -> Result<Vec<f64>> {
        let p = &self.params;
        let k = y.len();
        let mut x = vec![0.0; k];
        let id0 = if bits & 1 == 1 { scalar::ScalarMapId::F1 } else { scalar::ScalarMapId::F0 };
        x[0] = scalar::scalar_inverse(id0, p, y[0], tol)?;
        let coupled = coupling_coordinate(bits, k);
        for i in 1..k {
            let yi = y[i];
            x[i] = if bits >> i & 1 == 1 {
                scalar::scalar_inverse(scalar::ScalarMapId::G1, p, yi, tol)?
            } else if coupled == Some(i) {
                let a = self.alpha.eval(x[i - 1]);
                let amp = a * self.beta.amplitude;
                let mut lo = g0_inv(p, yi, tol * 0.1);
                let mut hi = g0_inv(p, yi + amp, tol * 0.1);
                if a > 0.0 {
                    let beta = self.beta;
                    scalar::bisect(|t| g0(p, t) - a * beta.eval(t) - yi, &mut lo, &mut hi, tol);
                }
                0.5 * (lo + hi)
            } else {
                scalar::scalar_inverse(scalar::ScalarMapId::G0, p, yi, tol)?
            };
        }
        Ok(x)
    }

    /// Preimage of `y` under `f_s`; errors when there is no preimage in Q+.
    pub fn inverse(&self, s: SymbolVector, y: &[f64], tol: f64) -> Result<Vec<f64>> {
        self.check(s, y)?;
        let z = match &self.perturbation {
            None => y.to_vec(),
            Some(pert) => pert.inverse_displacement(s.bits, y),
        };
        let x = self.base_inverse(s.bits, &z, tol)?;
        let q = 2.0 * self.params.nu + tol.max(1e-12);
        if x.iter().any(|&v| v < -q || v > 1.0 + q) {
            return Err(Error::NotInRange { value: y[0] });
        }
        Ok(x)
    }

    /// Like [`FiberFamily::inverse`] but without the Q+ restriction.
    pub fn inverse_unrestricted(&self, s: SymbolVector, y: &[f64], tol: f64) -> Result<Vec<f64>> {
        self.check(s, y)?;
        let z = match &self.perturbation {
            None => y.to_vec(),
            Some(pert) => pert.inverse_displacement(s.bits, y),
        };
        self.base_inverse(s.bits, &z, tol)
    }

    /// Outward-rounded enclosure of `f_bits(b)`.
    pub fn image_box(&self, bits: u32, b: &BoxN) -> BoxN {
        let p = &self.params;
        let k = b.dim();
        let mut lo = vec![0.0; k];
        let mut hi = vec![0.0; k];
        let (l0, h0) = if bits & 1 == 1 { (f1(b.lo[0]), f1(b.hi[0])) } else { (p.lambda * b.lo[0], p.lambda * b.hi[0]) };
        lo[0] = l0;
        hi[0] = h0;
        let coupled = coupling_coordinate(bits, k);
        for i in 1..k {
            let (a, c) = (b.lo[i], b.hi[i]);
            if bits >> i & 1 == 1 {
                lo[i] = f1(a);
                hi[i] = f1(c);
            } else if coupled == Some(i) {
                // y -> g0(y) - alpha * beta(y) is increasing for every fixed alpha in [0, 1]
                let (amin, amax) = self.alpha.range(b.lo[i - 1], b.hi[i - 1]);
                lo[i] = g0(p, a) - amax * self.beta.eval(a);
                hi[i] = g0(p, c) - amin * self.beta.eval(c);
            } else {
                lo[i] = g0(p, a);
                hi[i] = g0(p, c);
            }
        }
        if let Some(pert) = &self.perturbation {
            let s = pert.sup_bound(bits);
            for i in 0..k {
                lo[i] -= s[i];
                hi[i] += s[i];
            }
        }
        BoxN { lo: lo.into_iter().map(pad_down).collect(), hi: hi.into_iter().map(pad_up).collect() }
    }
}
