//! Axis-aligned boxes and the named regions of the phase space.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::words::DescentData;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxN {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxN {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        BoxN { lo, hi }
    }

    pub fn cube(k: usize, lo: f64, hi: f64) -> Self {
        BoxN { lo: vec![lo; k], hi: vec![hi; k] }
    }

    pub fn point(x: &[f64]) -> Self {
        BoxN { lo: x.to_vec(), hi: x.to_vec() }
    }

    pub fn around(center: &[f64], half_width: f64) -> Self {
        BoxN {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn contains_box(&self, other: &BoxN) -> bool {
        other.is_empty()
            || (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Smallest gap between `other` and the boundary of `self`; negative when not contained.
    pub fn inclusion_margin(&self, other: &BoxN) -> f64 {
        (0..self.dim())
            .map(|i| (other.lo[i] - self.lo[i]).min(self.hi[i] - other.hi[i]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn intersect(&self, other: &BoxN) -> BoxN {
        BoxN {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    pub fn intersects(&self, other: &BoxN) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn hull(&self, other: &BoxN) -> BoxN {
        BoxN {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i).max(0.0).powi(2)).sum::<f64>().sqrt()
    }

    /// Largest distance from `x` to a corner of the box.
    pub fn farthest_corner_distance(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| (self.lo[i] - x[i]).abs().max((self.hi[i] - x[i]).abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// True when every point of the box lies within `radius` of `x`.
    pub fn inside_ball(&self, x: &[f64], radius: f64) -> bool {
        self.farthest_corner_distance(x) <= radius
    }

    /// Uniform point in the box driven by values in [0, 1).
    pub fn lerp(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| self.lo[i] + u[i] * self.width(i)).collect()
    }
}

/// Named subsets of phase space.
///
/// For `k > 2` the two-dimensional regions are cylinders: the conditions
/// apply to the last two coordinates and the others range over Q+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionId {
    Q,
    Qplus,
    Qminus,
    P,
    Pminus,
    D,
    W,
    Wprime,
    /// Open in the last coordinate: `x_k` in `(-2nu, 1/10)`.
    R,
    /// Half-open strip `y in [1/4 - m h, 1/4 - (m-1) h)`, `m = 1..=4n`.
    A(u32),
    /// `|y - y_{2m-2}| <= rho`, `m = 1..=2n+1`.
    Sminus(u32),
    /// `|y - y_{2m-1}| <= rho`, `m = 1..=2n`.
    Splus(u32),
    /// Strip between the saddle `y_{2m-1}` and the attractor `y_{2m-2}`, minus the rho bands. `m = 1..=2n+1`.
    U(u32),
    /// Strip between the attractor `y_{2m}` and the saddle `y_{2m-1}`, minus the rho bands. `m = 1..=2n`.
    Dstrip(u32),
    /// Block of height 2h, `m = 0..=2n`.
    Pi(u32),
    /// Backward block `[y_{2m}+rho, y_{2m-2}+rho]` intersected with Q-, `m = 1..=2n`.
    PiTilde(u32),
    Kminus,
    K,
    Kplus,
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionId::Q => write!(f, "Q"),
            RegionId::Qplus => write!(f, "Q+"),
            RegionId::Qminus => write!(f, "Q-"),
            RegionId::P => write!(f, "P"),
            RegionId::Pminus => write!(f, "P-"),
            RegionId::D => write!(f, "D"),
            RegionId::W => write!(f, "W"),
            RegionId::Wprime => write!(f, "W'"),
            RegionId::R => write!(f, "R"),
            RegionId::A(m) => write!(f, "A{m}"),
            RegionId::Sminus(m) => write!(f, "S-{m}"),
            RegionId::Splus(m) => write!(f, "S+{m}"),
            RegionId::U(m) => write!(f, "U{m}"),
            RegionId::Dstrip(m) => write!(f, "D{m}"),
            RegionId::Pi(m) => write!(f, "Pi{m}"),
            RegionId::PiTilde(m) => write!(f, "PiT{m}"),
            RegionId::Kminus => write!(f, "K-"),
            RegionId::K => write!(f, "K"),
            RegionId::Kplus => write!(f, "K+"),
        }
    }
}

impl std::str::FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fixed = match s {
            "Q" => Some(RegionId::Q),
            "Q+" => Some(RegionId::Qplus),
            "Q-" => Some(RegionId::Qminus),
            "P" => Some(RegionId::P),
            "P-" => Some(RegionId::Pminus),
            "D" => Some(RegionId::D),
            "W" => Some(RegionId::W),
            "W'" => Some(RegionId::Wprime),
            "R" => Some(RegionId::R),
            "K-" => Some(RegionId::Kminus),
            "K" => Some(RegionId::K),
            "K+" => Some(RegionId::Kplus),
            _ => None,
        };
        if let Some(r) = fixed {
            return Ok(r);
        }
        let prefixes: [(&str, fn(u32) -> RegionId); 7] = [
            ("PiT", RegionId::PiTilde),
            ("Pi", RegionId::Pi),
            ("S-", RegionId::Sminus),
            ("S+", RegionId::Splus),
            ("A", RegionId::A),
            ("U", RegionId::U),
            ("D", RegionId::Dstrip),
        ];
        for (pre, ctor) in prefixes {
            if let Some(rest) = s.strip_prefix(pre) {
                if let Ok(m) = rest.parse::<u32>() {
                    return Ok(ctor(m));
                }
            }
        }
        Err(Error::Parse(format!("unknown region {s:?}")))
    }
}

fn check_index(region: &'static str, m: u32, lo: u32, hi: u32) -> Result<()> {
    if m < lo || m > hi {
        Err(Error::RegionIndex { region, index: m })
    } else {
        Ok(())
    }
}

/// Cylinder over a rectangle in the last two coordinates.
fn cylinder(p: &Params, x: (f64, f64), y: (f64, f64)) -> BoxN {
    let k = p.k;
    let mut b = BoxN::cube(k, -2.0 * p.nu, 1.0 + 2.0 * p.nu);
    b.lo[k - 2] = x.0;
    b.hi[k - 2] = x.1;
    b.lo[k - 1] = y.0;
    b.hi[k - 1] = y.1;
    b
}

fn qplus_x(p: &Params) -> (f64, f64) {
    (-2.0 * p.nu, 1.0 + 2.0 * p.nu)
}

/// Closed box hull of a region. Open or half-open sides are reported closed;
/// use [`region_contains`] for exact membership.
pub fn region_box(p: &Params, id: RegionId) -> Result<BoxN> {
    let n = p.n;
    let nf = n as f64;
    let (nu, h, rho) = (p.nu, p.h, p.rho);
    let qx = qplus_x(p);
    let b = match id {
        RegionId::Q => BoxN::cube(p.k, -1.0, 2.0),
        RegionId::Qplus => BoxN::cube(p.k, -2.0 * nu, 1.0 + 2.0 * nu),
        RegionId::Qminus => BoxN::cube(p.k, 5.0 * nu, 1.0 - 5.0 * nu),
        RegionId::P => cylinder(p, (0.0, 1.0), (0.25, 1.0)),
        RegionId::Pminus => {
            let q = region_box(p, RegionId::Qminus)?;
            let mut b = q.clone();
            b.lo[p.k - 1] = b.lo[p.k - 1].max(0.25 + rho);
            b
        }
        RegionId::D => cylinder(p, (2.0 / nf, 3.0 / nf), (0.0, 0.25)),
        RegionId::W => cylinder(p, (1.0 / nf, 4.0 / nf), (-2.0 / nf, 0.25 + 2.0 / nf)),
        RegionId::Wprime => cylinder(p, (1.0 / nf, 4.0 / nf), (-2.0 / nf, 0.25 - h)),
        RegionId::R => cylinder(p, qx, (-2.0 * nu, 0.1)),
        RegionId::A(m) => {
            check_index("A", m, 1, 4 * n)?;
            cylinder(p, qx, (p.level(m as i64), p.level(m as i64 - 1)))
        }
        RegionId::Sminus(m) => {
            check_index("S-", m, 1, 2 * n + 1)?;
            let y = p.level(2 * m as i64 - 2);
            cylinder(p, qx, (y - rho, y + rho))
        }
        RegionId::Splus(m) => {
            check_index("S+", m, 1, 2 * n)?;
            let y = p.level(2 * m as i64 - 1);
            cylinder(p, qx, (y - rho, y + rho))
        }
        RegionId::U(m) => {
            check_index("U", m, 1, 2 * n + 1)?;
            let m = m as i64;
            cylinder(p, qx, (p.level(2 * m - 1) + rho, p.level(2 * m - 2) - rho))
        }
        RegionId::Dstrip(m) => {
            check_index("D", m, 1, 2 * n)?;
            let m = m as i64;
            cylinder(p, qx, (p.level(2 * m) + rho, p.level(2 * m - 1) - rho))
        }
        RegionId::Pi(m) => {
            check_index("Pi", m, 0, 2 * n)?;
            let (lo, hi) = pi_bounds(p, m);
            cylinder(p, qx, (lo, hi))
        }
        RegionId::PiTilde(m) => {
            check_index("PiT", m, 1, 2 * n)?;
            let m = m as i64;
            let c = cylinder(p, qx, (p.level(2 * m) + rho, p.level(2 * m - 2) + rho));
            c.intersect(&region_box(p, RegionId::Qminus)?)
        }
        RegionId::Kminus | RegionId::K | RegionId::Kplus => {
            let dd = DescentData::from_params(p);
            let (l, j) = match id {
                RegionId::Kminus => (dd.l_minus, dd.j_minus),
                RegionId::K => (dd.l, dd.j),
                _ => (dd.l_plus, dd.j_plus),
            };
            cylinder(p, (l.lo, l.hi), (j.lo, j.hi))
        }
    };
    Ok(b)
}

/// Lower and upper `y` bounds of the block `Pi_m`.
pub fn pi_bounds(p: &Params, m: u32) -> (f64, f64) {
    let m = m as i64;
    if m == 0 {
        (p.level(1) + p.rho, p.level(0) + p.rho)
    } else {
        (p.level(2 * m + 1) + p.rho, p.level(2 * m - 1) + p.rho)
    }
}

/// Index of the block containing height `y`, using half-open blocks `(lo, hi]`.
/// Returns -1 above `Pi_0` and `2n+1` below `Pi_{2n}`.
pub fn pi_index(p: &Params, y: f64) -> i64 {
    let top = p.level(0) + p.rho;
    if y > top {
        return -1;
    }
    // y in (y_{2m+1}+rho, y_{2m-1}+rho]  <=>  (1/4 + rho - y) / (2h) in [m - 1/2, m + 1/2)
    let s = (top - y) / (2.0 * p.h) + 0.5;
    let mut m = s.floor() as i64;
    let bottom = |m: i64| pi_bounds(p, m.clamp(0, 2 * p.n as i64) as u32).0;
    let upper = |m: i64| pi_bounds(p, m.clamp(0, 2 * p.n as i64) as u32).1;
    // fix rounding at block boundaries
    if m >= 0 && m <= 2 * p.n as i64 {
        if y <= bottom(m) {
            m += 1;
        } else if m > 0 && y > upper(m) {
            m -= 1;
        }
    }
    m.clamp(0, 2 * p.n as i64 + 1)
}

/// Index `m` of the strip `A_m` containing `y`, if any.
pub fn strip_index(p: &Params, y: f64) -> Option<u32> {
    if !(y < 0.25 && y >= p.level(4 * p.n as i64)) {
        return None;
    }
    let mut m = ((0.25 - y) / p.h).floor() as i64 + 1;
    if y >= p.level(m - 1) {
        m -= 1;
    } else if y < p.level(m) {
        m += 1;
    }
    if m >= 1 && m <= 4 * p.n as i64 {
        Some(m as u32)
    } else {
        None
    }
}

/// Exact membership, honouring open and half-open sides.
pub fn region_contains(p: &Params, id: RegionId, x: &[f64]) -> Result<bool> {
    if x.len() != p.k {
        return Err(Error::Dimension { expected: p.k, got: x.len() });
    }
    let b = region_box(p, id)?;
    let y = x[p.k - 1];
    Ok(match id {
        RegionId::R => {
            let mut closed = b.contains(x);
            if y <= -2.0 * p.nu || y >= 0.1 {
                closed = false;
            }
            closed
        }
        RegionId::A(_) => b.contains(x) && y < b.hi[p.k - 1],
        _ => b.contains(x),
    })
}

/// Precomputed membership test for the hot loop.
#[derive(Debug, Clone)]
pub struct RegionTest {
    pub id: RegionId,
    bx: BoxN,
    open_top: bool,
    open_bottom: bool,
}

impl RegionTest {
    pub fn new(p: &Params, id: RegionId) -> Result<Self> {
        Ok(RegionTest {
            id,
            bx: region_box(p, id)?,
            open_top: matches!(id, RegionId::A(_) | RegionId::R),
            open_bottom: matches!(id, RegionId::R),
        })
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        let k = x.len();
        let y = x[k - 1];
        if self.open_top && y >= self.bx.hi[k - 1] {
            return false;
        }
        if self.open_bottom && y <= self.bx.lo[k - 1] {
            return false;
        }
        self.bx.contains(x)
    }

    pub fn bounds(&self) -> &BoxN {
        &self.bx
    }
}
