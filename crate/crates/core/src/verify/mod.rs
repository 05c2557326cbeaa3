//! Numerical certificates and experiments.

pub mod movement;
pub mod norms;
pub mod strips;
pub mod zero_run;
pub mod discrepancy;
pub mod histogram;
pub mod invisibility;

use crate::geometry::{region_box, BoxN, RegionId};
use crate::params::Params;

/// Q+ with the last two coordinates replaced by `x` and `y`.
pub(crate) fn cylinder(p: &Params, x: (f64, f64), y: (f64, f64)) -> BoxN {
    let k = p.k;
    let mut b = region_box(p, RegionId::Qplus).expect("Q+");
    b.lo[k - 2] = x.0;
    b.hi[k - 2] = x.1;
    b.lo[k - 1] = y.0;
    b.hi[k - 1] = y.1;
    b
}

/// Letter with a 0 in every coordinate.
pub(crate) const fn all_zero() -> u32 {
    0
}

/// Letter with a 1 in every coordinate.
pub(crate) fn all_one(k: usize) -> u32 {
    (1u32 << k) - 1
}

/// Letter `(0, .., 0, 1)`.
pub(crate) fn top_one(k: usize) -> u32 {
    1u32 << (k - 1)
}

/// Evenly spaced interior sample points `lo + (i + 1/2)(hi - lo)/count`.
pub(crate) fn midpoints(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
}
