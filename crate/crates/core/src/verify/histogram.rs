//! Occupancy histograms of the projection of orbits onto the last two coordinates.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::zero_run::start_point;
use crate::error::Result;
use crate::fiber::FiberFamily;
use crate::geometry::{region_box, BoxN, RegionId, RegionTest};
use crate::orbit::{Orbit, StepObserver};
use crate::symbolic::{BernoulliSource, Word};
use crate::words::{critical_word_for, DescentData};

const CHUNK: usize = 1 << 16;

/// Cell counts over Q+ (last two coordinates), plus an outside bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub grid: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// Row-major by first-axis cell: `counts[ix * grid + iy]`.
    pub counts: Vec<u64>,
    pub outside: u64,
    pub in_r: u64,
    pub total: u64,
}

impl Histogram {
    pub fn new(fam: &FiberFamily, grid: usize) -> Self {
        let q = region_box(&fam.params, RegionId::Qplus).expect("Q+");
        let k = fam.k();
        Histogram {
            grid,
            lo: [q.lo[k - 2], q.lo[k - 1]],
            hi: [q.hi[k - 2], q.hi[k - 1]],
            counts: vec![0; grid * grid],
            outside: 0,
            in_r: 0,
            total: 0,
        }
    }

    /// Cell of `(x, y)`, or `None` outside Q+.
    pub fn cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let u = (x - self.lo[0]) / (self.hi[0] - self.lo[0]);
        let v = (y - self.lo[1]) / (self.hi[1] - self.lo[1]);
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return None;
        }
        let g = self.grid as f64;
        Some((((u * g) as usize).min(self.grid - 1), ((v * g) as usize).min(self.grid - 1)))
    }

    pub fn cell_box(&self, ix: usize, iy: usize) -> BoxN {
        let wx = (self.hi[0] - self.lo[0]) / self.grid as f64;
        let wy = (self.hi[1] - self.lo[1]) / self.grid as f64;
        BoxN::new(
            vec![self.lo[0] + ix as f64 * wx, self.lo[1] + iy as f64 * wy],
            vec![self.lo[0] + (ix + 1) as f64 * wx, self.lo[1] + (iy + 1) as f64 * wy],
        )
    }

    pub fn merge(&mut self, o: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        self.outside += o.outside;
        self.in_r += o.in_r;
        self.total += o.total;
    }

    /// Counted points equal cell counts plus the outside bucket.
    pub fn mass_conserved(&self) -> bool {
        self.counts.iter().sum::<u64>() + self.outside == self.total
    }

    /// Nonzero cells as `ix,iy,count` lines with a header.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "ix,iy,x_lo,y_lo,count")?;
        for ix in 0..self.grid {
            for iy in 0..self.grid {
                let c = self.counts[ix * self.grid + iy];
                if c > 0 {
                    let b = self.cell_box(ix, iy);
                    writeln!(w, "{ix},{iy},{},{},{c}", b.lo[0], b.lo[1])?;
                }
            }
        }
        Ok(())
    }
}

/// Observer filling a histogram after the burn-in, and counting hits of a
/// list of target boxes.
pub struct HistogramObserver<'a> {
    pub hist: Histogram,
    burn_in: u64,
    r: RegionTest,
    targets: &'a [BoxN],
    pub target_hits: Vec<u64>,
}

impl<'a> HistogramObserver<'a> {
    pub fn new(fam: &FiberFamily, grid: usize, burn_in: u64, targets: &'a [BoxN]) -> Self {
        HistogramObserver {
            hist: Histogram::new(fam, grid),
            burn_in,
            r: RegionTest::new(&fam.params, RegionId::R).expect("R"),
            targets,
            target_hits: vec![0; targets.len()],
        }
    }
}

impl StepObserver for HistogramObserver<'_> {
    #[inline]
    fn observe(&mut self, t: u64, _: u32, x: &[f64]) {
        if t <= self.burn_in {
            return;
        }
        let k = x.len();
        let h = &mut self.hist;
        h.total += 1;
        match h.cell(x[k - 2], x[k - 1]) {
            Some((ix, iy)) => h.counts[ix * h.grid + iy] += 1,
            None => h.outside += 1,
        }
        if self.r.contains(x) {
            h.in_r += 1;
        }
        let p = [x[k - 2], x[k - 1]];
        for (i, b) in self.targets.iter().enumerate() {
            if b.contains(&p) {
                self.target_hits[i] += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub grid: usize,
    pub orbits: usize,
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub total: u64,
    pub outside_qplus: u64,
    pub in_r: u64,
    pub occupied_cells: usize,
    pub mass_conserved: bool,
    pub target_hits: Vec<u64>,
}

impl HistogramSummary {
    fn of(h: &Histogram, target_hits: Vec<u64>) -> Self {
        HistogramSummary {
            total: h.total,
            outside_qplus: h.outside,
            in_r: h.in_r,
            occupied_cells: h.counts.iter().filter(|&&c| c > 0).count(),
            mass_conserved: h.mass_conserved(),
            target_hits,
        }
    }

    /// Every target box was visited at least once.
    pub fn all_targets_hit(&self) -> bool {
        self.target_hits.iter().all(|&c| c > 0)
    }
}

/// Histogram over `cfg.orbits` random orbits (stream `i` for orbit `i`).
pub fn attractor_histogram(fam: &FiberFamily, cfg: &HistogramConfig) -> Result<(Histogram, HistogramSummary)> {
    let k = fam.k();
    let parts: Vec<Result<Histogram>> = (0..cfg.orbits as u64)
        .into_par_iter()
        .map(|i| {
            let x0 = start_point(fam, cfg.seed, i);
            let mut orbit = Orbit::new(fam, &x0, 0, &[])?;
            let mut obs = HistogramObserver::new(fam, cfg.grid, cfg.burn_in, &[]);
            let mut src = BernoulliSource::new(cfg.seed, i, k);
            let mut buf = vec![0u32; CHUNK];
            let mut left = cfg.steps;
            while left > 0 {
                let len = (left as usize).min(CHUNK);
                src.fill(&mut buf[..len]);
                orbit.advance(&buf[..len], &mut obs)?;
                left -= len as u64;
            }
            Ok(obs.hist)
        })
        .collect();
    let mut hist = Histogram::new(fam, cfg.grid);
    for part in parts {
        hist.merge(&part?);
    }
    let summary = HistogramSummary::of(&hist, Vec::new());
    Ok((hist, summary))
}

/// Histogram of one orbit along explicit letters, counting hits of `targets`.
pub fn histogram_along(fam: &FiberFamily, letters: &[u32], x0: &[f64], grid: usize, burn_in: u64, targets: &[BoxN]) -> Result<(Histogram, HistogramSummary)> {
    let mut orbit = Orbit::new(fam, x0, 0, &[])?;
    let mut obs = HistogramObserver::new(fam, grid, burn_in, targets);
    orbit.advance(letters, &mut obs)?;
    let summary = HistogramSummary::of(&obs.hist, obs.target_hits.clone());
    Ok((obs.hist, summary))
}

/// Cells of a `side x side` cover of Q- and a critical word for the center
/// of each, with target radius `radius_frac` times the half-width of a cell.
pub fn critical_cover(fam: &FiberFamily, dd: &DescentData, side: usize, radius_frac: f64) -> Result<Vec<(BoxN, Word)>> {
    let p = &fam.params;
    let k = p.k;
    let qm = region_box(p, RegionId::Qminus)?;
    let (x0, y0) = (qm.lo[k - 2], qm.lo[k - 1]);
    let (wx, wy) = (qm.width(k - 2) / side as f64, qm.width(k - 1) / side as f64);
    let radius = radius_frac * 0.5 * wx.min(wy);
    let cells: Vec<BoxN> = (0..side * side)
        .map(|c| {
            let (i, j) = (c / side, c % side);
            BoxN::new(vec![x0 + i as f64 * wx, y0 + j as f64 * wy], vec![x0 + (i + 1) as f64 * wx, y0 + (j + 1) as f64 * wy])
        })
        .collect();
    cells
        .into_par_iter()
        .map(|cell| {
            let w = critical_word_for(fam, dd, &cell.center(), radius)?;
            Ok((cell, w.word))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn random_mass_stays_in_qplus() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let cfg = HistogramConfig { grid: 32, orbits: 3, steps: 50_000, burn_in: 256, seed: 8 };
        let (h, s) = attractor_histogram(&fam, &cfg).unwrap();
        assert_eq!(s.outside_qplus, 0);
        assert_eq!(s.total, 3 * (50_000 - 256));
        assert!(s.mass_conserved);
        assert_eq!(s.in_r, 0);
        let mut csv = Vec::new();
        h.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), s.occupied_cells + 1);
    }

    #[test]
    fn all_one_base_sits_at_corner() {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let letters = vec![3u32; 2000];
        let corner = BoxN::around(&[1.0, 1.0], 1e-6);
        let (_, s) = histogram_along(&fam, &letters, &[0.2, 0.3], 16, 1000, &[corner]).unwrap();
        assert_eq!(s.target_hits[0], 1000);
    }
}
