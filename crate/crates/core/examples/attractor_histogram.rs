//! Occupancy of random orbits, and of one orbit along a base made of
//! critical words for a cover of Q-.
//!
//! cargo run --release --example attractor_histogram -- [side] [out.csv]

use invisible_attractor::orbit::apply_word;
use invisible_attractor::verify::histogram::{attractor_histogram, critical_cover, histogram_along, HistogramConfig};
use invisible_attractor::words::build_upper_ifs;
use invisible_attractor::{derive_params, FiberFamily, Word};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let side: usize = args.first().map(|a| a.parse()).transpose()?.unwrap_or(5);

    let p = derive_params(16, 2)?;
    let fam = FiberFamily::new(p);
    let cfg = HistogramConfig { grid: 64, orbits: 8, steps: 1_000_000, burn_in: p.default_burn_in(), seed: 1 };
    let (_, s) = attractor_histogram(&fam, &cfg)?;
    println!("random bases (n = 16): {} points, {} outside Q+, {} in R, {} cells occupied", s.total, s.outside_qplus, s.in_r, s.occupied_cells);

    let p = derive_params(128, 2)?;
    let fam = FiberFamily::new(p);
    let dd = build_upper_ifs(&p)?;
    let cover = critical_cover(&fam, &dd, side, 0.9)?;
    let targets: Vec<_> = cover.iter().map(|(b, _)| b.clone()).collect();
    let words: Vec<&Word> = cover.iter().map(|(_, w)| w).collect();
    let base = Word::concat(&words);
    let x0 = [0.9, 0.9];
    let (hist, s) = histogram_along(&fam, &base.letters, &x0, 64, 0, &targets)?;
    println!("critical-word base (n = 128): {} letters, {}/{} cells hit", base.len(), s.target_hits.iter().filter(|&&h| h > 0).count(), targets.len());
    println!("  end point {:?}", apply_word(&fam, &base, &x0));
    if let Some(path) = args.get(1) {
        hist.write_csv(std::fs::File::create(path)?)?;
        println!("  wrote {path}");
    }
    Ok(())
}
