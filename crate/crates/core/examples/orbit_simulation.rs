//! One orbit along a random base: visit frequencies of the named regions
//! and a short trace.
//!
//! cargo run --release --example orbit_simulation -- [n] [steps] [seed]

use invisible_attractor::orbit::{iterate, Orbit, TraceRecorder};
use invisible_attractor::symbolic::sample_base;
use invisible_attractor::{derive_params, FiberFamily, RegionId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let n = args.first().copied().unwrap_or(16) as u32;
    let steps = args.get(1).copied().unwrap_or(1_000_000) as usize;
    let seed = args.get(2).copied().unwrap_or(1);

    let p = derive_params(n, 2)?;
    let fam = FiberFamily::new(p);
    let base = sample_base(seed, steps, 2);
    let regions = [RegionId::P, RegionId::Kplus, RegionId::Qminus, RegionId::W, RegionId::D, RegionId::R];
    let run = iterate(&fam, &base.letters, &[0.5, 0.5], p.default_burn_in(), &regions)?;
    println!("n = {n}, {steps} steps, burn-in {}", p.default_burn_in());
    for (name, c) in &run.stats.counts {
        println!("  {name:<3} hits {:>9}  freq {:.3e}  first {:?}", c.hits, c.freq, c.first_hit);
    }
    println!("final point {:?}", run.x);

    let mut orbit = Orbit::new(&fam, &[0.5, 0.5], 0, &[])?;
    let mut trace = TraceRecorder::new(2, std::io::stdout().lock());
    println!("first points (every second step):");
    orbit.advance(&base.letters[..10], &mut trace)?;
    Ok(())
}
