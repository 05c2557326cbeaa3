//! Theoretical epsilon next to what random and crafted orbits show.
//!
//! cargo run --release --example invisibility_report -- [n] [k] [orbits] [steps]

use invisible_attractor::verify::invisibility::invisibility_report;
use invisible_attractor::verify::zero_run::LemmaCheckConfig;
use invisible_attractor::{derive_params, FiberFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let n = args.first().copied().unwrap_or(16) as u32;
    let k = args.get(1).copied().unwrap_or(2) as usize;
    let orbits = args.get(2).copied().unwrap_or(8) as usize;
    let steps = args.get(3).copied().unwrap_or(1_000_000);

    let fam = FiberFamily::new(derive_params(n, k)?);
    let rep = invisibility_report(&fam, &LemmaCheckConfig { orbits, steps, seed: 11 }, 3)?;
    println!("{}", serde_json::to_string_pretty(&rep)?);
    Ok(())
}
