//! Every occurrence of a critical word in the base is followed by a visit
//! to its target, and occurrences have frequency 4^-m.
//!
//! cargo run --release --example negut -- [n] [length] [seed]

use invisible_attractor::words::{negut_frequency_experiment, NegutSetup};
use invisible_attractor::{derive_params, FiberFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let n = args.first().copied().unwrap_or(16) as u32;
    let length = args.get(1).copied().unwrap_or(10_000_000) as usize;
    let seed = args.get(2).copied().unwrap_or(7);

    let fam = FiberFamily::new(derive_params(n, 2)?);
    let setup = NegutSetup::entry(&fam)?;
    println!("word {:?} (length {}), target {:?}", setup.word.letters, setup.word.len(), setup.target);
    let r = negut_frequency_experiment(&fam, &setup, length, seed)?;
    println!("base of {length} letters, orbit from {:?}, absorbed at t = {:?}", r.start, r.entry_time);
    println!("occurrences {} (after entry {}), visits {}, exceptions {}", r.occurrences, r.occurrences_after_entry, r.visits, r.exceptions);
    println!("frequency {:.4e}, expected {:.4e}, z = {:.2}", r.frequency, r.expected_frequency, r.z_score);
    Ok(())
}
