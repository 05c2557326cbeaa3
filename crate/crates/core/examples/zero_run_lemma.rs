//! Zero-run implications on random orbits, plus directed descents into R.
//!
//! cargo run --release --example zero_run_lemma -- [n] [k] [orbits] [steps]

use std::time::Instant;

use invisible_attractor::verify::zero_run::{check_zero_run_lemma, directed_descent_base, run_crafted, LemmaCheckConfig};
use invisible_attractor::{derive_params, FiberFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let n = args.first().copied().unwrap_or(16) as u32;
    let k = args.get(1).copied().unwrap_or(2) as usize;
    let orbits = args.get(2).copied().unwrap_or(4) as usize;
    let steps = args.get(3).copied().unwrap_or(1_000_000);

    let p = derive_params(n, k)?;
    let fam = FiberFamily::new(p);
    let t = Instant::now();
    let rep = check_zero_run_lemma(&fam, &LemmaCheckConfig { orbits, steps, seed: 2024 })?;
    println!("random: {orbits} orbits x {steps} steps in {:.1?}", t.elapsed());
    for o in &rep.random {
        println!("  {:<24} visits {:>8}  violations {}", o.name, o.visits, o.violations);
    }

    let horizon = (n as usize).pow(k as u32);
    let x0 = vec![0.5; k];
    let hold = if k > 2 { horizon } else { 0 };
    for (label, hold) in [("held", hold), ("no hold", 0)] {
        let db = directed_descent_base(&fam, &x0, 9, 20 * horizon.max(4000), 3, hold)?;
        let out = run_crafted(&fam, &db.base, &db.x0, label)?;
        println!("crafted ({label}): windows {:?}", db.windows);
        println!("  R visits {}  long runs {}  violations {}", out.r_visits, out.long_runs, out.violations());
        for o in &out.implications {
            println!("  {:<24} visits {:>6} min run {:?} first violation {:?}", o.name, o.visits, o.min_run_at_visit, o.first_violation);
        }
    }
    Ok(())
}
