//! A random bump perturbation of size delta: distances to the unperturbed
//! maps, block checks, movement directions and orbit discrepancy.
//!
//! cargo run --release --example perturbation -- [n] [delta/r] [seed]

use invisible_attractor::perturb::{make_perturbation, measure_distance};
use invisible_attractor::verify::discrepancy::{check_discrepancy_bound, DiscrepancyConfig};
use invisible_attractor::verify::movement::check_directional_movement;
use invisible_attractor::verify::strips::{sampled_block_certificates, BLOCK_SAMPLES};
use invisible_attractor::{derive_params, FiberFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u32 = args.first().map(|a| a.parse()).transpose()?.unwrap_or(16);
    let frac: f64 = args.get(1).map(|a| a.parse()).transpose()?.unwrap_or(0.5);
    let seed: u64 = args.get(2).map(|a| a.parse()).transpose()?.unwrap_or(3);

    let p = derive_params(n, 2)?;
    let delta = frac * p.r;
    let out = make_perturbation(&p, delta, seed)?;
    for w in &out.warnings {
        println!("warning: {w}");
    }
    let fam = FiberFamily::perturbed(p, out.spec);
    println!("delta = {delta:.3e} (r = {:.3e}, rho = {:.3e}), accepted after {} attempt(s)", p.r, p.rho, out.attempts);

    for c in measure_distance(&fam, 64) {
        println!("  {:<40} c0 {:.2e} c1 {:.2e}", c.claim, c.value("c0").unwrap_or(f64::NAN), c.value("c1").unwrap_or(f64::NAN));
    }
    let blocks = sampled_block_certificates(&fam, BLOCK_SAMPLES);
    println!("block checks: {}/{} pass", blocks.iter().filter(|c| c.pass).count(), blocks.len());
    for c in check_directional_movement(&fam)? {
        println!("  [{}] {} margin {:.3e}", if c.pass { "ok" } else { "FAIL" }, c.claim, c.margin);
    }
    let d = check_discrepancy_bound(&fam, &DiscrepancyConfig { trials: 1000, max_len: 1000, seed });
    println!("max |f_w(p) - g_w(p)| = {:.3e} < rho: {}", d.value("max_discrepancy").unwrap_or(f64::NAN), d.pass);
    Ok(())
}
