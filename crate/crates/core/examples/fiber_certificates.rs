//! Norm, scalar and strip certificates for the unperturbed family.
//!
//! cargo run --release --example fiber_certificates -- [n] [grid]

use std::time::Instant;

use invisible_attractor::verify::norms::{norm_certificates, scalar_certificates};
use invisible_attractor::verify::strips::check_strip_dynamics;
use invisible_attractor::{derive_params, Certificate, FiberFamily};

fn show(title: &str, certs: &[Certificate]) {
    let failed = certs.iter().filter(|c| !c.pass).count();
    println!("{title}: {} certificates, {failed} failed", certs.len());
    for c in certs.iter().filter(|c| !c.pass).chain(certs.iter().filter(|c| c.pass).take(6)) {
        println!("  [{}] {:<60} margin {:.3e}", if c.pass { "ok" } else { "FAIL" }, c.claim, c.margin);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let n = args.first().copied().unwrap_or(16) as u32;
    let grid = args.get(1).copied().unwrap_or(1000);
    let fam = FiberFamily::new(derive_params(n, 2)?);

    let t = Instant::now();
    show("norms", &norm_certificates(&fam, grid));
    show("scalar maps", &scalar_certificates(&fam, 10_000));
    show("strips and blocks", &check_strip_dynamics(&fam));
    println!("{:.1?}", t.elapsed());
    Ok(())
}
