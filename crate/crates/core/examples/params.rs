//! Derived constants for a few values of n.
//!
//! cargo run --example params -- [n] [k]

use invisible_attractor::derive_params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ns: Vec<u32> = match args.first() {
        Some(a) => vec![a.parse()?],
        None => vec![11, 16, 100, 128],
    };
    let k: usize = args.get(1).map(|a| a.parse()).transpose()?.unwrap_or(2);
    println!("{:>5} {:>12} {:>12} {:>12} {:>10} {:>6} {:>12}", "n", "h", "rho", "r", "lambda", "Kc", "log2 eps");
    for n in ns {
        let p = derive_params(n, k)?;
        println!("{:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.6} {:>6} {:>12}", n, p.h, p.rho, p.r, p.lambda, p.kc, p.epsilon_log2());
        for w in p.warnings() {
            println!("      warning: {}", w.message());
        }
    }
    Ok(())
}
