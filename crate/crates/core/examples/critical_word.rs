//! Critical words steering all of Q+ into a small ball around a target in Q-.
//!
//! cargo run --release --example critical_word -- [x] [y] [radius]

use invisible_attractor::orbit::{apply_word, apply_word_box};
use invisible_attractor::words::{build_upper_ifs, critical_word_for, entry_word};
use invisible_attractor::{derive_params, BoxN, FiberFamily, RegionId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let x = [args.first().copied().unwrap_or(0.5), args.get(1).copied().unwrap_or(0.5)];
    let radius = args.get(2).copied().unwrap_or(0.05);

    let p = derive_params(128, 2)?;
    let fam = FiberFamily::new(p);
    let dd = build_upper_ifs(&p)?;
    let q = invisible_attractor::geometry::region_box(&p, RegionId::Qplus)?;

    let e = entry_word(&fam)?;
    println!("entry word (11)^{}(00): Q+ -> {:?}", e.repeats, e.image);

    let cw = critical_word_for(&fam, &dd, &x, radius)?;
    println!("target {x:?}, radius {radius}: {:?} word of length {}", cw.method, cw.word.len());
    println!("  entry {} + greedy {} + tail {}", cw.entry_len, cw.greedy_len, cw.tail_len);
    println!("  certificate: {} (margin {:.3e})", cw.certificate.pass, cw.certificate.margin);

    let img: BoxN = apply_word_box(&fam, &cw.word, &q);
    println!("  f_w(Q+) is inside {img:?}");
    for start in [q.lo.clone(), q.hi.clone(), vec![0.2, 0.9]] {
        println!("  f_w({start:?}) = {:?}", apply_word(&fam, &cw.word, &start));
    }
    Ok(())
}
