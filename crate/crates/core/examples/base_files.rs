//! Crafted bases: splice words and zero runs into a random background,
//! scan them, and round-trip the text and packed formats.
//!
//! cargo run --example base_files

use invisible_attractor::symbolic::{craft_base, find_zero_runs, read_packed, read_text, word_occurrences, write_packed, write_text, Background, CraftSpec, Insertion, InsertionKind};
use invisible_attractor::Word;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = Word::new(2, vec![3, 3, 0]);
    let spec = CraftSpec {
        k: 2,
        length: 10_000,
        background: Background::Random(4),
        insertions: vec![
            Insertion { position: 100, kind: InsertionKind::Word(w.clone()) },
            Insertion { position: 5_000, kind: InsertionKind::ZeroRun { coord: 2, len: 256 } },
        ],
    };
    let b = craft_base(&spec)?;
    let occ = word_occurrences(&b, &w);
    println!("{} occurrences of {:?}, first at {:?}", occ.len(), w.letters, occ.first());
    let runs = find_zero_runs(&b, 2, 256);
    println!("{} windows of 256 zeros in coordinate 2, first ending at {:?}", runs.len(), runs.first());

    let mut text = Vec::new();
    write_text(&b, &mut text)?;
    let mut packed = Vec::new();
    write_packed(&b, &mut packed)?;
    println!("text {} bytes, packed {} bytes", text.len(), packed.len());
    assert_eq!(read_text(2, text.as_slice())?, b);
    assert_eq!(read_packed(packed.as_slice())?, b);
    println!("both formats round-trip");
    Ok(())
}
