//! Base sequences over the alphabet `{0,1}^k`: sampling, crafting, scanning and I/O.

use std::io::{BufRead, Read, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::SymbolVector;

/// A finite word; letters are symbol bitmasks (bit `i` = coordinate `i + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub k: usize,
    pub letters: Vec<u32>,
}

impl Word {
    pub fn new(k: usize, letters: Vec<u32>) -> Self {
        Word { k, letters }
    }

    pub fn empty(k: usize) -> Self {
        Word { k, letters: Vec::new() }
    }

    pub fn from_symbols(k: usize, syms: &[SymbolVector]) -> Self {
        Word { k, letters: syms.iter().map(|s| s.bits).collect() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, bits: u32) {
        self.letters.push(bits);
    }

    pub fn extend(&mut self, other: &Word) {
        self.letters.extend_from_slice(&other.letters);
    }

    pub fn concat(parts: &[&Word]) -> Word {
        let k = parts.first().map(|w| w.k).unwrap_or(2);
        let mut out = Word::empty(k);
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn repeat(k: usize, bits: u32, times: usize) -> Word {
        Word { k, letters: vec![bits; times] }
    }

    /// Text form: one letter per line, coordinate 1 first.
    pub fn to_text(&self) -> String {
        letters_to_text(self.k, &self.letters)
    }

    pub fn from_text(k: usize, text: &str) -> Result<Word> {
        Ok(Word { k, letters: parse_text_letters(k, text.as_bytes())? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSequence {
    pub k: usize,
    /// Absolute time of `letters[0]`.
    pub origin: i64,
    pub letters: Vec<u32>,
}

impl BaseSequence {
    pub fn new(k: usize, letters: Vec<u32>) -> Self {
        BaseSequence { k, origin: 0, letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn as_word(&self) -> Word {
        Word { k: self.k, letters: self.letters.clone() }
    }
}

/// Endless stream of i.i.d. uniform letters.
///
/// Each letter is one `next_u32` of a ChaCha8 generator masked to its low `k` bits;
/// the stream index selects an independent ChaCha stream for the same seed.
pub struct BernoulliSource {
    rng: ChaCha8Rng,
    mask: u32,
}

impl BernoulliSource {
    pub fn new(seed: u64, stream: u64, k: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        BernoulliSource { rng, mask: ((1u64 << k) - 1) as u32 }
    }

    #[inline]
    pub fn next_letter(&mut self) -> u32 {
        self.rng.next_u32() & self.mask
    }

    pub fn fill(&mut self, buf: &mut [u32]) {
        for b in buf {
            *b = self.next_letter();
        }
    }
}

pub fn sample_base(seed: u64, length: usize, k: usize) -> BaseSequence {
    sample_base_stream(seed, 0, length, k)
}

pub fn sample_base_stream(seed: u64, stream: u64, length: usize, k: usize) -> BaseSequence {
    let mut src = BernoulliSource::new(seed, stream, k);
    let mut letters = vec![0; length];
    src.fill(&mut letters);
    BaseSequence::new(k, letters)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Background {
    Random(u64),
    AllZero,
    AllOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InsertionKind {
    Word(Word),
    /// Run of zeros in coordinate `coord` (1-based); other coordinates keep the background.
    ZeroRun { coord: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    pub position: usize,
    pub kind: InsertionKind,
}

impl Insertion {
    fn len(&self) -> usize {
        match &self.kind {
            InsertionKind::Word(w) => w.len(),
            InsertionKind::ZeroRun { len, .. } => *len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CraftSpec {
    pub k: usize,
    pub length: usize,
    pub background: Background,
    pub insertions: Vec<Insertion>,
}

pub fn craft_base(spec: &CraftSpec) -> Result<BaseSequence> {
    let k = spec.k;
    let full = ((1u64 << k) - 1) as u32;
    let mut letters = match spec.background {
        Background::Random(seed) => sample_base(seed, spec.length, k).letters,
        Background::AllZero => vec![0; spec.length],
        Background::AllOne => vec![full; spec.length],
    };
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for ins in &spec.insertions {
        let len = ins.len();
        if ins.position + len > spec.length {
            return Err(Error::OutOfBounds { position: ins.position, len, length: spec.length });
        }
        spans.push((ins.position, ins.position + len));
    }
    spans.sort_unstable();
    for w in spans.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::Overlap(w[1].0));
        }
    }
    for ins in &spec.insertions {
        match &ins.kind {
            InsertionKind::Word(w) => letters[ins.position..ins.position + w.len()].copy_from_slice(&w.letters),
            InsertionKind::ZeroRun { coord, len } => {
                let clear = !(1u32 << (coord - 1));
                for l in &mut letters[ins.position..ins.position + len] {
                    *l &= clear;
                }
            }
        }
    }
    Ok(BaseSequence::new(k, letters))
}

/// End positions (exclusive, absolute) of every window of `runlen` letters
/// whose coordinate `coord` (1-based) is zero.
pub fn find_zero_runs(b: &BaseSequence, coord: usize, runlen: usize) -> Vec<i64> {
    let bit = 1u32 << (coord - 1);
    let mut out = Vec::new();
    let mut run = 0usize;
    for (t, &l) in b.letters.iter().enumerate() {
        if l & bit == 0 {
            run += 1;
        } else {
            run = 0;
        }
        if run >= runlen {
            out.push(b.origin + t as i64 + 1);
        }
    }
    out
}

/// Start positions (absolute) of every occurrence of `w`, overlaps included.
pub fn word_occurrences(b: &BaseSequence, w: &Word) -> Vec<i64> {
    let pat = &w.letters;
    let m = pat.len();
    if m == 0 || m > b.len() {
        return Vec::new();
    }
    // Knuth-Morris-Pratt
    let mut fail = vec![0usize; m];
    let mut j = 0;
    for i in 1..m {
        while j > 0 && pat[i] != pat[j] {
            j = fail[j - 1];
        }
        if pat[i] == pat[j] {
            j += 1;
        }
        fail[i] = j;
    }
    let mut out = Vec::new();
    j = 0;
    for (i, &c) in b.letters.iter().enumerate() {
        while j > 0 && c != pat[j] {
            j = fail[j - 1];
        }
        if c == pat[j] {
            j += 1;
        }
        if j == m {
            out.push(b.origin + (i + 1 - m) as i64);
            j = fail[j - 1];
        }
    }
    out
}

fn letters_to_text(k: usize, letters: &[u32]) -> String {
    let mut s = String::with_capacity(letters.len() * (k + 1));
    for &l in letters {
        for i in 0..k {
            s.push(if l >> i & 1 == 1 { '1' } else { '0' });
        }
        s.push('\n');
    }
    s
}

fn parse_text_letters(k: usize, r: impl BufRead) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.len() != k {
            return Err(Error::Parse(format!("line {}: expected {k} symbols, got {line:?}", lineno + 1)));
        }
        let mut bits = 0u32;
        for (i, c) in line.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("line {}: bad character {c:?}", lineno + 1))),
            }
        }
        out.push(bits);
    }
    Ok(out)
}

pub fn write_text(b: &BaseSequence, mut w: impl Write) -> Result<()> {
    w.write_all(letters_to_text(b.k, &b.letters).as_bytes())?;
    Ok(())
}

pub fn read_text(k: usize, r: impl Read) -> Result<BaseSequence> {
    Ok(BaseSequence::new(k, parse_text_letters(k, std::io::BufReader::new(r))?))
}

const MAGIC: &[u8; 4] = b"SKB1";

/// Packed form: magic `SKB1`, `k` as one byte, letter count as `u64` little-endian,
/// then the letters as a bit stream, `k` bits per letter, least significant bit first.
pub fn write_packed(b: &BaseSequence, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[b.k as u8])?;
    w.write_all(&(b.letters.len() as u64).to_le_bytes())?;
    let nbits = b.letters.len() * b.k;
    let mut bytes = vec![0u8; nbits.div_ceil(8)];
    for (t, &l) in b.letters.iter().enumerate() {
        for j in 0..b.k {
            if l >> j & 1 == 1 {
                let bit = t * b.k + j;
                bytes[bit / 8] |= 1 << (bit % 8);
            }
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_packed(mut r: impl Read) -> Result<BaseSequence> {
    let mut head = [0u8; 13];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Parse("not a packed base file".into()));
    }
    let k = head[4] as usize;
    if !(2..=crate::params::MAX_K).contains(&k) {
        return Err(Error::InvalidK(k));
    }
    let len = u64::from_le_bytes(head[5..13].try_into().expect("8 bytes")) as usize;
    let mut bytes = vec![0u8; (len * k).div_ceil(8)];
    r.read_exact(&mut bytes)?;
    let letters = (0..len)
        .map(|t| (0..k).fold(0u32, |acc, j| {
            let bit = t * k + j;
            acc | (((bytes[bit / 8] >> (bit % 8)) & 1) as u32) << j
        }))
        .collect();
    Ok(BaseSequence::new(k, letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_occurrences(b: &[u32], w: &[u32]) -> Vec<i64> {
        (0..b.len().saturating_sub(w.len() - 1)).filter(|&p| b[p..p + w.len()] == *w).map(|p| p as i64).collect()
    }

    #[test]
    fn overlapping_occurrences() {
        let b = BaseSequence::new(2, vec![3, 3, 3, 0, 3, 3]);
        let w = Word::new(2, vec![3, 3]);
        assert_eq!(word_occurrences(&b, &w), vec![0, 1, 4]);
        let b2 = sample_base(5, 5000, 2);
        let w2 = Word::new(2, vec![1, 1, 0]);
        assert_eq!(word_occurrences(&b2, &w2), naive_occurrences(&b2.letters, &w2.letters));
    }

    #[test]
    fn zero_runs() {
        let b = BaseSequence::new(2, vec![1, 0, 0, 2, 0, 0, 0]);
        // coordinate 1 is bit 0
        assert_eq!(find_zero_runs(&b, 1, 2), vec![3, 4, 5, 6, 7]);
        assert_eq!(find_zero_runs(&b, 2, 3), vec![3, 7]);
    }

    #[test]
    fn craft_rejects_overlap() {
        let spec = CraftSpec {
            k: 2,
            length: 10,
            background: Background::AllOne,
            insertions: vec![
                Insertion { position: 2, kind: InsertionKind::ZeroRun { coord: 2, len: 4 } },
                Insertion { position: 5, kind: InsertionKind::Word(Word::new(2, vec![0])) },
            ],
        };
        assert!(matches!(craft_base(&spec), Err(Error::Overlap(5))));
        let mut ok = spec.clone();
        ok.insertions[1].position = 6;
        let b = craft_base(&ok).unwrap();
        assert_eq!(b.letters, vec![3, 3, 1, 1, 1, 1, 0, 3, 3, 3]);
    }

    #[test]
    fn text_and_packed_roundtrip() {
        let b = sample_base(11, 1001, 3);
        let mut t = Vec::new();
        write_text(&b, &mut t).unwrap();
        assert_eq!(read_text(3, &t[..]).unwrap(), b);
        let mut pk = Vec::new();
        write_packed(&b, &mut pk).unwrap();
        assert_eq!(pk.len(), 13 + (1001 * 3usize).div_ceil(8));
        assert_eq!(read_packed(&pk[..]).unwrap(), b);
    }

    #[test]
    fn streams_are_reproducible() {
        assert_eq!(sample_base(1, 100, 2), sample_base(1, 100, 2));
        assert_ne!(sample_base_stream(1, 0, 100, 2), sample_base_stream(1, 1, 100, 2));
    }
}
