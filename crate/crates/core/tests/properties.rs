use invisible_attractor::fiber::SymbolVector;
use invisible_attractor::geometry::region_box;
use invisible_attractor::orbit::{apply_word, Orbit};
use invisible_attractor::perturb::make_perturbation;
use invisible_attractor::scalar::{g0, g0_inv};
use invisible_attractor::symbolic::{find_zero_runs, read_packed, read_text, sample_base, word_occurrences, write_packed, write_text};
use invisible_attractor::{derive_params, BaseSequence, BoxN, FiberFamily, RegionId, Word};
use proptest::prelude::*;

fn naive_zero_runs(letters: &[u32], coord: usize, runlen: usize) -> Vec<i64> {
    let mut out = Vec::new();
    if runlen == 0 || runlen > letters.len() {
        return out;
    }
    for end in runlen..=letters.len() {
        if letters[end - runlen..end].iter().all(|l| l >> (coord - 1) & 1 == 0) {
            out.push(end as i64);
        }
    }
    out
}

fn naive_occurrences(letters: &[u32], w: &[u32]) -> Vec<i64> {
    if w.is_empty() || w.len() > letters.len() {
        return Vec::new();
    }
    (0..=letters.len() - w.len()).filter(|&i| &letters[i..i + w.len()] == w).map(|i| i as i64).collect()
}

fn base_strategy() -> impl Strategy<Value = (usize, Vec<u32>)> {
    (2usize..=4).prop_flat_map(|k| {
        // small alphabets per coordinate so runs and repeats actually occur
        let letter = prop::collection::vec(prop::bool::weighted(0.3), k).prop_map(|bits| bits.iter().enumerate().map(|(i, &b)| (b as u32) << i).sum::<u32>());
        (Just(k), prop::collection::vec(letter, 0..200))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn zero_runs_match_naive_scan((k, letters) in base_strategy(), coord in 1usize..=4, runlen in 1usize..12) {
        let coord = coord.min(k);
        let b = BaseSequence::new(k, letters.clone());
        prop_assert_eq!(find_zero_runs(&b, coord, runlen), naive_zero_runs(&letters, coord, runlen));
    }

    #[test]
    fn occurrences_match_naive_scan((k, letters) in base_strategy(), w in prop::collection::vec(0u32..4, 0..5)) {
        let mask = (1u32 << k) - 1;
        let w: Vec<u32> = w.into_iter().map(|l| l & mask).collect();
        let b = BaseSequence::new(k, letters.clone());
        prop_assert_eq!(word_occurrences(&b, &Word::new(k, w.clone())), naive_occurrences(&letters, &w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn box_images_enclose_point_images(
        n in 11u32..80,
        bits in 0u32..4,
        lo in prop::array::uniform2(0.0f64..1.0),
        wid in prop::array::uniform2(0.0f64..0.5),
        u in prop::collection::vec(prop::array::uniform2(0.0f64..=1.0), 16),
        perturbed in any::<bool>(),
    ) {
        let p = derive_params(n, 2).unwrap();
        let fam = if perturbed {
            FiberFamily::perturbed(p, make_perturbation(&p, p.r / 2.0, n as u64).unwrap().spec)
        } else {
            FiberFamily::new(p)
        };
        let q = region_box(&p, RegionId::Qplus).unwrap();
        let b = BoxN::new(
            vec![q.lo[0] + lo[0] * q.width(0) * 0.5, q.lo[1] + lo[1] * q.width(1) * 0.5],
            vec![q.lo[0] + (lo[0] * 0.5 + wid[0]) * q.width(0), q.lo[1] + (lo[1] * 0.5 + wid[1]) * q.width(1)],
        );
        let img = fam.image_box(bits, &b);
        for t in &u {
            let x = b.lerp(t);
            let mut y = x.clone();
            fam.apply_in_place(bits, &mut y);
            prop_assert!(img.contains(&y), "{:?} -> {:?} not in {:?}", x, y, img);
        }
    }

    #[test]
    fn three_dimensional_maps_project_to_planar_ones(n in 11u32..64, bits in 0u32..8, x in prop::array::uniform3(-0.01f64..1.01)) {
        let f3 = FiberFamily::new(derive_params(n, 3).unwrap());
        let f2 = FiberFamily::new(derive_params(n, 2).unwrap());
        let mut y3 = x.to_vec();
        f3.apply_in_place(bits, &mut y3);
        // the special letter (1,1,0) couples x3 to x2 as (1,0) couples x2 to x1
        let special3 = SymbolVector::special(3).bits;
        let b2 = if bits == special3 { SymbolVector::special(2).bits } else { (bits >> 2 & 1) << 1 };
        let mut y2 = vec![x[1], x[2]];
        f2.apply_in_place(b2, &mut y2);
        prop_assert_eq!(y3[2], y2[1]);
        let mut first = vec![x[0], 0.5];
        f2.apply_in_place(bits & 1, &mut first);
        prop_assert_eq!(y3[0], first[0]);
    }

    #[test]
    fn g0_inverse_roundtrip(n in 11u32..200, y in -0.02f64..1.02) {
        let p = derive_params(n, 2).unwrap();
        let x = g0_inv(&p, g0(&p, y), 1e-14);
        prop_assert!((x - y).abs() <= 2e-12, "{} vs {}", x, y);
    }

    #[test]
    fn base_files_roundtrip((k, letters) in base_strategy()) {
        let b = BaseSequence::new(k, letters);
        let mut text = Vec::new();
        write_text(&b, &mut text).unwrap();
        prop_assert_eq!(read_text(k, text.as_slice()).unwrap(), b.clone());
        let mut packed = Vec::new();
        write_packed(&b, &mut packed).unwrap();
        prop_assert_eq!(read_packed(packed.as_slice()).unwrap(), b);
    }

    #[test]
    fn orbits_stay_in_qplus_and_chunking_is_invisible(seed in 0u64..1000, split in 1usize..999) {
        let p = derive_params(16, 2).unwrap();
        let fam = FiberFamily::new(p);
        let base = sample_base(seed, 1000, 2);
        let x0 = [0.3, 0.7];
        let mut a = Orbit::new(&fam, &x0, 10, &[RegionId::P]).unwrap();
        a.advance(&base.letters[..split], &mut ()).unwrap();
        a.advance(&base.letters[split..], &mut ()).unwrap();
        let whole = apply_word(&fam, &base.as_word(), &x0);
        prop_assert_eq!(&a.x, &whole);
        prop_assert!(region_box(&p, RegionId::Qplus).unwrap().contains(&whole));
    }
}

#[test]
fn sample_base_has_no_lag_one_correlation() {
    let k = 3;
    let b = sample_base(12345, 1_000_000, k);
    for c in 0..k {
        let x: Vec<f64> = b.letters.iter().map(|l| (l >> c & 1) as f64).collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        let cov = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
        let rho = cov / var;
        assert!(rho.abs() < 0.005, "coordinate {c}: lag-1 autocorrelation {rho}");
        assert!((mean - 0.5).abs() < 0.005, "coordinate {c}: mean {mean}");
    }
}

#[test]
fn zero_run_count_matches_stationary_statistics() {
    let b = sample_base(99, 10_000_000, 2);
    let hits = find_zero_runs(&b, 1, 9).len() as f64;
    // windows of 9 zeros: expected (L - 8) 2^-9; overlapping windows inflate the
    // variance by (1 + 2 sum_{j<9} 2^-j) ~ 3
    let expected: f64 = (10_000_000.0 - 8.0) / 512.0;
    let sigma = (expected * 3.0).sqrt();
    assert!((hits - expected).abs() <= 3.0 * sigma, "{hits} vs {expected} +- {sigma}");
}
