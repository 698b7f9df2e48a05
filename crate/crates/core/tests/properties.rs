//! Property suites over randomized families, with independent oracles.

mod common;

use common::*;
use num_rational::BigRational;
use permdiv_core::bounds::enclosure::{log2_enclosure, rat, rat_int};
use permdiv_core::bounds::{derangement_floor, DEFAULT_PRECISION_CAP};
use permdiv_core::family::{
    avoidance, co_degree, derangement_count, diversity, is_intersecting, is_intersecting_partial,
    make_star, span, Cell, PartialFamily, PartialPerm,
};
use permdiv_core::spread::{is_r_spread, Budget};
use permdiv_core::sunflower::{compress, find_pseudo_sunflower, minimal_members};
use permdiv_core::textio::{parse_family, serialize_family, ParsedFamily};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #[test]
    fn counting_identity(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng(seed);
        let f = random_perm_family(n, 40, &mut rng);
        for x in all_cells(n) {
            let single = PartialPerm::new(n, [x]).unwrap();
            let codeg = co_degree(&f, &single).unwrap();
            let avoid = avoidance(&f, x).len() as u64;
            prop_assert_eq!(f.len() as u64, codeg + avoid);
        }
    }

    #[test]
    fn diversity_is_complement_of_max_codegree(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng(seed);
        let f = random_perm_family(n, 40, &mut rng);
        let d = diversity(&f).unwrap();
        let max_codeg = d.codegree_table.values().max().copied().unwrap();
        prop_assert_eq!(d.gamma, f.len() as u64 - max_codeg);
        // the argmin cell attains gamma
        let bit_codeg = d.codegree_table[&d.argmin_cell];
        prop_assert_eq!(f.len() as u64 - bit_codeg, d.gamma);
    }

    #[test]
    fn intersecting_matches_pairwise_oracle(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng(seed);
        let f = random_perm_family(n, 200, &mut rng);
        prop_assert_eq!(is_intersecting(&f), intersecting_oracle(&f));
        let g = varied_intersecting_perm_family(n, 200, &mut rng);
        prop_assert_eq!(is_intersecting(&g), intersecting_oracle(&g));
        prop_assert!(intersecting_oracle(&g));
    }

    #[test]
    fn span_ignores_redundant_supersets(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = rng(seed);
        let mut members = Vec::new();
        for _ in 0..rng.gen_range(1..6usize) {
            members.push(random_partial_perm(n, rng.gen_range(1..=n.min(3)), &mut rng));
        }
        let b = PartialFamily::new(n, members).unwrap();
        let lhs = span(&minimal_members(&b), n).unwrap();
        let rhs = span(&b, n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn spread_monotone_in_r(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = rng(seed);
        let f = random_perm_family(n, 30, &mut rng);
        let num = rng.gen_range(1..=9i64);
        let den = rng.gen_range(1..=4i64);
        let r = rat(num, den);
        let r_half = &r * rat(1, 2);
        if is_r_spread(&f, &r).unwrap().spread {
            prop_assert!(is_r_spread(&f, &r_half).unwrap().spread);
        }
        // witnesses, when produced, are genuine violations
        if let Some(w) = is_r_spread(&f, &r).unwrap().witness {
            let cnt = co_degree(&f, &w.set).unwrap();
            prop_assert_eq!(cnt, w.lhs);
            prop_assert!(BigRational::from_integer(cnt.into()) > w.rhs);
        }
    }

    #[test]
    fn compress_preserves_intersecting_and_span(seed in any::<u64>(), n in 3usize..=6) {
        let mut rng = rng(seed);
        let s = 4usize;
        let h = random_intersecting_partial_family(n, s, &mut rng);
        let out = compress(&h, s, &Budget::default()).unwrap();
        // fixed point: re-detection finds nothing
        prop_assert!(find_pseudo_sunflower(&out, s, &Budget::default()).unwrap().is_none());
        // compression preserves the intersecting property
        prop_assert!(is_intersecting_partial(&h));
        prop_assert!(is_intersecting_partial(&out));
        // support: outputs under inputs, inputs over outputs
        for m in out.iter() {
            prop_assert!(h.iter().any(|t| m.is_subset_of(t)));
        }
        for t in h.iter() {
            prop_assert!(out.iter().any(|m| m.is_subset_of(t)));
        }
    }

    #[test]
    fn round_trip_perm_family(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = rng(seed);
        let f = random_perm_family(n, 30, &mut rng);
        let text = serialize_family(&ParsedFamily::Perms(f.clone()));
        let back = parse_family(&text).unwrap().into_perms().unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serialize_family(&ParsedFamily::Perms(back)), text);
    }

    #[test]
    fn round_trip_partial_family(seed in any::<u64>(), n in 3usize..=6) {
        let mut rng = rng(seed);
        let h = random_intersecting_partial_family(n, 3, &mut rng);
        let text = serialize_family(&ParsedFamily::Partials(h.clone()));
        let back = parse_family(&text).unwrap().into_partials().unwrap();
        prop_assert_eq!(&back, &h);
        prop_assert_eq!(serialize_family(&ParsedFamily::Partials(back)), text);
    }

    #[test]
    fn log2_contains_truth(num in 1i64..100_000, den in 1i64..100_000) {
        let x = rat(num, den);
        let enc = log2_enclosure(&x, 36).unwrap();
        let truth = (num as f64 / den as f64).log2();
        let lo = enc.lo().numer().to_string().parse::<f64>().unwrap()
            / enc.lo().denom().to_string().parse::<f64>().unwrap();
        let hi = enc.hi().numer().to_string().parse::<f64>().unwrap()
            / enc.hi().denom().to_string().parse::<f64>().unwrap();
        prop_assert!(lo - 1e-7 <= truth && truth <= hi + 1e-7);
        prop_assert!(enc.width() <= rat(1, 1 << 30));
    }
}

#[test]
fn star_family_properties_exhaustive() {
    for n in 1..=6usize {
        for x in all_cells(n) {
            let star = make_star(n, x).unwrap();
            assert_eq!(star.len() as u64, factorial_u64(n - 1).max(1));
            assert!(is_intersecting(&star));
            assert_eq!(diversity(&star).unwrap().gamma, 0);
        }
    }
}

#[test]
fn derangement_three_routes_agree() {
    // recurrence vs inclusion-exclusion vs certified floor identity
    let ie = |m: i64| -> i64 {
        let fact = |k: i64| (1..=k).product::<i64>().max(1);
        (0..=m).map(|k| (-1i64).pow(k as u32) * fact(m) / fact(k)).sum()
    };
    for m in 1..=20usize {
        let rec = derangement_count(m).unwrap();
        assert_eq!(rec as i64, ie(m as i64));
        let floor = derangement_floor(m, DEFAULT_PRECISION_CAP).unwrap();
        assert_eq!(floor, rec.into());
    }
}

#[test]
fn avoidance_on_triangle_matches_formula() {
    for (n, expect) in [(4u64, 1u64), (5, 4), (6, 18), (7, 96), (8, 600)] {
        let t = permdiv_core::family::make_triangle_family(n as usize).unwrap();
        let got = avoidance(&t, Cell::new(1, 1)).len() as u64;
        assert_eq!(got, expect, "n={n}");
    }
}

#[test]
fn enclosure_widths_halve_with_precision() {
    use permdiv_core::bounds::{entropy_enclosure, euler_enclosure};
    for p in [16u32, 32, 64, 128] {
        assert!(euler_enclosure(p).width() <= rat_int(1) / rat_big_pow2(p));
        let h = entropy_enclosure(&rat(1, 3), p).unwrap();
        assert!(h.width() <= rat_int(4) / rat_big_pow2(p));
    }
}

fn rat_big_pow2(p: u32) -> BigRational {
    let mut v = rat_int(1);
    for _ in 0..p {
        v = v * rat_int(2);
    }
    v
}

#[test]
fn nonspread_patterns_exist_up_to_n6() {
    // pigeonhole: some cell has co-degree >= |F|/n, and n^2 * |F|/n > |F|
    use permdiv_core::spread::{non_spread_sets, Budget};
    let mut r = rng(0xfac7_0021);
    for _ in 0..60 {
        let n = r.gen_range(2..=6usize);
        let f = varied_intersecting_perm_family(n, 60, &mut r);
        let ns = non_spread_sets(&f, &rat_int((n * n) as i64), &Budget::default()).unwrap();
        assert!(!ns.is_empty(), "n={n}, |F|={}", f.len());
    }
}

#[test]
fn entropy_and_sqrt_against_f64() {
    let to_f64 = |r: &BigRational| -> f64 {
        r.numer().to_string().parse::<f64>().unwrap() / r.denom().to_string().parse::<f64>().unwrap()
    };
    let mut r = rng(0xfac7_0022);
    for _ in 0..100 {
        let den = r.gen_range(3..2000i64);
        let num = r.gen_range(1..den);
        let d = rat(num, den);
        let enc = permdiv_core::bounds::entropy_enclosure(&d, 40).unwrap();
        let x = num as f64 / den as f64;
        let truth = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert!(
            to_f64(enc.lo()) - 1e-8 <= truth && truth <= to_f64(enc.hi()) + 1e-8,
            "H({num}/{den})"
        );

        let v = rat(r.gen_range(0..10_000), r.gen_range(1..100));
        let s = permdiv_core::bounds::sqrt_enclosure(&v, 40).unwrap();
        let truth = to_f64(&v).sqrt();
        assert!(to_f64(s.lo()) - 1e-8 <= truth && truth <= to_f64(s.hi()) + 1e-8);
    }
}

#[test]
fn certificates_stable_under_more_precision() {
    use permdiv_core::bounds::check_decomposition_bounds;
    for n in [500u64, 777] {
        let low = check_decomposition_bounds(n, 64).unwrap();
        let high = check_decomposition_bounds(n, 512).unwrap();
        for (a, b) in low.iter().zip(high.iter()) {
            assert_eq!(a.claim, b.claim);
            if a.verdict == permdiv_core::bounds::Verdict::Proved {
                assert_eq!(b.verdict, permdiv_core::bounds::Verdict::Proved, "{}", a.claim);
            }
        }
    }
}
