//! Random-suite generators shared by the integration tests.
#![allow(dead_code)]

use permdiv_core::family::{
    enumerate_symmetric_group, Cell, PartialFamily, PartialPerm, PermFamily, Permutation,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut images: Vec<u8> = (1..=n as u8).collect();
    images.shuffle(rng);
    Permutation::from_images(images).unwrap()
}

/// A random family of distinct permutations.
pub fn random_perm_family(n: usize, max_size: usize, rng: &mut ChaCha8Rng) -> PermFamily {
    let size = rng.gen_range(1..=max_size);
    let members: Vec<Permutation> = (0..size).map(|_| random_permutation(n, rng)).collect();
    PermFamily::new(n, members).unwrap()
}

/// A random intersecting family: greedy filter over random candidates, so
/// non-star shapes appear regularly.
pub fn random_intersecting_perm_family(
    n: usize,
    max_size: usize,
    rng: &mut ChaCha8Rng,
) -> PermFamily {
    let attempts = rng.gen_range(1..=2 * max_size.max(1));
    let mut kept: Vec<Permutation> = Vec::new();
    for _ in 0..attempts {
        if kept.len() >= max_size {
            break;
        }
        let cand = random_permutation(n, rng);
        let cm = cand.cell_mask();
        if kept.iter().all(|k| k.cell_mask() & cm != 0) {
            kept.push(cand);
        }
    }
    if kept.is_empty() {
        kept.push(random_permutation(n, rng));
    }
    PermFamily::new(n, kept).unwrap()
}

/// Every maximal intersecting family contains a star or similar; for broader
/// coverage this sometimes returns a full star or triangle-style family.
pub fn varied_intersecting_perm_family(
    n: usize,
    max_size: usize,
    rng: &mut ChaCha8Rng,
) -> PermFamily {
    match rng.gen_range(0..4) {
        0 => {
            let row = rng.gen_range(1..=n as u8);
            let col = rng.gen_range(1..=n as u8);
            let star = permdiv_core::family::make_star(n, Cell::new(row, col)).unwrap();
            let keep = rng.gen_range(1..=star.len());
            let mut members: Vec<Permutation> = star.members().to_vec();
            members.shuffle(rng);
            members.truncate(keep);
            PermFamily::new(n, members).unwrap()
        }
        1 if n >= 3 => {
            let t = permdiv_core::family::make_triangle_family(n).unwrap();
            let keep = rng.gen_range(1..=t.len());
            let mut members: Vec<Permutation> = t.members().to_vec();
            members.shuffle(rng);
            members.truncate(keep.min(max_size.max(1)));
            // a subfamily of an intersecting family is intersecting
            PermFamily::new(n, members).unwrap()
        }
        _ => random_intersecting_perm_family(n, max_size, rng),
    }
}

pub fn random_partial_perm(n: usize, size: usize, rng: &mut ChaCha8Rng) -> PartialPerm {
    let mut rows: Vec<u8> = (1..=n as u8).collect();
    let mut cols: Vec<u8> = (1..=n as u8).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    PartialPerm::new(
        n,
        rows.iter()
            .zip(cols.iter())
            .take(size)
            .map(|(&r, &c)| Cell::new(r, c)),
    )
    .unwrap()
}

/// A random intersecting family of partial permutations with member sizes in
/// 1..=max_size: occasionally a planted triangle, otherwise greedy keeping of
/// mutually intersecting random patterns.
pub fn random_intersecting_partial_family(
    n: usize,
    max_size: usize,
    rng: &mut ChaCha8Rng,
) -> PartialFamily {
    assert!(n >= 3 && max_size >= 1);
    let mut kept: Vec<PartialPerm> = Vec::new();
    if max_size >= 2 && rng.gen_range(0..5) == 0 {
        // plant a triangle on a random transversal a, b, c
        let base = random_partial_perm(n, 3, rng);
        let cells = base.cells();
        let (a, b, c) = (cells[0], cells[1], cells[2]);
        for pair in [[a, b], [a, c], [b, c]] {
            kept.push(PartialPerm::new(n, pair).unwrap());
        }
    } else {
        kept.push(random_partial_perm(n, rng.gen_range(1..=max_size), rng));
    }
    let attempts = rng.gen_range(0..12);
    for _ in 0..attempts {
        let cand = random_partial_perm(n, rng.gen_range(1..=max_size), rng);
        let cm = cand.mask();
        if kept.iter().all(|k| k.mask() & cm != 0) {
            kept.push(cand);
        }
    }
    PartialFamily::new(n, kept).unwrap()
}

/// Pairwise oracle for the intersecting property, written against one-line
/// notation rather than cell masks.
pub fn intersecting_oracle(f: &PermFamily) -> bool {
    let members = f.members();
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            let n = f.degree();
            let agree = (1..=n).any(|pos| a.image(pos) == b.image(pos));
            if !agree {
                return false;
            }
        }
    }
    true
}

/// Definitional spreadness oracle: enumerate subsets of members, count
/// containments by scanning, compare in exact rational arithmetic.
pub fn naive_is_spread(f: &PermFamily, r: &num_rational::BigRational) -> bool {
    let masks = f.masks();
    let total = num_rational::BigRational::from_integer((masks.len() as u64).into());
    for &m in &masks {
        let mut sub = m;
        while sub != 0 {
            let cnt = masks.iter().filter(|&&x| sub & !x == 0).count() as u64;
            let s = sub.count_ones() as i32;
            let bound = r.pow(-s) * &total;
            if num_rational::BigRational::from_integer(cnt.into()) > bound {
                return false;
            }
            sub = (sub - 1) & m;
        }
    }
    true
}

pub fn all_cells(n: usize) -> Vec<Cell> {
    (1..=n as u8)
        .flat_map(|r| (1..=n as u8).map(move |c| Cell::new(r, c)))
        .collect()
}

pub fn factorial_u64(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Sanity helper used by a few suites.
pub fn s_n(n: usize) -> PermFamily {
    enumerate_symmetric_group(n).unwrap()
}
