//! Desk-scale search for high-diversity intersecting families: exact
//! maximal-clique enumeration on the intersection graph for n <= 4,
//! seeded hill climbing for n = 5, 6, and the triangle-family audit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{
    diversity, enumerate_symmetric_group, is_intersecting, make_triangle_family, Cell, PermFamily,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_family: PermFamily,
    pub best_gamma: u64,
    pub mode: SearchMode,
    pub iterations: u64,
    pub seed: u64,
    /// gamma of the best family before the greedy maximality closure; the
    /// closure never lowers gamma, both values are reported.
    pub raw_gamma: u64,
    pub closed_gamma: u64,
}

/// Dense bitset adjacency over the vertex set of all n! permutations.
struct IntersectionGraph {
    masks: Vec<u128>,
    adj: Vec<Vec<u64>>,
    words: usize,
}

impl IntersectionGraph {
    fn build(family: &PermFamily) -> Self {
        let masks = family.masks();
        let v = masks.len();
        let words = v.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; v];
        for i in 0..v {
            for j in i + 1..v {
                if masks[i] & masks[j] != 0 {
                    adj[i][j / 64] |= 1u64 << (j % 64);
                    adj[j][i / 64] |= 1u64 << (i % 64);
                }
            }
        }
        IntersectionGraph { masks, adj, words }
    }

    fn vertex_count(&self) -> usize {
        self.masks.len()
    }
}

fn set_insert(set: &mut [u64], v: usize) {
    set[v / 64] |= 1u64 << (v % 64);
}

fn set_remove(set: &mut [u64], v: usize) {
    set[v / 64] &= !(1u64 << (v % 64));
}

fn set_is_empty(set: &[u64]) -> bool {
    set.iter().all(|&w| w == 0)
}

fn set_iter(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut word = word;
        std::iter::from_fn(move || {
            if word == 0 {
                None
            } else {
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            }
        })
    })
}

fn set_and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn set_count(set: &[u64]) -> u32 {
    set.iter().map(|w| w.count_ones()).sum()
}

/// gamma of the family given by vertex indices, straight from the masks.
fn gamma_of(graph: &IntersectionGraph, members: &[usize], n: usize) -> u64 {
    let mut best = u64::MAX;
    for bit in 0..(n * n) as u32 {
        let cell = 1u128 << bit;
        let avoid = members
            .iter()
            .filter(|&&i| graph.masks[i] & cell == 0)
            .count() as u64;
        best = best.min(avoid);
    }
    best
}

/// Greedy maximality closure in canonical vertex order.
fn close_family(graph: &IntersectionGraph, members: &[usize]) -> Vec<usize> {
    let words = graph.words;
    let mut compatible = vec![!0u64; words];
    let v = graph.vertex_count();
    // trim tail bits
    if v % 64 != 0 {
        compatible[words - 1] = (1u64 << (v % 64)) - 1;
    }
    for &m in members {
        compatible = set_and(&compatible, &graph.adj[m]);
    }
    let mut out: Vec<usize> = members.to_vec();
    loop {
        let Some(next) = set_iter(&compatible).find(|c| !out.contains(c)) else {
            break;
        };
        out.push(next);
        compatible = set_and(&compatible, &graph.adj[next]);
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn family_from_indices(all: &PermFamily, members: &[usize]) -> PermFamily {
    PermFamily::new(
        all.degree(),
        members.iter().map(|&i| all.members()[i].clone()),
    )
    .expect("degrees agree")
}

/// Measure a candidate: gamma of the raw family and of its closure; the
/// reported family is whichever attains the larger value (the closure, on
/// ties, since it is never worse).
fn measure(
    graph: &IntersectionGraph,
    all: &PermFamily,
    members: &[usize],
) -> (PermFamily, u64, u64, u64) {
    let n = all.degree();
    let raw_gamma = if members.is_empty() {
        0
    } else {
        gamma_of(graph, members, n)
    };
    let closed = close_family(graph, members);
    let closed_gamma = if closed.is_empty() {
        0
    } else {
        gamma_of(graph, &closed, n)
    };
    let fam = if closed_gamma >= raw_gamma {
        family_from_indices(all, &closed)
    } else {
        family_from_indices(all, members)
    };
    (fam, raw_gamma.max(closed_gamma), raw_gamma, closed_gamma)
}

/// All maximal cliques via pivoting Bron-Kerbosch.
fn bron_kerbosch_pivot(
    graph: &IntersectionGraph,
    r: &mut Vec<usize>,
    p: Vec<u64>,
    x: Vec<u64>,
    out: &mut impl FnMut(&[usize]),
) {
    if set_is_empty(&p) && set_is_empty(&x) {
        out(r);
        return;
    }
    // pivot: vertex of P union X with the most neighbours in P
    let pivot = set_iter(&p)
        .chain(set_iter(&x))
        .max_by_key(|&u| set_count(&set_and(&p, &graph.adj[u])))
        .unwrap();
    let candidates: Vec<usize> = {
        let mut without = p.clone();
        for w in 0..without.len() {
            without[w] &= !graph.adj[pivot][w];
        }
        set_iter(&without).collect()
    };
    let mut p = p;
    let mut x = x;
    for v in candidates {
        let np = set_and(&p, &graph.adj[v]);
        let nx = set_and(&x, &graph.adj[v]);
        r.push(v);
        bron_kerbosch_pivot(graph, r, np, nx, out);
        r.pop();
        set_remove(&mut p, v);
        set_insert(&mut x, v);
    }
}

/// All maximal cliques without pivoting: an independent second algorithm
/// kept for cross-checking the exact search.
fn bron_kerbosch_plain(
    graph: &IntersectionGraph,
    r: &mut Vec<usize>,
    p: Vec<u64>,
    x: Vec<u64>,
    out: &mut impl FnMut(&[usize]),
) {
    if set_is_empty(&p) && set_is_empty(&x) {
        out(r);
        return;
    }
    let candidates: Vec<usize> = set_iter(&p).collect();
    let mut p = p;
    let mut x = x;
    for v in candidates {
        let np = set_and(&p, &graph.adj[v]);
        let nx = set_and(&x, &graph.adj[v]);
        r.push(v);
        bron_kerbosch_plain(graph, r, np, nx, out);
        r.pop();
        set_remove(&mut p, v);
        set_insert(&mut x, v);
    }
}

fn full_vertex_set(graph: &IntersectionGraph) -> Vec<u64> {
    let v = graph.vertex_count();
    let mut p = vec![!0u64; graph.words];
    if v % 64 != 0 {
        p[graph.words - 1] = (1u64 << (v % 64)) - 1;
    }
    p
}

fn exact_search_with(
    n: usize,
    plain: bool,
) -> Result<SearchResult> {
    if !(2..=4).contains(&n) {
        return Err(Error::DegreeOutOfRange { n, max: 4 });
    }
    let all = enumerate_symmetric_group(n)?;
    let graph = IntersectionGraph::build(&all);
    let p = full_vertex_set(&graph);
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut cliques = 0u64;
    {
        let mut visit = |clique: &[usize]| {
            cliques += 1;
            let g = gamma_of(&graph, clique, n);
            if best.as_ref().map_or(true, |(bg, _)| g > *bg) {
                best = Some((g, clique.to_vec()));
            }
        };
        let mut r = Vec::new();
        if plain {
            bron_kerbosch_plain(&graph, &mut r, p, vec![0; graph.words], &mut visit);
        } else {
            bron_kerbosch_pivot(&graph, &mut r, p, vec![0; graph.words], &mut visit);
        }
    }
    let (best_gamma, members) = best.ok_or(Error::EmptyFamily)?;
    let best_family = family_from_indices(&all, &members);
    Ok(SearchResult {
        best_family,
        best_gamma,
        mode: SearchMode::Exact,
        iterations: cliques,
        seed: 0,
        raw_gamma: best_gamma,
        closed_gamma: best_gamma,
    })
}

/// Maximum diversity over all intersecting families, exactly: gamma is
/// monotone under adding members, so the maximum is attained at a maximal
/// clique of the intersection graph, and those are enumerated exhaustively.
pub fn exact_max_diversity(n: usize) -> Result<SearchResult> {
    exact_search_with(n, false)
}

/// Second algorithm for the same quantity (non-pivoting enumeration).
pub fn exact_max_diversity_second_algorithm(n: usize) -> Result<SearchResult> {
    exact_search_with(n, true)
}

/// Brute-force oracle over every subset of S_n; only feasible for n <= 3.
pub fn exact_max_diversity_subset_oracle(n: usize) -> Result<u64> {
    if !(2..=3).contains(&n) {
        return Err(Error::DegreeOutOfRange { n, max: 3 });
    }
    let all = enumerate_symmetric_group(n)?;
    let graph = IntersectionGraph::build(&all);
    let v = graph.vertex_count();
    let mut best = 0u64;
    for pick in 1u32..(1u32 << v) {
        let members: Vec<usize> = (0..v).filter(|&i| pick >> i & 1 == 1).collect();
        let ok = members.iter().enumerate().all(|(a, &i)| {
            members[a + 1..]
                .iter()
                .all(|&j| graph.masks[i] & graph.masks[j] != 0)
        });
        if ok {
            best = best.max(gamma_of(&graph, &members, n));
        }
    }
    Ok(best)
}

const SIDEWAYS_CAP: u32 = 50;
const CLIMB_MOVE_CAP: u32 = 400;

fn triangle_indices(all: &PermFamily, n: usize) -> Result<Vec<usize>> {
    let t = make_triangle_family(n)?;
    Ok(all
        .members()
        .iter()
        .enumerate()
        .filter(|(_, p)| t.contains(p))
        .map(|(i, _)| i)
        .collect())
}

fn climb(
    graph: &IntersectionGraph,
    all: &PermFamily,
    start: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> (u64, Vec<usize>) {
    let n = all.degree();
    let mut current = close_family(graph, &start);
    let mut current_gamma = if current.is_empty() {
        0
    } else {
        gamma_of(graph, &current, n)
    };
    let mut sideways = 0u32;
    for _ in 0..CLIMB_MOVE_CAP {
        // swap move: drop one member, re-close greedily from a shuffled seed
        if current.is_empty() {
            break;
        }
        let drop_at = rng.gen_range(0..current.len());
        let mut candidate: Vec<usize> = current
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != drop_at)
            .map(|(_, &v)| v)
            .collect();
        // occasionally drop a second member to escape plateaus
        if candidate.len() > 2 && rng.gen_range(0..4) == 0 {
            candidate.remove(rng.gen_range(0..candidate.len()));
        }
        let closed = close_family(graph, &candidate);
        let g = if closed.is_empty() {
            0
        } else {
            gamma_of(graph, &closed, n)
        };
        if g > current_gamma {
            current = closed;
            current_gamma = g;
            sideways = 0;
        } else if g == current_gamma {
            sideways += 1;
            if sideways > SIDEWAYS_CAP {
                break;
            }
            current = closed;
        }
    }
    (current_gamma, current)
}

/// Seeded hill climbing over intersecting families. The triangle family is
/// always evaluated first, so the result is never below its diversity;
/// restarts beyond it are 10% triangle-seeded and 90% random
/// star-with-perturbation, run in parallel with a deterministic reduction.
pub fn local_search_max_diversity(n: usize, iterations: u64, seed: u64) -> Result<SearchResult> {
    if !(4..=6).contains(&n) {
        return Err(Error::DegreeOutOfRange { n, max: 6 });
    }
    let all = enumerate_symmetric_group(n)?;
    let graph = IntersectionGraph::build(&all);
    let tri = triangle_indices(&all, n)?;

    let (seed_family, seed_gamma, seed_raw, seed_closed) = measure(&graph, &all, &tri);
    let mut best = (seed_gamma, seed_family, seed_raw, seed_closed);

    let restarts: Vec<(u64, u64, Vec<usize>)> = (0..iterations)
        .into_par_iter()
        .map(|it| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(it + 1);
            let start: Vec<usize> = if it % 10 == 0 {
                tri.clone()
            } else {
                // a random star, with a few random members dropped
                let row = rng.gen_range(1..=n as u8);
                let col = rng.gen_range(1..=n as u8);
                let cell_bit = 1u128 << Cell::new(row, col).bit(n);
                let mut star: Vec<usize> = graph
                    .masks
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| *m & cell_bit != 0)
                    .map(|(i, _)| i)
                    .collect();
                for _ in 0..rng.gen_range(1..=star.len() / 2) {
                    star.remove(rng.gen_range(0..star.len()));
                }
                star
            };
            let (g, members) = climb(&graph, &all, start, &mut rng);
            (it, g, members)
        })
        .collect();
    // deterministic reduction: strict improvement in restart order, so the
    // triangle seed and then the earliest best restart win ties
    for (_it, g, members) in restarts {
        if g > best.0 {
            let (fam, gamma, raw, closed) = measure(&graph, &all, &members);
            if gamma > best.0 {
                best = (gamma, fam, raw, closed);
            }
        }
    }
    let (best_gamma, best_family, raw_gamma, closed_gamma) = best;
    Ok(SearchResult {
        best_family,
        best_gamma,
        mode: SearchMode::Heuristic,
        iterations,
        seed,
        raw_gamma,
        closed_gamma,
    })
}

#[derive(Debug, Clone)]
pub struct TriangleAudit {
    pub n: usize,
    pub size: u64,
    pub intersecting: bool,
    pub gamma: u64,
    pub expected_gamma: u64,
    /// All cells attaining the minimum avoidance count.
    pub min_cells: Vec<Cell>,
}

fn factorial_u64(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Enumerate the triangle family and confirm by counting that it is
/// intersecting with diversity exactly (n-3)(n-3)!.
pub fn verify_triangle_extremal(n: usize) -> Result<TriangleAudit> {
    if !(4..=8).contains(&n) {
        return Err(Error::DegreeOutOfRange { n, max: 8 });
    }
    let t = make_triangle_family(n)?;
    let intersecting = is_intersecting(&t);
    let report = diversity(&t)?;
    let expected = (n as u64 - 3) * factorial_u64(n - 3);
    let total = t.len() as u64;
    let min_cells: Vec<Cell> = report
        .codegree_table
        .iter()
        .filter(|&(_, &codeg)| total - codeg == report.gamma)
        .map(|(&cell, _)| cell)
        .collect();
    if !intersecting || report.gamma != expected {
        return Err(Error::InvariantViolation(format!(
            "triangle family audit failed at n={n}: gamma {} expected {expected}",
            report.gamma
        )));
    }
    Ok(TriangleAudit {
        n,
        size: total,
        intersecting,
        gamma: report.gamma,
        expected_gamma: expected,
        min_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_n2_is_zero() {
        let r = exact_max_diversity(2).unwrap();
        assert_eq!(r.best_gamma, 0);
        assert!(is_intersecting(&r.best_family));
    }

    #[test]
    fn exact_n3_matches_subset_oracle() {
        let r = exact_max_diversity(3).unwrap();
        let oracle = exact_max_diversity_subset_oracle(3).unwrap();
        assert_eq!(r.best_gamma, oracle);
        assert!(is_intersecting(&r.best_family));
        assert_eq!(diversity(&r.best_family).unwrap().gamma, r.best_gamma);
    }

    #[test]
    fn exact_n4_cross_checked() {
        let a = exact_max_diversity(4).unwrap();
        let b = exact_max_diversity_second_algorithm(4).unwrap();
        assert_eq!(a.best_gamma, b.best_gamma);
        // the triangle family witnesses gamma >= 1
        assert!(a.best_gamma >= 1);
        assert!(is_intersecting(&a.best_family));
    }

    #[test]
    fn exact_range_guard() {
        assert!(exact_max_diversity(5).is_err());
        assert!(exact_max_diversity(1).is_err());
    }

    #[test]
    fn heuristic_seeded_by_triangle() {
        for n in 4..=5 {
            let r = local_search_max_diversity(n, 0, 7).unwrap();
            let lower = (n as u64 - 3) * factorial_u64(n - 3);
            assert!(r.best_gamma >= lower, "n={n}");
            assert!(is_intersecting(&r.best_family));
            assert_eq!(diversity(&r.best_family).unwrap().gamma, r.best_gamma);
        }
    }

    #[test]
    fn heuristic_deterministic() {
        let a = local_search_max_diversity(5, 12, 99).unwrap();
        let b = local_search_max_diversity(5, 12, 99).unwrap();
        assert_eq!(a.best_gamma, b.best_gamma);
        assert_eq!(a.best_family, b.best_family);
    }

    #[test]
    fn heuristic_monotone_in_iterations() {
        let a = local_search_max_diversity(5, 4, 123).unwrap();
        let b = local_search_max_diversity(5, 16, 123).unwrap();
        assert!(b.best_gamma >= a.best_gamma);
    }

    #[test]
    fn triangle_audit_small() {
        let a = verify_triangle_extremal(4).unwrap();
        assert_eq!(a.gamma, 1);
        let a = verify_triangle_extremal(5).unwrap();
        assert_eq!(a.gamma, 4);
        assert_eq!(
            a.min_cells,
            vec![Cell::new(1, 1), Cell::new(2, 2), Cell::new(3, 3)]
        );
    }
}
