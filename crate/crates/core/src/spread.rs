//! Exact r-spreadness testing and the spread-approximation decomposition.
//!
//! A pattern S (a partial permutation) is over-represented in F when
//! |F(S)| > r^-|S| |F|. All comparisons are done in the cross-multiplied
//! integer form a^|S| |F(S)| vs b^|S| |F| for r = a/b, so no rounding can
//! flip a verdict. Only subsets of members can violate (any other pattern
//! has |F(S)| = 0), which keeps enumeration at |F| * 2^n masks.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;

use crate::bounds::certify::q_enclosure;
use crate::bounds::enclosure::DEFAULT_PRECISION_CAP;
use crate::error::{Error, Result};
use crate::family::{PartialFamily, PartialPerm, PermFamily};

/// Default node budget for the exponential enumerations.
pub const DEFAULT_WORK_BUDGET: u64 = 50_000_000;

/// Identifier of the deterministic branch-selection rule, recorded in
/// decomposition reports: largest co-degree first, then smallest root, then
/// lexicographic cell order.
pub const SELECTION_RULE: &str = "max-codegree/min-size/lex";

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub limit: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            limit: DEFAULT_WORK_BUDGET,
        }
    }
}

struct Meter {
    spent: u64,
    limit: u64,
}

impl Meter {
    fn new(budget: &Budget) -> Self {
        Meter {
            spent: 0,
            limit: budget.limit,
        }
    }

    fn charge(&mut self, amount: u64) -> Result<()> {
        self.spent = self.spent.saturating_add(amount);
        if self.spent > self.limit {
            Err(Error::BudgetExceeded {
                spent: self.spent,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }
}

/// The size threshold for decomposition roots: either the default 4 log2 n,
/// compared through a certified enclosure, or an explicit rational.
#[derive(Debug, Clone)]
pub enum QCap {
    FourLogTwoN { n: u64 },
    Fixed(BigRational),
}

impl QCap {
    /// Is `size <= q`? Decided exactly; the enclosure of 4 log2 n is
    /// refined until it no longer straddles the integer.
    pub fn admits(&self, size: usize) -> Result<bool> {
        let s = BigRational::from_integer(size.into());
        match self {
            QCap::Fixed(q) => Ok(&s <= q),
            QCap::FourLogTwoN { n } => {
                let mut p = 32u32;
                loop {
                    let q = q_enclosure(*n, p)?;
                    match q.ge_rational(&s) {
                        Some(v) => return Ok(v),
                        None => {
                            if p >= DEFAULT_PRECISION_CAP {
                                return Err(Error::InvariantViolation(format!(
                                    "q-cap comparison against {size} undecided"
                                )));
                            }
                            p = (p * 2).min(DEFAULT_PRECISION_CAP);
                        }
                    }
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            QCap::FourLogTwoN { n } => format!("4*log2({n})"),
            QCap::Fixed(q) => q.to_string(),
        }
    }

    /// Endpoints of the threshold as exact fraction strings.
    pub fn endpoint_strings(&self) -> Result<(String, String)> {
        match self {
            QCap::Fixed(q) => Ok((q.to_string(), q.to_string())),
            QCap::FourLogTwoN { n } => {
                let e = q_enclosure(*n, 48)?;
                Ok(e.endpoint_strings())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpreadParams {
    pub r: BigRational,
    pub q_cap: QCap,
    pub n: usize,
}

impl SpreadParams {
    pub fn new(r: BigRational, n: usize) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
        }
        Ok(SpreadParams {
            r,
            q_cap: QCap::FourLogTwoN { n: n as u64 },
            n,
        })
    }

    pub fn with_q_cap(mut self, q_cap: QCap) -> Self {
        self.q_cap = q_cap;
        self
    }
}

/// A pattern violating the spread inequality: |F(S)| > r^-|S| |F|.
#[derive(Debug, Clone)]
pub struct SpreadWitness {
    pub set: PartialPerm,
    /// |F(S)|
    pub lhs: u64,
    /// r^-|S| |F| as an exact rational
    pub rhs: BigRational,
}

impl SpreadWitness {
    /// Violation ratio |F(S)| / (r^-|S| |F|) > 1.
    pub fn ratio(&self) -> BigRational {
        BigRational::from_integer(self.lhs.into()) / &self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct SpreadVerdict {
    pub spread: bool,
    pub witness: Option<SpreadWitness>,
}

fn r_parts(r: &BigRational) -> Result<(BigUint, BigUint)> {
    if !r.is_positive() {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    Ok((
        r.numer().magnitude().clone(),
        r.denom().magnitude().clone(),
    ))
}

/// Powers a^0..a^max.
fn power_table(base: &BigUint, max: usize) -> Vec<BigUint> {
    let mut t = Vec::with_capacity(max + 1);
    t.push(BigUint::from(1u32));
    for i in 1..=max {
        t.push(&t[i - 1] * base);
    }
    t
}

/// Co-degree of every distinct nonempty submask of the members: one pass of
/// submask enumeration, counting how many members contain each pattern.
fn submask_counts(masks: &[u128], meter: &mut Meter) -> Result<HashMap<u128, u64>> {
    let mut counts: HashMap<u128, u64> = HashMap::new();
    for &m in masks {
        let mut sub = m;
        while sub != 0 {
            meter.charge(1)?;
            *counts.entry(sub).or_insert(0) += 1;
            sub = (sub - 1) & m;
        }
    }
    Ok(counts)
}

/// Violating (mask, count) pairs for a mask family against r = a/b.
fn violations(
    masks: &[u128],
    degree: usize,
    r: &BigRational,
    meter: &mut Meter,
) -> Result<Vec<(u128, u64)>> {
    let (a, b) = r_parts(r)?;
    let max_size = degree;
    let a_pow = power_table(&a, max_size);
    let b_pow = power_table(&b, max_size);
    let total = BigUint::from(masks.len() as u64);
    let counts = submask_counts(masks, meter)?;
    let mut out = Vec::new();
    for (&mask, &cnt) in &counts {
        let s = mask.count_ones() as usize;
        if &a_pow[s] * BigUint::from(cnt) > &b_pow[s] * &total {
            out.push((mask, cnt));
        }
    }
    Ok(out)
}

fn witness_from(mask: u128, cnt: u64, degree: usize, r: &BigRational, total: u64) -> SpreadWitness {
    let s = mask.count_ones() as i32;
    let rhs = r.pow(-s) * BigRational::from_integer(total.into());
    SpreadWitness {
        set: PartialPerm::from_mask(degree, mask).expect("submask of a proper set is proper"),
        lhs: cnt,
        rhs,
    }
}

fn spread_verdict_masks(
    masks: &[u128],
    degree: usize,
    r: &BigRational,
    meter: &mut Meter,
) -> Result<SpreadVerdict> {
    if masks.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let viols = violations(masks, degree, r, meter)?;
    if viols.is_empty() {
        return Ok(SpreadVerdict {
            spread: true,
            witness: None,
        });
    }
    // max violation ratio, ties to smaller sets, then lexicographic cells
    let total = masks.len() as u64;
    let mut best: Option<(BigRational, PartialPerm, u64)> = None;
    for (mask, cnt) in viols {
        let w = witness_from(mask, cnt, degree, r, total);
        let ratio = w.ratio();
        let better = match &best {
            None => true,
            Some((br, bs, _)) => match ratio.cmp(br) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => w.set < *bs,
            },
        };
        if better {
            best = Some((ratio, w.set.clone(), w.lhs));
        }
    }
    let (_, set, lhs) = best.unwrap();
    let s = set.size() as i32;
    let rhs = r.pow(-s) * BigRational::from_integer(total.into());
    Ok(SpreadVerdict {
        spread: false,
        witness: Some(SpreadWitness { set, lhs, rhs }),
    })
}

/// Exact r-spreadness of a permutation family, with a maximal-violation
/// witness when it fails.
pub fn is_r_spread(f: &PermFamily, r: &BigRational) -> Result<SpreadVerdict> {
    is_r_spread_with_budget(f, r, &Budget::default())
}

pub fn is_r_spread_with_budget(
    f: &PermFamily,
    r: &BigRational,
    budget: &Budget,
) -> Result<SpreadVerdict> {
    let mut meter = Meter::new(budget);
    spread_verdict_masks(&f.masks(), f.degree(), r, &mut meter)
}

/// Same test for partial families (used on decomposition restrictions).
pub fn is_r_spread_partial(f: &PartialFamily, r: &BigRational) -> Result<SpreadVerdict> {
    let mut meter = Meter::new(&Budget::default());
    spread_verdict_masks(&f.masks(), f.degree(), r, &mut meter)
}

/// All patterns that are not r-spread in `f`: the nonempty subsets of
/// members violating the inequality.
pub fn non_spread_sets(f: &PermFamily, r: &BigRational, budget: &Budget) -> Result<PartialFamily> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut meter = Meter::new(budget);
    let viols = violations(&f.masks(), f.degree(), r, &mut meter)?;
    let members = viols
        .into_iter()
        .map(|(m, _)| PartialPerm::from_mask(f.degree(), m))
        .collect::<Result<Vec<_>>>()?;
    PartialFamily::new(f.degree(), members)
}

fn maximal_masks(mut viols: Vec<(u128, u64)>) -> Vec<(u128, u64)> {
    viols.sort_by_key(|(m, _)| std::cmp::Reverse(m.count_ones()));
    let mut kept: Vec<(u128, u64)> = Vec::new();
    for (m, c) in viols {
        if !kept.iter().any(|(k, _)| m & !k == 0 && *k != m) {
            kept.push((m, c));
        }
    }
    kept
}

/// The inclusion-maximal members of `non_spread_sets`.
pub fn maximal_non_spread(
    f: &PermFamily,
    r: &BigRational,
    budget: &Budget,
) -> Result<PartialFamily> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut meter = Meter::new(budget);
    let viols = violations(&f.masks(), f.degree(), r, &mut meter)?;
    let members = maximal_masks(viols)
        .into_iter()
        .map(|(m, _)| PartialPerm::from_mask(f.degree(), m))
        .collect::<Result<Vec<_>>>()?;
    PartialFamily::new(f.degree(), members)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    Exhausted,
    OversizeWitness(PartialPerm),
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub root: PartialPerm,
    pub family: PermFamily,
    /// Exact re-check that restriction(family, root) is r-spread.
    pub restriction_spread: bool,
}

#[derive(Debug, Clone)]
pub struct SpreadDecomposition {
    pub branches: Vec<Branch>,
    pub remainder: PermFamily,
    pub params: SpreadParams,
    pub stop_reason: StopReason,
    /// Warning flag: the procedure is well-defined either way, but the
    /// guarantees are stated for intersecting input.
    pub input_intersecting: bool,
    /// Reported, never asserted: whether the collected roots pairwise
    /// intersect. Guaranteed only far beyond desk scale.
    pub bases_intersecting: bool,
}

/// Iterative peeling: pick an inclusion-maximal non-spread pattern (largest
/// co-degree, then smallest, then lexicographically first), split off the
/// members containing it, and repeat until nothing violates or a violating
/// pattern exceeds the size cap.
pub fn spread_decompose(
    f: &PermFamily,
    params: &SpreadParams,
    budget: &Budget,
) -> Result<SpreadDecomposition> {
    if params.n != f.degree() {
        return Err(Error::DegreeMismatch {
            expected: f.degree(),
            found: params.n,
        });
    }
    let degree = f.degree();
    let mut meter = Meter::new(budget);
    let mut current: Vec<(usize, u128)> = f.masks().into_iter().enumerate().collect();
    let mut branches: Vec<Branch> = Vec::new();
    let stop_reason = loop {
        if current.is_empty() {
            break StopReason::Exhausted;
        }
        let masks: Vec<u128> = current.iter().map(|&(_, m)| m).collect();
        let viols = violations(&masks, degree, &params.r, &mut meter)?;
        if viols.is_empty() {
            break StopReason::Exhausted;
        }
        let maximal = maximal_masks(viols);
        let oversize: Option<PartialPerm> = {
            let mut worst: Option<PartialPerm> = None;
            for (m, _) in &maximal {
                if !params.q_cap.admits(m.count_ones() as usize)? {
                    let s = PartialPerm::from_mask(degree, *m)?;
                    if worst.as_ref().map_or(true, |w| s < *w) {
                        worst = Some(s);
                    }
                }
            }
            worst
        };
        if let Some(w) = oversize {
            break StopReason::OversizeWitness(w);
        }
        // selection: largest co-degree, then smallest set, then lexicographic
        let mut candidates: Vec<(u64, PartialPerm, u128)> = maximal
            .into_iter()
            .map(|(m, c)| Ok((c, PartialPerm::from_mask(degree, m)?, m)))
            .collect::<Result<Vec<_>>>()?;
        candidates.sort_by(|a, b| {
            b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1))
        });
        let (_, root, root_mask) = candidates.swap_remove(0);
        let (in_branch, rest): (Vec<_>, Vec<_>) =
            current.into_iter().partition(|&(_, m)| root_mask & !m == 0);
        current = rest;
        let branch_members: Vec<_> = in_branch
            .iter()
            .map(|&(i, _)| f.members()[i].clone())
            .collect();
        let family = PermFamily::new(degree, branch_members)?;
        // exact definitional re-check on the restriction
        let restricted: Vec<u128> = in_branch.iter().map(|&(_, m)| m & !root_mask).collect();
        let restriction_spread = if restricted.iter().all(|&m| m == 0) {
            true // root was a full member; nothing left to test
        } else {
            violations(&restricted, degree, &params.r, &mut meter)?.is_empty()
        };
        if !restriction_spread {
            return Err(Error::InvariantViolation(format!(
                "restriction past root {root} is not r-spread"
            )));
        }
        branches.push(Branch {
            root,
            family,
            restriction_spread,
        });
    };
    let remainder = PermFamily::new(
        degree,
        current.iter().map(|&(i, _)| f.members()[i].clone()),
    )?;
    let root_masks: Vec<u128> = branches.iter().map(|b| b.root.mask()).collect();
    let bases_intersecting = root_masks
        .iter()
        .enumerate()
        .all(|(i, a)| root_masks[i + 1..].iter().all(|b| a & b != 0));
    Ok(SpreadDecomposition {
        branches,
        remainder,
        params: params.clone(),
        stop_reason,
        input_intersecting: crate::family::is_intersecting(f),
        bases_intersecting,
    })
}

/// Definitional re-check of every decomposition invariant, written as a
/// plain quadratic scan so it is independent of the construction path.
pub fn verify_decomposition(input: &PermFamily, dec: &SpreadDecomposition) -> Result<()> {
    let fail = |msg: String| Err(Error::InvariantViolation(msg));
    // partition: branches + remainder = input, pairwise disjoint
    let mut seen: Vec<&crate::family::Permutation> = Vec::new();
    for b in &dec.branches {
        for m in b.family.iter() {
            seen.push(m);
        }
    }
    for m in dec.remainder.iter() {
        seen.push(m);
    }
    if seen.len() != input.len() {
        return fail(format!(
            "partition size mismatch: {} vs {}",
            seen.len(),
            input.len()
        ));
    }
    let mut sorted = seen.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != input.len() || !sorted.iter().all(|m| input.contains(m)) {
        return fail("branches and remainder do not partition the input".into());
    }
    for (i, b) in dec.branches.iter().enumerate() {
        // cover: every branch member contains the root
        for m in b.family.iter() {
            if !b.root.contained_in_perm(m) {
                return fail(format!("branch {i}: member does not contain root"));
            }
        }
        // root size within cap
        if !dec.params.q_cap.admits(b.root.size())? {
            return fail(format!("branch {i}: root exceeds the size cap"));
        }
        // restriction is r-spread: naive pairwise scan
        let restricted = crate::family::restriction(&b.family, &b.root)?;
        let masks = restricted.masks();
        if masks.iter().any(|&m| m != 0) {
            let verdict = {
                let mut meter = Meter::new(&Budget::default());
                spread_verdict_masks(&masks, input.degree(), &dec.params.r, &mut meter)?
            };
            if !verdict.spread {
                return fail(format!("branch {i}: restriction is not r-spread"));
            }
        }
    }
    Ok(())
}
