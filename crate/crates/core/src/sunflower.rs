//! Pseudo-sunflower detection, the compression procedure, the basis
//! cascade, and classification of the 2-uniform residue.
//!
//! Sets F0..Fs form a pseudo sunflower of size s+1 with center C when
//! C is a strict subset of F0 and the differences F0\C, ..., Fs\C are
//! pairwise disjoint. Compression repeatedly replaces everything containing
//! a detected center by the center itself; each step strictly shrinks the
//! total cell count, so it terminates.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::family::{Cell, PartialFamily, PartialPerm};
use crate::spread::Budget;

/// Identifier of the deterministic detection rule, recorded in reports:
/// petal holders and petals are explored in canonical (size, cells) order,
/// centers by (size, cells) within the holder, first hit wins, which makes
/// the returned center inclusion-minimal for its holder.
pub const DETECTION_RULE: &str = "canonical-order/minimal-center";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoSunflower {
    pub center: PartialPerm,
    pub petal0: PartialPerm,
    pub petals: Vec<PartialPerm>,
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

/// Submasks of `mask` in canonical order: by size, then by the ascending
/// cell sequence (bit indices are row-major, so numeric-by-lowest-bit
/// comparison matches cell order).
fn submasks_canonical(mask: u128) -> Vec<u128> {
    let bits: Vec<u32> = {
        let mut v = Vec::new();
        let mut m = mask;
        while m != 0 {
            v.push(m.trailing_zeros());
            m &= m - 1;
        }
        v
    };
    let k = bits.len();
    let mut subs: Vec<u128> = (0..(1u32 << k))
        .map(|sel| {
            let mut s = 0u128;
            for (j, &b) in bits.iter().enumerate() {
                if sel >> j & 1 == 1 {
                    s |= 1u128 << b;
                }
            }
            s
        })
        .collect();
    // lexicographic order on ascending cell lists: reversing the bits makes
    // the lowest cell most significant, so a LARGER reversed value means a
    // lex-SMALLER sequence
    subs.sort_by_key(|&s| (s.count_ones(), std::cmp::Reverse(s.reverse_bits())));
    subs
}

fn backtrack_petals(
    cand_reduced: &[u128],
    start: usize,
    used: u128,
    need: usize,
    chosen: &mut Vec<usize>,
    meter: &mut Meter,
) -> Result<bool> {
    if need == 0 {
        return Ok(true);
    }
    if cand_reduced.len() - start < need {
        return Ok(false);
    }
    for j in start..cand_reduced.len() {
        meter.charge(1)?;
        let red = cand_reduced[j];
        if red & used == 0 {
            chosen.push(j);
            if backtrack_petals(cand_reduced, j + 1, used | red, need - 1, chosen, meter)? {
                return Ok(true);
            }
            chosen.pop();
        }
    }
    Ok(false)
}

/// Search for a pseudo sunflower with `count` sets of size exactly
/// `petal_size` among `members`. Deterministic first-found.
fn find_uniform_sunflower(
    members: &[PartialPerm],
    petal_size: usize,
    count: usize,
    meter: &mut Meter,
) -> Result<Option<PseudoSunflower>> {
    if count < 2 {
        return Err(Error::InvalidParameter(
            "a pseudo sunflower needs at least two sets".into(),
        ));
    }
    let uniform: Vec<(usize, u128)> = members
        .iter()
        .enumerate()
        .filter(|(_, m)| m.size() == petal_size)
        .map(|(i, m)| (i, m.mask()))
        .collect();
    if uniform.len() < count {
        return Ok(None);
    }
    for &(f0_idx, f0_mask) in &uniform {
        let others: Vec<(usize, u128)> = uniform
            .iter()
            .copied()
            .filter(|&(i, _)| i != f0_idx)
            .collect();
        for c_mask in submasks_canonical(f0_mask) {
            if c_mask == f0_mask {
                continue; // center must be strict
            }
            meter.charge(1)?;
            let reduced0 = f0_mask & !c_mask;
            let cand_reduced: Vec<u128> = others.iter().map(|&(_, m)| m & !c_mask).collect();
            let mut chosen = Vec::new();
            if backtrack_petals(&cand_reduced, 0, reduced0, count - 1, &mut chosen, meter)? {
                let degree = members[f0_idx].degree();
                let center = PartialPerm::from_mask(degree, c_mask)?;
                let petal0 = members[f0_idx].clone();
                let petals = chosen
                    .iter()
                    .map(|&j| members[others[j].0].clone())
                    .collect();
                return Ok(Some(PseudoSunflower {
                    center,
                    petal0,
                    petals,
                }));
            }
        }
    }
    Ok(None)
}

/// Find an s-uniform pseudo sunflower of size s+1 in `h`, if any. Every
/// member of `h` must have size at most s.
pub fn find_pseudo_sunflower(
    h: &PartialFamily,
    s: usize,
    budget: &Budget,
) -> Result<Option<PseudoSunflower>> {
    if s == 0 {
        return Err(Error::InvalidParameter("uniformity s must be positive".into()));
    }
    if let Some(m) = h.iter().find(|m| m.size() > s) {
        return Err(Error::MemberTooLarge {
            size: m.size(),
            max: s,
        });
    }
    let mut meter = Meter::new(budget);
    find_uniform_sunflower(h.members(), s, s + 1, &mut meter)
}

/// The compression fixed point: while an s-uniform pseudo sunflower of size
/// s+1 exists, remove every set containing its center and add the center.
pub fn compress(h: &PartialFamily, s: usize, budget: &Budget) -> Result<PartialFamily> {
    if s == 0 {
        return Err(Error::InvalidParameter("uniformity s must be positive".into()));
    }
    if let Some(m) = h.iter().find(|m| m.size() > s) {
        return Err(Error::MemberTooLarge {
            size: m.size(),
            max: s,
        });
    }
    let mut meter = Meter::new(budget);
    let mut current = h.clone();
    loop {
        let Some(sf) = find_uniform_sunflower(current.members(), s, s + 1, &mut meter)? else {
            return Ok(current);
        };
        let c_mask = sf.center.mask();
        let mut next: Vec<PartialPerm> = current
            .iter()
            .filter(|m| c_mask & !m.mask() != 0) // keep sets not containing C
            .cloned()
            .collect();
        next.push(sf.center);
        current = PartialFamily::new(current.degree(), next)?;
    }
}

/// Members of `b` with no proper subset in `b`.
pub fn minimal_members(b: &PartialFamily) -> PartialFamily {
    let masks = b.masks();
    let keep: Vec<PartialPerm> = b
        .iter()
        .enumerate()
        .filter(|(i, m)| {
            let mm = m.mask();
            !masks
                .iter()
                .enumerate()
                .any(|(j, &t)| j != *i && t & !mm == 0 && t != mm)
        })
        .map(|(_, m)| m.clone())
        .collect();
    PartialFamily::new(b.degree(), keep).expect("degrees preserved")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwoUniformClass {
    Star { center: Cell },
    Triangle { cells: [Cell; 3] },
    Other { note: String },
}

impl TwoUniformClass {
    pub fn describe(&self) -> String {
        match self {
            TwoUniformClass::Star { center } => format!("star({center})"),
            TwoUniformClass::Triangle { cells } => {
                format!("triangle({} {} {})", cells[0], cells[1], cells[2])
            }
            TwoUniformClass::Other { note } => format!("other({note})"),
        }
    }
}

/// Classify a family of sets of size at most 2: a star when some cell lies
/// in every member, a triangle when it is exactly three 2-sets on three
/// cells pairwise intersecting without a common cell, otherwise `Other`.
pub fn classify_two_uniform(a: &PartialFamily) -> Result<TwoUniformClass> {
    if let Some(m) = a.iter().find(|m| m.size() > 2) {
        return Err(Error::MemberTooLarge {
            size: m.size(),
            max: 2,
        });
    }
    if a.is_empty() {
        return Ok(TwoUniformClass::Other {
            note: "empty".into(),
        });
    }
    let masks = a.masks();
    let common = masks.iter().fold(!0u128, |acc, m| acc & m);
    if common != 0 {
        let bit = common.trailing_zeros();
        return Ok(TwoUniformClass::Star {
            center: Cell::from_bit(bit, a.degree()),
        });
    }
    if a.len() == 3 && a.iter().all(|m| m.size() == 2) {
        let union = masks.iter().fold(0u128, |acc, m| acc | m);
        let pairwise = masks[0] & masks[1] != 0 && masks[0] & masks[2] != 0 && masks[1] & masks[2] != 0;
        if union.count_ones() == 3 && pairwise {
            let mut cells = Vec::with_capacity(3);
            let mut u = union;
            while u != 0 {
                cells.push(Cell::from_bit(u.trailing_zeros(), a.degree()));
                u &= u - 1;
            }
            return Ok(TwoUniformClass::Triangle {
                cells: [cells[0], cells[1], cells[2]],
            });
        }
    }
    let note = if crate::family::is_intersecting_partial(a) {
        "intersecting but neither star nor triangle"
    } else {
        "not intersecting"
    };
    Ok(TwoUniformClass::Other { note: note.into() })
}

#[derive(Debug, Clone)]
pub struct LayerRecord {
    pub uniformity: usize,
    pub size: u64,
    pub bound: BigUint,
}

#[derive(Debug, Clone)]
pub struct CascadeResult {
    /// A_i for i = q_int down to 3 (the size-i members kept at level i).
    pub layers: BTreeMap<usize, PartialFamily>,
    /// The residue of sets of size at most 2.
    pub residue: PartialFamily,
    pub classification: TwoUniformClass,
    pub layer_bounds: Vec<LayerRecord>,
    pub detection_rule: &'static str,
}

/// The level-by-level basis: compress the minimal members at uniformity
/// q_int, peel off the q_int-sets, re-compress one level down, and so on to
/// 3; the leftover is the 2-uniform residue. Each kept layer obeys the
/// pseudo-sunflower counting bound i^i, enforced as a hard invariant.
pub fn basis_cascade(b: &PartialFamily, q_int: usize, budget: &Budget) -> Result<CascadeResult> {
    if q_int < 3 {
        return Err(Error::InvalidParameter(format!(
            "cascade uniformity must be at least 3, got {q_int}"
        )));
    }
    for m in b.iter() {
        if m.is_empty() {
            return Err(Error::InvalidPartialPerm(
                "cascade input members must be nonempty".into(),
            ));
        }
        if m.size() > q_int {
            return Err(Error::MemberTooLarge {
                size: m.size(),
                max: q_int,
            });
        }
    }
    let t = minimal_members(b);
    let mut layers = BTreeMap::new();
    let mut layer_bounds = Vec::new();
    let mut p = compress(&t, q_int, budget)?;
    let mut level = q_int;
    loop {
        let (layer, rest): (Vec<PartialPerm>, Vec<PartialPerm>) =
            p.iter().cloned().partition(|m| m.size() == level);
        let layer = PartialFamily::new(b.degree(), layer)?;
        let bound = BigUint::from(level).pow(level as u32);
        if BigUint::from(layer.len() as u64) > bound {
            return Err(Error::InvariantViolation(format!(
                "layer {level} has {} members, above the bound {bound}",
                layer.len()
            )));
        }
        layer_bounds.push(LayerRecord {
            uniformity: level,
            size: layer.len() as u64,
            bound,
        });
        layers.insert(level, layer);
        if level == 3 {
            let residue = PartialFamily::new(b.degree(), rest)?;
            let classification = classify_two_uniform(&residue)?;
            return Ok(CascadeResult {
                layers,
                residue,
                classification,
                layer_bounds,
                detection_rule: DETECTION_RULE,
            });
        }
        p = compress(&PartialFamily::new(b.degree(), rest)?, level - 1, budget)?;
        level -= 1;
    }
}

#[derive(Debug, Clone)]
pub struct FurediCheck {
    pub holds: bool,
    pub subfamily_size: u64,
    pub bound: BigUint,
    pub sunflower_found: bool,
}

/// Check the counting bound on the k-uniform subfamily of `h`: if it
/// contains no pseudo sunflower of size s+1, its size must be at most s^k.
pub fn furedi_check(h: &PartialFamily, s: usize, k: usize, budget: &Budget) -> Result<FurediCheck> {
    if s == 0 || k == 0 {
        return Err(Error::InvalidParameter("s and k must be positive".into()));
    }
    let uniform: Vec<PartialPerm> = h.iter().filter(|m| m.size() == k).cloned().collect();
    let size = uniform.len() as u64;
    let mut meter = Meter::new(budget);
    let sunflower_found = find_uniform_sunflower(&uniform, k, s + 1, &mut meter)?.is_some();
    let bound = BigUint::from(s).pow(k as u32);
    let holds = sunflower_found || BigUint::from(size) <= bound;
    Ok(FurediCheck {
        holds,
        subfamily_size: size,
        bound,
        sunflower_found,
    })
}

/// Exhaustively validate a claimed pseudo sunflower against the definition.
pub fn is_valid_pseudo_sunflower(sf: &PseudoSunflower) -> bool {
    let c = sf.center.mask();
    let f0 = sf.petal0.mask();
    if c & !f0 != 0 || c == f0 {
        return false; // center must be a strict subset of the first set
    }
    let mut reduced: Vec<u128> = vec![f0 & !c];
    reduced.extend(sf.petals.iter().map(|p| p.mask() & !c));
    for (i, a) in reduced.iter().enumerate() {
        for b in &reduced[i + 1..] {
            if a & b != 0 {
                return false;
            }
        }
    }
    true
}
