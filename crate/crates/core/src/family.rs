//! Permutations, partial permutations, families over the n x n grid, and
//! diversity.
//!
//! A permutation of degree `n` is viewed both in one-line notation and as a
//! set of `n` grid cells `(i, sigma(i))`, one per row and column. A partial
//! permutation is any cell set with distinct rows and distinct columns. Cell
//! sets are packed into a `u128` bitmask (bit `(row-1)*n + (col-1)`), so all
//! containment and intersection tests are single mask operations.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest degree accepted by the enumeration-backed constructors.
/// 9! = 362880 keeps full-group enumeration cheap; callers that know what
/// they are doing can raise it via the `*_capped` variants.
pub const DEFAULT_DEGREE_CAP: usize = 9;

/// Largest degree for which the n^2 grid fits the u128 cell mask.
pub const MAX_GRID_DEGREE: usize = 11;

/// One grid cell, 1-based row and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub row: u8,
    pub col: u8,
}

impl Cell {
    pub fn new(row: u8, col: u8) -> Self {
        Cell { row, col }
    }

    #[inline]
    pub fn bit(self, degree: usize) -> u32 {
        (self.row as u32 - 1) * degree as u32 + (self.col as u32 - 1)
    }

    #[inline]
    pub fn from_bit(bit: u32, degree: usize) -> Self {
        Cell {
            row: (bit / degree as u32) as u8 + 1,
            col: (bit % degree as u32) as u8 + 1,
        }
    }

    fn check(self, degree: usize) -> Result<()> {
        let ok = |v: u8| v >= 1 && (v as usize) <= degree;
        if ok(self.row) && ok(self.col) {
            Ok(())
        } else {
            Err(Error::InvalidPartialPerm(format!(
                "cell {}:{} outside the {degree}x{degree} grid",
                self.row, self.col
            )))
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.row, self.col)
    }
}

fn check_degree(n: usize, cap: usize) -> Result<()> {
    if n < 1 || n > cap || n > MAX_GRID_DEGREE {
        return Err(Error::DegreeOutOfRange {
            n,
            max: cap.min(MAX_GRID_DEGREE),
        });
    }
    Ok(())
}

/// A permutation of `{1..n}` in one-line notation (`images[i-1] = sigma(i)`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn from_images(images: Vec<u8>) -> Result<Self> {
        let n = images.len();
        if n == 0 || n > MAX_GRID_DEGREE {
            return Err(Error::InvalidPermutation(format!(
                "degree {n} outside 1..={MAX_GRID_DEGREE}"
            )));
        }
        let mut seen = [false; MAX_GRID_DEGREE + 1];
        for &v in &images {
            if v < 1 || v as usize > n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} outside 1..={n}"
                )));
            }
            if seen[v as usize] {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} repeated; not a bijection"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_degree(n, MAX_GRID_DEGREE)?;
        Ok(Permutation {
            images: (1..=n as u8).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// sigma(i) for 1-based i.
    pub fn image(&self, i: usize) -> u8 {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.images
            .iter()
            .enumerate()
            .map(|(i, &v)| Cell::new(i as u8 + 1, v))
    }

    #[inline]
    pub fn cell_mask(&self) -> u128 {
        let n = self.degree();
        let mut m = 0u128;
        for c in self.cells() {
            m |= 1u128 << c.bit(n);
        }
        m
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        (c.row as usize) <= self.degree() && self.images[c.row as usize - 1] == c.col
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.images {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// A partial permutation: cells with pairwise distinct rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialPerm {
    degree: usize,
    cells: Vec<Cell>, // sorted
}

impl PartialPerm {
    pub fn new(degree: usize, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        check_degree(degree, MAX_GRID_DEGREE)?;
        let mut cells: Vec<Cell> = cells.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        let mut rows = 0u16;
        let mut cols = 0u16;
        for c in &cells {
            c.check(degree)?;
            let (rb, cb) = (1u16 << (c.row - 1), 1u16 << (c.col - 1));
            if rows & rb != 0 {
                return Err(Error::InvalidPartialPerm(format!("row {} repeated", c.row)));
            }
            if cols & cb != 0 {
                return Err(Error::InvalidPartialPerm(format!("column {} repeated", c.col)));
            }
            rows |= rb;
            cols |= cb;
        }
        Ok(PartialPerm { degree, cells })
    }

    pub fn empty(degree: usize) -> Result<Self> {
        Self::new(degree, std::iter::empty())
    }

    pub fn from_mask(degree: usize, mask: u128) -> Result<Self> {
        let mut cells = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let bit = m.trailing_zeros();
            cells.push(Cell::from_bit(bit, degree));
            m &= m - 1;
        }
        Self::new(degree, cells)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn mask(&self) -> u128 {
        let mut m = 0u128;
        for c in &self.cells {
            m |= 1u128 << c.bit(self.degree);
        }
        m
    }

    pub fn is_subset_of(&self, other: &PartialPerm) -> bool {
        self.degree == other.degree && self.mask() & !other.mask() == 0
    }

    pub fn contained_in_perm(&self, p: &Permutation) -> bool {
        self.degree == p.degree() && self.mask() & !p.cell_mask() == 0
    }
}

// Canonical order: smaller sets first, then lexicographic by cells.
impl Ord for PartialPerm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree, self.cells.len(), &self.cells).cmp(&(
            other.degree,
            other.cells.len(),
            &other.cells,
        ))
    }
}

impl PartialOrd for PartialPerm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PartialPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return write!(f, "-");
        }
        let mut first = true;
        for c in &self.cells {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// A finite set of permutations of a common degree, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermFamily {
    degree: usize,
    members: Vec<Permutation>,
}

impl PermFamily {
    pub fn new(degree: usize, members: impl IntoIterator<Item = Permutation>) -> Result<Self> {
        check_degree(degree, MAX_GRID_DEGREE)?;
        let mut members: Vec<Permutation> = members.into_iter().collect();
        for m in &members {
            if m.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: m.degree(),
                });
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(PermFamily { degree, members })
    }

    pub fn empty(degree: usize) -> Result<Self> {
        Self::new(degree, std::iter::empty())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Permutation] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.members.iter()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.members.binary_search(p).is_ok()
    }

    pub fn masks(&self) -> Vec<u128> {
        self.members.iter().map(|p| p.cell_mask()).collect()
    }

    /// Set difference, keeping the degree.
    pub fn difference(&self, other: &PermFamily) -> PermFamily {
        PermFamily {
            degree: self.degree,
            members: self
                .members
                .iter()
                .filter(|m| !other.contains(m))
                .cloned()
                .collect(),
        }
    }
}

/// A finite set of partial permutations of a common degree, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFamily {
    degree: usize,
    members: Vec<PartialPerm>,
}

impl PartialFamily {
    pub fn new(degree: usize, members: impl IntoIterator<Item = PartialPerm>) -> Result<Self> {
        check_degree(degree, MAX_GRID_DEGREE)?;
        let mut members: Vec<PartialPerm> = members.into_iter().collect();
        for m in &members {
            if m.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: m.degree(),
                });
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(PartialFamily { degree, members })
    }

    pub fn empty(degree: usize) -> Result<Self> {
        Self::new(degree, std::iter::empty())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PartialPerm] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &PartialPerm> {
        self.members.iter()
    }

    pub fn contains(&self, s: &PartialPerm) -> bool {
        self.members.binary_search(s).is_ok()
    }

    pub fn masks(&self) -> Vec<u128> {
        self.members.iter().map(|p| p.mask()).collect()
    }
}

impl From<&PermFamily> for PartialFamily {
    fn from(f: &PermFamily) -> Self {
        let members = f
            .members()
            .iter()
            .map(|p| PartialPerm::new(f.degree(), p.cells()).expect("perm cells are proper"))
            .collect::<Vec<_>>();
        PartialFamily::new(f.degree(), members).expect("degrees agree")
    }
}

/// Diversity of a family: the minimum, over all grid cells, of the number of
/// members avoiding that cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiversityReport {
    pub gamma: u64,
    pub argmin_cell: Cell,
    pub codegree_table: BTreeMap<Cell, u64>,
}

/// All n! permutations of degree n.
pub fn enumerate_symmetric_group(n: usize) -> Result<PermFamily> {
    enumerate_symmetric_group_capped(n, DEFAULT_DEGREE_CAP)
}

pub fn enumerate_symmetric_group_capped(n: usize, cap: usize) -> Result<PermFamily> {
    check_degree(n, cap)?;
    let mut out = Vec::new();
    let mut images: Vec<u8> = (1..=n as u8).collect();
    // Lexicographic generation keeps the family canonical without a sort.
    loop {
        out.push(Permutation {
            images: images.clone(),
        });
        // next_permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| images[i] < images[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| images[j] > images[i]).unwrap();
        images.swap(i, j);
        images[i + 1..].reverse();
    }
    Ok(PermFamily { degree: n, members: out })
}

/// True iff every two members share a cell. Empty and singleton permutation
/// families are intersecting (a permutation always shares all cells with
/// itself).
pub fn is_intersecting(f: &PermFamily) -> bool {
    let masks = f.masks();
    for (i, a) in masks.iter().enumerate() {
        for b in &masks[i + 1..] {
            if a & b == 0 {
                return false;
            }
        }
    }
    true
}

/// Intersecting test for partial families. Here the empty set intersects
/// nothing, itself included, so any family with an empty member is not
/// intersecting.
pub fn is_intersecting_partial(f: &PartialFamily) -> bool {
    let masks = f.masks();
    for (i, a) in masks.iter().enumerate() {
        if *a == 0 {
            return false;
        }
        for b in &masks[i + 1..] {
            if a & b == 0 {
                return false;
            }
        }
    }
    true
}

/// Number of members containing every cell of `s`.
pub fn co_degree(f: &PermFamily, s: &PartialPerm) -> Result<u64> {
    if s.degree() != f.degree() {
        return Err(Error::DegreeMismatch {
            expected: f.degree(),
            found: s.degree(),
        });
    }
    let sm = s.mask();
    Ok(f.iter().filter(|p| sm & !p.cell_mask() == 0).count() as u64)
}

/// The family `{F \ S : S subset of F in f}` of residual patterns.
pub fn restriction(f: &PermFamily, s: &PartialPerm) -> Result<PartialFamily> {
    if s.degree() != f.degree() {
        return Err(Error::DegreeMismatch {
            expected: f.degree(),
            found: s.degree(),
        });
    }
    let n = f.degree();
    let sm = s.mask();
    let mut members = Vec::new();
    for p in f.iter() {
        let pm = p.cell_mask();
        if sm & !pm == 0 {
            members.push(PartialPerm::from_mask(n, pm & !sm)?);
        }
    }
    PartialFamily::new(n, members)
}

/// Members of `f` not containing the cell `x`.
pub fn avoidance(f: &PermFamily, x: Cell) -> PermFamily {
    PermFamily {
        degree: f.degree(),
        members: f
            .iter()
            .filter(|p| !p.contains_cell(x))
            .cloned()
            .collect(),
    }
}

/// Diversity report: gamma, its witness cell (lexicographically first), and
/// the full cell -> co-degree table.
pub fn diversity(f: &PermFamily) -> Result<DiversityReport> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let n = f.degree();
    let masks = f.masks();
    let total = masks.len() as u64;
    let mut table = BTreeMap::new();
    let mut best: Option<(u64, Cell)> = None;
    for row in 1..=n as u8 {
        for col in 1..=n as u8 {
            let cell = Cell::new(row, col);
            let bit = 1u128 << cell.bit(n);
            let codeg = masks.iter().filter(|m| *m & bit != 0).count() as u64;
            table.insert(cell, codeg);
            let avoid = total - codeg;
            // Lexicographic (row, col) tie-break comes free from scan order.
            if best.map_or(true, |(g, _)| avoid < g) {
                best = Some((avoid, cell));
            }
        }
    }
    let (gamma, argmin_cell) = best.unwrap();
    Ok(DiversityReport {
        gamma,
        argmin_cell,
        codegree_table: table,
    })
}

/// All permutations with `sigma(x.row) = x.col`; the maximum intersecting
/// family, of size (n-1)!.
pub fn make_star(n: usize, x: Cell) -> Result<PermFamily> {
    make_star_capped(n, x, DEFAULT_DEGREE_CAP)
}

pub fn make_star_capped(n: usize, x: Cell, cap: usize) -> Result<PermFamily> {
    check_degree(n, cap)?;
    x.check(n)?;
    // Direct construction: bijections from the remaining rows to the
    // remaining columns, built recursively in lexicographic order.
    let rows: Vec<u8> = (1..=n as u8).filter(|&r| r != x.row).collect();
    let cols: Vec<u8> = (1..=n as u8).filter(|&c| c != x.col).collect();
    let mut members = Vec::new();
    let mut assignment = vec![0u8; n];
    assignment[x.row as usize - 1] = x.col;
    fn rec(
        rows: &[u8],
        cols: &[u8],
        used: &mut Vec<bool>,
        idx: usize,
        assignment: &mut Vec<u8>,
        out: &mut Vec<Permutation>,
    ) {
        if idx == rows.len() {
            out.push(Permutation {
                images: assignment.clone(),
            });
            return;
        }
        for (j, &c) in cols.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                assignment[rows[idx] as usize - 1] = c;
                rec(rows, cols, used, idx + 1, assignment, out);
                used[j] = false;
            }
        }
    }
    let mut used = vec![false; cols.len()];
    rec(&rows, &cols, &mut used, 0, &mut assignment, &mut members);
    PermFamily::new(n, members)
}

/// The triangle family: permutations agreeing with the identity on at least
/// two of positions 1, 2, 3.
pub fn make_triangle_family(n: usize) -> Result<PermFamily> {
    make_triangle_family_capped(n, DEFAULT_DEGREE_CAP)
}

pub fn make_triangle_family_capped(n: usize, cap: usize) -> Result<PermFamily> {
    if n < 3 {
        return Err(Error::DegreeOutOfRange { n, max: cap });
    }
    let all = enumerate_symmetric_group_capped(n, cap)?;
    let members: Vec<Permutation> = all
        .iter()
        .filter(|p| {
            let fixed = (1..=3).filter(|&i| p.image(i) == i as u8).count();
            fixed >= 2
        })
        .cloned()
        .collect();
    PermFamily::new(n, members)
}

/// All permutations containing at least one member of `b`.
pub fn span(b: &PartialFamily, n: usize) -> Result<PermFamily> {
    span_capped(b, n, DEFAULT_DEGREE_CAP)
}

pub fn span_capped(b: &PartialFamily, n: usize, cap: usize) -> Result<PermFamily> {
    if b.degree() != n {
        return Err(Error::DegreeMismatch {
            expected: n,
            found: b.degree(),
        });
    }
    let all = enumerate_symmetric_group_capped(n, cap)?;
    let bmasks = b.masks();
    let members: Vec<Permutation> = all
        .iter()
        .filter(|p| {
            let pm = p.cell_mask();
            bmasks.iter().any(|bm| bm & !pm == 0)
        })
        .cloned()
        .collect();
    PermFamily::new(n, members)
}

/// Number of fixed-point-free permutations of m elements, by the recurrence
/// D_m = (m-1)(D_{m-1} + D_{m-2}).
pub fn derangement_count(m: usize) -> Result<u64> {
    if m > 20 {
        return Err(Error::InvalidParameter(format!(
            "derangement_count supports m <= 20, got {m}"
        )));
    }
    let (mut prev2, mut prev1) = (1u64, 0u64); // D_0, D_1
    match m {
        0 => return Ok(1),
        1 => return Ok(0),
        _ => {}
    }
    for k in 2..=m as u64 {
        let next = (k - 1) * (prev1 + prev2);
        prev2 = prev1;
        prev1 = next;
    }
    Ok(prev1)
}
