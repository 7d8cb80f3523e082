//! Binary matrices, forbidden-pattern containment and the extremal bounds
//! used to judge GREEDY executions.
//!
//! Matrix row `r` is grid row `t = r`, so the first row is the earliest
//! time. Coordinates are 1-based.
//!
//! [`Pattern::p4`] and [`Pattern::p5`] hold the patterns row by row as they
//! are usually drawn, top row first. Drawings of the grid put time upward,
//! so the pattern GREEDY avoids is the drawing read bottom to top; that is
//! [`Pattern::upward`], which reverses the rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{ModelError, PointSet};
use crate::segtree::MaxTree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: u32,
    cols: u32,
    // sorted columns of the ones in each row
    ones: Vec<Vec<u32>>,
}

impl BinaryMatrix {
    pub fn new(rows: u32, cols: u32) -> Self {
        BinaryMatrix {
            rows,
            cols,
            ones: vec![Vec::new(); rows as usize],
        }
    }

    /// Builds a matrix from 1-based `(row, col)` cells; duplicates merge.
    pub fn from_ones(rows: u32, cols: u32, cells: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, ModelError> {
        let mut m = BinaryMatrix::new(rows, cols);
        for (r, c) in cells {
            m.set(r, c)?;
        }
        Ok(m)
    }

    /// Parses rows of `0`/`1` characters (other characters are ignored
    /// except `.`, read as 0). Handy for small literal patterns.
    pub fn from_picture(picture: &[&str]) -> Self {
        let grid: Vec<Vec<bool>> = picture
            .iter()
            .map(|l| {
                l.chars()
                    .filter(|c| matches!(c, '0' | '1' | '.'))
                    .map(|c| c == '1')
                    .collect()
            })
            .collect();
        let cols = grid.iter().map(Vec::len).max().unwrap_or(0) as u32;
        let mut m = BinaryMatrix::new(grid.len() as u32, cols);
        for (i, row) in grid.iter().enumerate() {
            m.ones[i] = row
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(j, _)| j as u32 + 1)
                .collect();
        }
        m
    }

    pub fn from_pointset(ps: &PointSet) -> Self {
        BinaryMatrix {
            rows: ps.horizon(),
            cols: ps.universe(),
            ones: ps.rows().iter().map(|r| r.iter().map(|k| k.0).collect()).collect(),
        }
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn count_ones(&self) -> usize {
        self.ones.iter().map(Vec::len).sum()
    }

    /// Sorted columns of the ones in row `r`.
    pub fn row(&self, r: u32) -> &[u32] {
        &self.ones[r as usize - 1]
    }

    pub fn get(&self, r: u32, c: u32) -> bool {
        r >= 1 && r <= self.rows && self.row(r).binary_search(&c).is_ok()
    }

    pub fn set(&mut self, r: u32, c: u32) -> Result<(), ModelError> {
        if r == 0 || r > self.rows || c == 0 || c > self.cols {
            return Err(ModelError::OutOfRange {
                x: c,
                t: r,
                universe: self.cols,
                horizon: self.rows,
            });
        }
        let row = &mut self.ones[r as usize - 1];
        if let Err(pos) = row.binary_search(&c) {
            row.insert(pos, c);
        }
        Ok(())
    }

    /// The matrix with its row order reversed.
    pub fn flip_vertical(&self) -> Self {
        BinaryMatrix {
            rows: self.rows,
            cols: self.cols,
            ones: self.ones.iter().rev().cloned().collect(),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.ones
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&c| (i as u32 + 1, c)))
    }

    /// Sparse text form: a `u v` header, then one `r c` line per one.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for (r, c) in self.cells() {
            let _ = writeln!(out, "{r} {c}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, msg: &str| ModelError::Parse {
            line,
            msg: msg.to_string(),
        };
        let pair = |line: usize, l: &str| -> Result<(u32, u32), ModelError> {
            let f: Vec<&str> = l.split_whitespace().collect();
            match f.as_slice() {
                [a, b] => Ok((
                    a.parse().map_err(|_| bad(line, "bad number"))?,
                    b.parse().map_err(|_| bad(line, "bad number"))?,
                )),
                _ => Err(bad(line, "expected two numbers")),
            }
        };
        let (hl, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let (u, v) = pair(hl, header)?;
        let mut m = BinaryMatrix::new(u, v);
        for (ln, l) in lines {
            let (r, c) = pair(ln, l)?;
            m.set(r, c).map_err(|_| bad(ln, "cell outside the matrix"))?;
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub name: String,
    pub matrix: BinaryMatrix,
}

impl Pattern {
    pub fn new(name: impl Into<String>, matrix: BinaryMatrix) -> Self {
        assert!(matrix.count_ones() > 0, "pattern must have a one");
        Pattern {
            name: name.into(),
            matrix,
        }
    }

    /// Two rows, ones alternating between them across five columns.
    pub fn p5() -> Self {
        Pattern::new("P5", BinaryMatrix::from_picture(&["1.1.1", ".1.1."]))
    }

    /// The 4x4 permutation pattern 1324.
    pub fn p4() -> Self {
        Pattern::new("P4", BinaryMatrix::from_picture(&["1...", "..1.", ".1..", "...1"]))
    }

    pub fn flipped(&self) -> Self {
        Pattern::new(format!("{}-flipped", self.name), self.matrix.flip_vertical())
    }

    /// The drawing read with time increasing up the page: its last row is
    /// matched against the earliest matrix row.
    pub fn upward(&self) -> Self {
        Pattern::new(format!("{}-up", self.name), self.matrix.flip_vertical())
    }

    /// Looks up `p4`, `p5`, `p4-up` or `p5-up`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "p4" => Some(Pattern::p4()),
            "p5" => Some(Pattern::p5()),
            "p4-up" => Some(Pattern::p4().upward()),
            "p5-up" => Some(Pattern::p5().upward()),
            _ => None,
        }
    }
}

/// Selected matrix rows and columns, one per pattern row and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
}

impl Witness {
    /// Whether the selection really covers every one of `p`.
    pub fn covers(&self, m: &BinaryMatrix, p: &Pattern) -> bool {
        let inc = |v: &[u32]| v.windows(2).all(|w| w[0] < w[1]);
        self.rows.len() == p.matrix.rows() as usize
            && self.cols.len() == p.matrix.cols() as usize
            && inc(&self.rows)
            && inc(&self.cols)
            && p.matrix
                .cells()
                .all(|(i, j)| m.get(self.rows[i as usize - 1], self.cols[j as usize - 1]))
    }
}

/// Finds an occurrence of `p` in `m`. P4, P5 and their vertical flips use
/// dedicated near-linear searches; other patterns fall back to backtracking
/// over row choices.
pub fn contains_pattern(m: &BinaryMatrix, p: &Pattern) -> Option<Witness> {
    let (p4, p5) = (Pattern::p4().matrix, Pattern::p5().matrix);
    let flip_rows = |mut w: Witness| {
        w.rows = w.rows.iter().rev().map(|r| m.rows() + 1 - r).collect();
        w
    };
    if p.matrix == p4 {
        find_p4(m)
    } else if p.matrix == p4.flip_vertical() {
        find_p4(&m.flip_vertical()).map(flip_rows)
    } else if p.matrix == p5 {
        find_p5(m, false)
    } else if p.matrix == p5.flip_vertical() {
        find_p5(m, true)
    } else {
        find_general(m, &p.matrix)
    }
}

/// Rows `r1 < r2 < r3 < r4` with ones at columns `c1 < c3 < c2 < c4`
/// respectively (the middle two rows cross).
fn find_p4(m: &BinaryMatrix) -> Option<Witness> {
    let u = m.rows() as usize;
    let v = m.cols() as usize;
    // min column among rows strictly before r, max column among rows
    // strictly after r
    let mut min_before = vec![u32::MAX; u + 2];
    for r in 1..=u {
        let here = m.ones[r - 1].first().copied().unwrap_or(u32::MAX);
        min_before[r + 1] = min_before[r].min(here);
    }
    let mut max_after = vec![0u32; u + 2];
    for r in (1..=u).rev() {
        let here = m.ones[r - 1].last().copied().unwrap_or(0);
        max_after[r - 1] = max_after[r].max(here);
    }
    // best[c] = max over second-row candidates in column c of -min_before
    let mut best = MaxTree::new(v + 2);
    let mut owner_row = vec![0u32; v + 2];
    for r in 1..=u {
        let hi = max_after[r] as usize;
        for &c in &m.ones[r - 1] {
            let c = c as usize;
            if hi > c + 1 {
                if let Some(c2) = best.first_above(c + 1, hi, -(c as i64)) {
                    return Some(complete_p4(m, owner_row[c2], c2 as u32, r as u32, c as u32));
                }
            }
        }
        if min_before[r] == u32::MAX {
            continue;
        }
        let val = -(min_before[r] as i64);
        for &c in &m.ones[r - 1] {
            if best.get(c as usize) < val {
                best.set(c as usize, val);
                owner_row[c as usize] = r as u32;
            }
        }
    }
    None
}

fn complete_p4(m: &BinaryMatrix, r2: u32, c_hi: u32, r3: u32, c_lo: u32) -> Witness {
    let (r1, c1) = (1..r2)
        .find_map(|r| m.row(r).first().filter(|&&c| c < c_lo).map(|&c| (r, c)))
        .expect("prefix minimum below c_lo");
    let (r4, c4) = (r3 + 1..=m.rows())
        .find_map(|r| m.row(r).last().filter(|&&c| c > c_hi).map(|&c| (r, c)))
        .expect("suffix maximum above c_hi");
    Witness {
        rows: vec![r1, r2, r3, r4],
        cols: vec![c1, c_lo, c_hi, c4],
    }
}

/// Row pair with the three-one row `a` and the two-one row `b` interleaving
/// as `a b a b a`. Without `flipped` row `a` comes first.
fn find_p5(m: &BinaryMatrix, flipped: bool) -> Option<Witness> {
    let u = m.rows();
    let triples: Vec<u32> = (1..=u).filter(|&r| m.row(r).len() >= 3).collect();
    let pairs: Vec<u32> = (1..=u).filter(|&r| m.row(r).len() >= 2).collect();
    for &ra in &triples {
        let a = m.row(ra);
        let (lo_a, hi_a) = (a[0], a[a.len() - 1]);
        for &rb in &pairs {
            if (rb > ra) == flipped || rb == ra {
                continue;
            }
            let b = m.row(rb);
            // leftmost b after the smallest a, rightmost b before the largest a
            let i2 = b.partition_point(|&c| c <= lo_a);
            let i4 = b.partition_point(|&c| c < hi_a);
            if i2 >= i4 {
                continue;
            }
            let (c2, c4) = (b[i2], b[i4 - 1]);
            if c2 >= c4 {
                continue;
            }
            let j = a.partition_point(|&c| c <= c2);
            if j < a.len() && a[j] < c4 {
                let rows = if flipped { vec![rb, ra] } else { vec![ra, rb] };
                return Some(Witness {
                    rows,
                    cols: vec![lo_a, c2, a[j], c4, hi_a],
                });
            }
        }
    }
    None
}

/// Leftmost column assignment for the chosen rows, if any.
fn fit_columns(m: &BinaryMatrix, p: &BinaryMatrix, rows: &[u32]) -> Option<Vec<u32>> {
    let mut cols = Vec::with_capacity(p.cols() as usize);
    let mut prev = 0u32;
    for j in 1..=p.cols() {
        let need: Vec<u32> = (1..=rows.len() as u32)
            .filter(|&i| p.get(i, j))
            .map(|i| rows[i as usize - 1])
            .collect();
        let c = (prev + 1..=m.cols()).find(|&c| need.iter().all(|&r| m.get(r, c)))?;
        cols.push(c);
        prev = c;
    }
    Some(cols)
}

fn find_general(m: &BinaryMatrix, p: &BinaryMatrix) -> Option<Witness> {
    fn go(m: &BinaryMatrix, p: &BinaryMatrix, rows: &mut Vec<u32>) -> Option<Witness> {
        let k = rows.len() as u32;
        if k > 0 {
            // the top k pattern rows must already fit
            let head = BinaryMatrix {
                rows: k,
                cols: p.cols,
                ones: p.ones[..k as usize].to_vec(),
            };
            let cols = fit_columns(m, &head, rows)?;
            if k == p.rows() {
                return Some(Witness {
                    rows: rows.clone(),
                    cols,
                });
            }
        }
        let start = rows.last().map_or(1, |r| r + 1);
        let remaining = p.rows() - k;
        for r in start..=(m.rows() + 1).saturating_sub(remaining) {
            rows.push(r);
            if let Some(w) = go(m, p, rows) {
                return Some(w);
            }
            rows.pop();
        }
        None
    }
    if p.rows() > m.rows() || p.cols() > m.cols() {
        return None;
    }
    go(m, p, &mut Vec::new())
}

/// Smallest `i >= 1` with `A_i(ceil(v / u)) > log2 u`, where
/// `A_1(j) = 2j`, `A_i(1) = A_{i-1}(2)` and `A_i(j) = A_{i-1}(A_i(j-1))`.
pub fn inverse_ackermann(u: u64, v: u64) -> u32 {
    assert!(u >= 1 && v >= 1, "arguments must be positive");
    let target = (u as f64).log2();
    let j = v.div_ceil(u);
    (1..)
        .find(|&i| ackermann_capped(i, j, 1 << 20) as f64 > target)
        .expect("hierarchy eventually exceeds any threshold")
}

/// `A_i(j)` saturated at `cap`.
fn ackermann_capped(i: u32, j: u64, cap: u64) -> u64 {
    if i == 1 {
        return j.saturating_mul(2).min(cap);
    }
    let mut val = ackermann_capped(i - 1, 2, cap);
    for _ in 1..j {
        if val >= cap {
            break;
        }
        val = ackermann_capped(i - 1, val, cap);
    }
    val.min(cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// Absolute bound `12 (u + v)`.
    P4Linear,
    /// Ratio against `u 2^alpha(u, v) + v`, no absolute threshold.
    P5Quasilinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub rows: u32,
    pub cols: u32,
    pub ones: usize,
    pub bound: f64,
    pub ratio: f64,
    pub alpha: Option<u32>,
    /// `Some` only for bounds with an explicit constant.
    pub pass: Option<bool>,
}

pub fn bound_report(m: &BinaryMatrix, kind: BoundKind) -> BoundReport {
    let (u, v) = (m.rows().max(1) as u64, m.cols().max(1) as u64);
    let ones = m.count_ones();
    let (bound, alpha, pass) = match kind {
        BoundKind::P4Linear => {
            let b = 12.0 * (u + v) as f64;
            (b, None, Some((ones as f64) < b))
        }
        BoundKind::P5Quasilinear => {
            let a = inverse_ackermann(u, v);
            ((u as f64) * 2f64.powi(a as i32) + v as f64, Some(a), None)
        }
    };
    BoundReport {
        kind,
        rows: m.rows(),
        cols: m.cols(),
        ones,
        bound,
        ratio: ones as f64 / bound,
        alpha,
        pass,
    }
}
