//! Line-oriented text format shared by sequences and point sets.
//!
//! ```text
//! n m
//! t K x
//! ```
//!
//! The header gives the universe and the number of rows. Each following line
//! is one point: row `t`, kind letter `K` (`A`, `I`, `D` for input points,
//! `T` for touched points) and column `x`. Writers order lines by `(t, x)`;
//! readers accept any order, blank lines and `#` comments.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{Key, ModelError, Op, OpKind, PointSet, Time, UpdateSequence};

struct Parsed {
    universe: u32,
    horizon: Time,
    inputs: Vec<Option<Op>>,
    touched: Vec<(Key, Time)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse { line, msg: msg.into() }
}

fn parse_lines(text: &str) -> Result<Parsed, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    if nums.len() != 2 {
        return Err(parse_err(hl, "header must be `n m`"));
    }
    let universe: u32 = nums[0].parse().map_err(|_| parse_err(hl, "bad universe"))?;
    let horizon: Time = nums[1].parse().map_err(|_| parse_err(hl, "bad row count"))?;
    let mut inputs = vec![None; horizon as usize];
    let mut touched = Vec::new();
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(ln, "expected `t kind x`"));
        }
        let t: Time = f[0].parse().map_err(|_| parse_err(ln, "bad row"))?;
        let x: u32 = f[2].parse().map_err(|_| parse_err(ln, "bad column"))?;
        if t == 0 || t > horizon || x == 0 || x > universe {
            return Err(parse_err(ln, format!("({x}, {t}) outside the grid")));
        }
        let kind = match f[1] {
            "A" => Some(OpKind::Access),
            "I" => Some(OpKind::Insert),
            "D" => Some(OpKind::Delete),
            "T" => None,
            other => return Err(parse_err(ln, format!("unknown kind `{other}`"))),
        };
        match kind {
            Some(kind) => {
                let slot = &mut inputs[t as usize - 1];
                if slot.is_some() {
                    return Err(parse_err(ln, format!("row {t} has two input points")));
                }
                *slot = Some(Op::new(x, kind));
            }
            None => touched.push((Key(x), t)),
        }
    }
    Ok(Parsed {
        universe,
        horizon,
        inputs,
        touched,
    })
}

fn collect_ops(p: &Parsed) -> Result<Vec<Op>, ModelError> {
    p.inputs
        .iter()
        .enumerate()
        .map(|(i, op)| op.ok_or_else(|| parse_err(0, format!("row {} has no input point", i + 1))))
        .collect()
}

impl UpdateSequence {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let p = parse_lines(text)?;
        if !p.touched.is_empty() {
            return Err(parse_err(0, "touched points in a sequence file"));
        }
        debug_assert_eq!(p.inputs.len(), p.horizon as usize);
        UpdateSequence::new(p.universe, collect_ops(&p)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.universe(), self.len());
        for (i, op) in self.ops().iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, op.kind.letter(), op.key);
        }
        out
    }
}

impl PointSet {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let p = parse_lines(text)?;
        let seq = Arc::new(UpdateSequence::new(p.universe, collect_ops(&p)?)?);
        let ps = PointSet::new(seq, p.touched.iter().copied())?;
        if ps.len() != p.touched.len() + p.horizon as usize {
            let dup = p
                .touched
                .iter()
                .find(|(x, t)| ps.sequence().input_kind_at(*x, *t).is_some());
            return Err(match dup {
                Some((x, t)) => parse_err(0, format!("({x}, {t}) listed as both input and touched")),
                None => parse_err(0, "duplicate touched point"),
            });
        }
        Ok(ps)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.universe(), self.horizon());
        for p in self.points() {
            let _ = writeln!(out, "{} {} {}", p.t, p.kind.letter(), p.x);
        }
        out
    }
}
