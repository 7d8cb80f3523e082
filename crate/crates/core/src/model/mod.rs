//! The grid model: update sequences, classified points, validity and active
//! intervals, and the arboreally-satisfied checker.

mod pointset;
mod satisfied;
mod sequence;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pointset::{active_interval, is_valid_point, pred_point, succ_point, PointSet};
pub(crate) use satisfied::encode_top;
pub use satisfied::{check_satisfied, check_satisfied_upto, is_satisfied, side_fact_witness, Violation};
pub use sequence::{Op, UpdateSequence};

/// Row index of the grid. Rows are 1-based and later operations sit higher.
pub type Time = u32;

/// A column of the grid, i.e. an element of the key universe `[1, n]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key(pub u32);

impl Key {
    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Access,
    Insert,
    Delete,
}

impl OpKind {
    pub fn is_update(self) -> bool {
        !matches!(self, OpKind::Access)
    }

    pub fn letter(self) -> char {
        match self {
            OpKind::Access => 'A',
            OpKind::Insert => 'I',
            OpKind::Delete => 'D',
        }
    }
}

/// Classification of a grid point. The first three mark points of `P(S)`;
/// `Touched` marks points added by an execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointKind {
    Access,
    Insert,
    Delete,
    Touched,
}

impl PointKind {
    pub fn letter(self) -> char {
        match self {
            PointKind::Access => 'A',
            PointKind::Insert => 'I',
            PointKind::Delete => 'D',
            PointKind::Touched => 'T',
        }
    }

    pub fn is_update(self) -> bool {
        matches!(self, PointKind::Insert | PointKind::Delete)
    }
}

impl From<OpKind> for PointKind {
    fn from(kind: OpKind) -> Self {
        match kind {
            OpKind::Access => PointKind::Access,
            OpKind::Insert => PointKind::Insert,
            OpKind::Delete => PointKind::Delete,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Key,
    pub t: Time,
    pub kind: PointKind,
}

impl Point {
    pub fn is_deletion(&self) -> bool {
        self.kind == PointKind::Delete
    }

    pub fn is_insertion(&self) -> bool {
        self.kind == PointKind::Insert
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}){}", self.x, self.t, self.kind.letter())
    }
}

/// Maximal run of rows during which a column is valid. `None` on either end
/// means the run reaches the start of time or the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActiveInterval {
    pub start: Option<Time>,
    pub end: Option<Time>,
}

impl ActiveInterval {
    pub fn contains(&self, t: Time) -> bool {
        self.start.is_none_or(|s| s <= t) && self.end.is_none_or(|e| t <= e)
    }

    /// First row covered, treating "from start" as row 1.
    pub fn first_row(&self) -> Time {
        self.start.unwrap_or(1)
    }

    pub fn last_row(&self, horizon: Time) -> Time {
        self.end.unwrap_or(horizon)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("coordinates ({x}, {t}) outside the {universe}x{horizon} grid")]
    OutOfRange {
        x: u32,
        t: Time,
        universe: u32,
        horizon: Time,
    },
    #[error("row {t}: {kind:?} of key {key} is inconsistent with the key's presence")]
    Alternation { t: Time, key: Key, kind: OpKind },
    #[error("keys never accessed or updated: {0:?}")]
    UntouchedKeys(Vec<Key>),
    #[error("point ({x}, {t}) is not a valid cell")]
    InvalidPoint { x: Key, t: Time },
    #[error("input point ({x}, {t}) missing from the point set")]
    MissingInputPoint { x: Key, t: Time },
    #[error("input point ({x}, {t}) cannot be removed")]
    InputPointRemoval { x: Key, t: Time },
    #[error("point ({x}, {t}) not in the point set")]
    NotInSet { x: Key, t: Time },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("side fact violated: {0}")]
    FactViolation(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
