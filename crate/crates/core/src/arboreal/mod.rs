//! Binary search tree executions and their conversion to and from point sets.
//!
//! A step replaces a root-connected node set `tau` of the current tree by a
//! new subtree `tau'` on the same keys, plus or minus the updated key. The
//! subtrees hanging off `tau` keep their shape and are re-linked into the null
//! slots of `tau'` that cover their key range.

mod convert;
mod random;
mod reconfig;
mod tree;

use thiserror::Error;

use crate::model::{Key, ModelError, OpKind, Time};

pub use convert::{
    access_to_insertion, geometry_to_tree_offline, next_touch_time, sort_via_bst, tree_to_geometry, Execution, Replay,
};
pub use random::random_execution;
pub use reconfig::{
    apply_reconfiguration, delete_via_neighbor, insert_via_neighbor, validate_reconfiguration, NeighbourUpdate,
    PointerChange, ReconfigCost, Reconfiguration, Route, Slot,
};
pub use tree::{BSTree, ChildSide, Links};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArborealError {
    #[error("key {0} is not in the tree")]
    NotInTree(Key),
    #[error("the touched set does not contain the root {root:?}")]
    RootNotInTau { root: Option<Key> },
    #[error("the touched set is not connected: the parent of {0} is untouched")]
    Disconnected(Key),
    #[error("the subtree rooted at {pendant} has no free slot in the new subtree")]
    PendantLinkFailure { pendant: Key },
    #[error("{kind:?} of {key}: the new subtree has the wrong key set")]
    SetRelationMismatch { kind: OpKind, key: Key },
    #[error("invalid tree: {0}")]
    InvalidShape(String),
    #[error("neither neighbour of {0} is touched and it is not an extreme key")]
    NeighbourMissing(Key),
    #[error("step {t}: {source}")]
    Step { t: Time, source: Box<ArborealError> },
    #[error("conversion invariant failed at row {t}: {msg}")]
    Invariant { t: Time, msg: String },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ArborealError {
    /// The innermost error, skipping step wrappers.
    pub fn root_cause(&self) -> &ArborealError {
        match self {
            ArborealError::Step { source, .. } => source.root_cause(),
            e => e,
        }
    }
}
