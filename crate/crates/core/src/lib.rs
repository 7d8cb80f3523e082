//! Geometric model of binary search trees with insertions and deletions.

pub mod arboreal;
pub mod greedy;
pub mod harness;
pub mod model;
pub mod patterns;
mod segtree;
pub mod sequences;
