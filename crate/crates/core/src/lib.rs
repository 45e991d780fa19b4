//! Exact computational machinery for finite p-groups (p odd) carrying an
//! involution: polycyclic collection, descending p-central series, powerful
//! group tests, plus/minus eigenspace ranks, brute-force mod-p second
//! cohomology, Tate cohomology of finite cyclic actions, and the decision
//! rules for finiteness of pro-p towers built on top of those invariants.
//!
//! Everything is exact integer arithmetic over F_p; nothing here is
//! approximate, and every elimination or enumeration is deterministic so
//! results can be compared bit-for-bit across runs.

pub mod cohomology;
pub mod corpus;
pub mod fp_linalg;
pub mod involution;
pub mod pc;
pub mod structure;
pub mod suites;
pub mod verdicts;
