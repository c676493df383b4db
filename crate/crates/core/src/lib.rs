//! Lazified conditional-gradient (Frank-Wolfe) methods.
//!
//! The linear minimization oracle of classical conditional-gradient methods
//! is replaced by a *weak separation oracle*: given a linear objective `c`,
//! a point `x`, a threshold `phi` and an accuracy `K >= 1`, it either returns
//! a vertex `y` with `c·(x - y) > phi / K` or certifies that no point of the
//! feasible region improves on `x` by more than `phi`. Because the oracle may
//! answer from a cache of previously seen vertices, most iterations never
//! touch the underlying LP oracle.
//!
//! The crate is `no_std` (it needs `alloc`). Wall-clock time is injected via
//! [`trace::Clock`]; file formats and the command line live in the
//! `lazycg-bench` crate.
//!
//! Module map:
//! - [`domains`]: feasible regions with exact LMOs (simplex, hypercube,
//!   DAG path polytope, spanning-tree polytope, explicit vertex lists).
//! - [`objectives`]: smooth convex objectives, line search, instance and
//!   loss-stream generators.
//! - [`weaksep`]: the cached weak separation oracle, its product form for
//!   pairwise steps, and weak local separation.
//! - [`augment`]: weak separation driven by an augmentation oracle on 0/1
//!   polytopes.
//! - [`algorithms`]: vanilla, textbook lazy, parameter-free lazy, lazy
//!   pairwise, lazy local and lazy online conditional gradient.
//! - [`reference`]: exhaustive/certified optima used to audit runs.
#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod active_set;
pub mod algorithms;
pub mod augment;
pub mod domains;
pub mod error;
pub mod linalg;
pub mod objectives;
pub mod reference;
pub mod trace;
pub mod weaksep;

pub use active_set::ActiveSet;
pub use domains::{Domain, DomainKind, Vertex};
pub use error::{Error, Result};
pub use objectives::{Objective, ObjectiveMeta, QuadraticForm, QuadraticObjective};
pub use trace::{AnswerKind, IterationRecord, RunTrace};
pub use weaksep::{OracleCache, OracleStats, SeparationAnswer, SeparationOutcome};
