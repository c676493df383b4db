//! Experiment harness for `lazycg-core`: TOML experiment configs, CSV
//! traces and a post-hoc auditor.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod runner;
pub mod tracefile;
pub mod verify;
