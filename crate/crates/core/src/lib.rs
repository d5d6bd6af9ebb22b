//! Single-cell downlink scheduling simulator.
//!
//! A static set of users sits in one cell served by one base station. Each
//! slot the [`channel`] model produces every user's SNR and achievable rate,
//! one scheduler from [`sched`] serves exactly one user, and [`metrics`]
//! keeps the delivered-bits ledger and the Jain fairness index. [`engine`]
//! drives the slot loop and policy comparisons; [`cli`] holds the config
//! format and the CSV/SVG writers used by the `cellsched` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod sched;

pub use engine::{
    compare_policies, run, run_at, run_comparison, Comparison, ComparisonRow, SimConfig, SimResult,
};
pub use error::{Error, Result};
pub use sched::Policy;
