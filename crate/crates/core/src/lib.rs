//! Multi-fidelity multi-armed bandits.
//!
//! Each arm can be pulled at one of `M` fidelities. Cheaper fidelities
//! return biased observations whose means stay within a known error bound of
//! the top-fidelity mean. The crate provides:
//!
//! - [`instance`]: instance files, validation and canonical arm ordering.
//! - [`gaps`]: reward gaps, optimal fidelities and hardness measures.
//! - [`env`]: a seeded simulator that charges the cost of every pull.
//! - [`bai`]: fixed-confidence best-arm identification (LUCB with three
//!   fidelity selection procedures).
//! - [`regret`]: budgeted regret minimization by phased elimination.
//! - [`bounds`]: evaluated lower and upper bound expressions.
//! - [`harness`]: Monte-Carlo sweeps, CSV records and scaling fits.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bai;
pub mod bounds;
pub mod env;
pub mod error;
pub mod gaps;
pub mod harness;
pub mod instance;
pub mod regret;
pub mod rng;

pub use bai::{run_bai, BaiConfig, BaiResult, Procedure, TerminatedBy};
pub use bounds::{bound_report, BoundReport, BoundRow};
pub use env::{Environment, Pull};
pub use error::{Error, Result};
pub use gaps::{hardness, HardnessReport, PriorMeans};
pub use harness::{run_sweep, ExperimentPlan, Mode, SummaryRecord, SweepOptions, TrialRecord};
pub use instance::{
    load_instance, validate_instance, validate_instance_with, Consistency, Instance, InstanceSpec,
    RewardDistribution,
};
pub use regret::{run_regret, RegretConfig, RegretResult};
