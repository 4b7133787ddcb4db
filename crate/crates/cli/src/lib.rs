//! Command-line tools for `glrt-core`: point-table formats, a Monte Carlo
//! membership-inference audit, and the `glrt` binary's commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod audit;
pub mod table;

pub use audit::{
    compare_to_theory, cutoff_grid, run_game, Adversary, AuditConfig, AuditError, Direction,
    EmpiricalRoc, RocPoint,
};
pub use table::{CurvePointTable, Report, TableMeta};
