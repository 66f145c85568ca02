//! Comparison solvers and exact oracles.

mod alt_opt;
mod fixed_point;
mod gray;
mod oracle;
mod sets;

pub use alt_opt::alt_opt_solve;
pub use fixed_point::fixed_point_solve;
pub use oracle::{exhaustive_oracle, exhaustive_oracle_with_guard, oracle_guard, OracleResult};
pub use sets::{enumerate_sets, ConvergenceSets, MAX_SET_ENUMERATION_N};
