//! Seeded Monte Carlo experiments: configuration, replication sweeps,
//! distributional tests and their on-disk reports.

pub mod config;
pub mod io;
pub mod limits;
pub mod mc;

pub use config::ExperimentSpec;
pub use limits::{run_limit_tests, LimitReport};
pub use mc::{run_mc, HorizonRecord, McOutcome, McSummary};

/// Per-replication records.
pub const RESULTS_FILE: &str = "results.csv";
/// Aggregate statistics of a Monte Carlo run.
pub const SUMMARY_FILE: &str = "summary.json";
/// Outcome of the distributional tests.
pub const KS_REPORT_FILE: &str = "ks_report.json";
/// Draws from the `alpha` limit law used by the tests.
pub const LIMIT_DRAWS_FILE: &str = "limit_draws.csv";
/// Parameters of the `alpha` limit law.
pub const LIMIT_LAW_FILE: &str = "limit_law.json";
