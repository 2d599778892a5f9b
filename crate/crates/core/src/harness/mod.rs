//! Instances, exact optima, seeded trials and the counterexample demo.

pub mod demo;
pub mod instance;
pub mod opt;
pub mod trials;
pub mod verify;

pub use demo::{run_counterexample, DemoConfig, DemoSummary, DemoTrial};
pub use instance::{adversary_special, ConstraintShape, ConstraintSpec, Generator, InstanceSpec};
pub use opt::{brute_force_opt, cardinality_branch_and_bound, exact_opt, MAX_ENUMERATION};
pub use trials::{noise_seed, run_seed, run_trials, write_csv, InstanceSource, ResultRow, TrialConfig, CSV_HEADER};
pub use verify::{run_verify, Check};
