//! Monotone submodular maximization when every value query is corrupted by
//! consistent multiplicative noise.

pub mod auxiliary;
pub mod error;
pub mod harness;
pub mod local_search;
pub mod matroid;
pub mod noise;
pub mod objective;
pub mod solvers;
pub mod subset;

pub use error::{Error, Result};
pub use matroid::{Constraint, ExplicitMatroid, PartitionMatroid};
pub use noise::{sub_exponential_norm, NoiseDistribution, NoisyOracle};
pub use objective::{verify_submodular_monotone, Objective, SetFunction, Violation};
pub use subset::{Element, Subset};
pub use local_search::{choose_parameters, iteration_cap, nls, ApproxOracle, NlsConfig, NlsTrace};
pub use solvers::{solve, solve_with, Algorithm, Regime, SolverConfig, SolverReport};
