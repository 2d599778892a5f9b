//! Auxiliary functions guiding the local search and their estimators.

pub mod coefficients;
pub mod estimator;
pub mod phi;
pub mod surrogate;

pub use coefficients::{ln_binomial, m_coefficient, CoefficientTable, TauClass, TauClasses};
pub use estimator::{
    estimate_phi_h, estimate_phi_h_detailed, estimate_phi_h_pinned, estimate_phi_h_pinned_detailed,
    stream_rng, Estimate, EstimatorConfig, PinnedSampler, SmoothSampler,
};
pub use phi::{phi_exact_bruteforce, phi_h_coefficient_form, Surrogate, MAX_EXACT_PINNED_PHI, MAX_EXACT_SET};
pub use surrogate::{comparison_f0, surrogate_h, surrogate_h_pinned, MAX_EXACT_PINNED};
