//! Seeded random walks on Γ, boundary sampling in K, empirical stationary
//! measures at ball resolution and the statistics run on them.
//!
//! Boundary sampling needs a positive drift `Σ n τ(n)`: with the action
//! `(x, ϖ^n) y = x + ϖ^n y` and `|ϖ| = 1/q` this is when the series
//! `x_1 + ϖ^{M_1} x_2 + ⋯` converges.

mod ball;
mod boundary;
mod path;
mod rng;
mod stats;

pub use ball::{Ball, BallKey, BallMeasure, InvarianceWitness, ESCAPE_KEY};
pub use boundary::{
    empirical_stationary, lundberg_exponent, sample_boundary, BoundaryDiagnostics, BoundarySampler,
    EmpiricalDiagnostics, GuardParams,
};
pub use path::{sample_path, WalkRecord, WalkRecordJson};
pub use rng::{derive_seed, rng_from_seed, StepSampler, WalkRng};
pub use stats::{
    chi_square_against, contraction_curve, contraction_stat, coupling_moment, fit_geometric, invariance_stats,
    stationarity_residual, CosetStats, InvarianceReport, Residual,
};
