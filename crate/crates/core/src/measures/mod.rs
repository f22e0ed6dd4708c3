//! Finitely supported measures on Γ and on Γ/Λ, Λ-absorption, constructors
//! of absorbing measures, the completion map τ ↦ θ_τ, and the action of both
//! on ball measures over K.
//!
//! Weights are exact rationals throughout.

mod action;
mod completion;
mod construct;
pub mod io;
mod sparse;

pub use action::{act_ball, act_ball_coset, act_ball_elem};
pub use completion::{lambda_saturation, spread_out_check, support_is_saturated, theta_of, SpreadOutReport};
pub use construct::{
    absorb_lift, affine_step_measure, commuting_average, e_bs, e_lamp, translation_reps, PointMeasure,
};
pub use sparse::{AbsorptionCheck, CosetMeasure, OrbitWitness, SparseMeasure};
