//! Exact additive characters and decoupled-pair integrals.

mod cyclo;
mod decouple;

pub use cyclo::{CycloValue, MAX_ORDER};
pub use decouple::{
    decouple_integral, eval_character, verify_decoupled_grid, Case, CharacterSpec, DecoupleValue, GridEntry,
    GridReport, Hypotheses,
};
