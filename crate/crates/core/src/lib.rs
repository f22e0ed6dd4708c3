pub mod algebra;
pub mod characters;
pub mod cli;
pub mod error;
pub mod measures;
pub mod rational;
pub mod spectrum;
pub mod walk;

pub use error::{Error, Result};
