//! Exact arithmetic for the Hecke pair (Γ, Λ) built from a non-archimedean
//! local field with prime residue order.
//!
//! Elements are immutable values. Text encodings: carry-mode field elements
//! print as `a` or `a/q^e` (e.g. `3/4`), modular-mode ones as sorted
//! `position:digit` pairs (e.g. `0:1;2:1`), group elements as `(x | n)` and
//! coset keys as `[n | r]`.

mod field;
mod group;

pub use field::{digit_tuples, FieldContext, Mode, XiElem};
pub use group::{lambda_generators, CosetKey, GroupElem};
