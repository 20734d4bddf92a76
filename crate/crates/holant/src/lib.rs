//! Exact workbench for Boolean Holant problems over Q(ζ₈).

pub mod algebra;
pub mod dichotomy;
pub mod entanglement;
pub mod error;
pub mod families;
pub mod grid;
pub mod signature;
pub mod tractable_eval;

pub use algebra::{Mat2, Scalar};
pub use error::{Error, Result};
pub use signature::{Factor, Signature};
