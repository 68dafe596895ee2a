//! Exact computation in function fields of characteristic p: power towers of
//! subfields, restricted Lie algebras of derivations, and divided-power
//! differential operators, with the correspondences between them checked at
//! finite depth.

pub mod arith;
pub mod cli;
pub mod corpus;
pub mod diffops;
pub mod dsl;
pub mod error;
pub mod frobenius;
pub mod jacobson;
pub mod linalg;
pub mod subfields;

pub use arith::{FieldSpec, MultiPoly, RatFunc, DEFAULT_BUDGET};
pub use error::{Error, Result};
