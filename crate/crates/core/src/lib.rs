// `!(x > 0.0)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuum;
mod dd;
pub mod lattice;
pub mod error;
pub mod ode;
pub mod poles;
pub mod roots;
pub mod susy;
pub mod sweep;

pub use error::{Error, Result};
