//! Phase structure of a bistable McKean-Vlasov diffusion with additive and
//! multiplicative noise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod density;
pub mod error;
pub mod model;
pub mod numerics;
pub mod particles;
pub mod phase;
pub mod selfconsistency;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use numerics::QuadratureSpec;
