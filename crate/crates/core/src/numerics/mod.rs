//! Numerical kernels shared by the rest of the crate.

mod diff;
mod gamma;
mod quadrature;
mod roots;

pub use diff::central_diff;
pub use gamma::gamma;
pub use quadrature::{integrate, integrate_interval, QuadratureSpec};
pub use roots::{find_root, Bracket};
