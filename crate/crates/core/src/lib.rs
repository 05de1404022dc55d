//! Discretized nonlocal p-Laplacian evolution with bounded kernels:
//! kernels and stencils, the discrete operator, explicit and proximal time
//! stepping, a linear reference solver, and numerical audits of the
//! regularity estimates (smoothing, decay, monotonicity, contraction).

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod evolve;
pub mod operator;
pub mod oracle;
pub mod presets;
pub mod quadrature;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
