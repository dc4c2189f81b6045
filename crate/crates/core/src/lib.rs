//! Numerical laboratory for the radial energy-critical focusing wave equation
//! `∂²ₜu − Δu − u⁵ = 0` in three space dimensions.
//!
//! * [`ground_state`]: the stationary solution `W`, energies, variational predicates.
//! * [`dalembert`]: exact radial linear waves through `f = r·v`, channels of energy.
//! * [`solver`]: method-of-lines solver with blow-up detection.
//! * [`analysis`]: concentration radii, virial quantities and related diagnostics.
//! * [`profiles`]: greedy extraction of rescaled signed ground states.
//! * [`io`]: CSV/JSON file formats shared with the command-line tool.

pub mod analysis;
pub mod dalembert;
pub mod error;
pub mod ground_state;
pub mod io;
pub mod mesh;
pub mod profile;
pub mod profiles;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{FieldState, RadialMesh, Spacing};
