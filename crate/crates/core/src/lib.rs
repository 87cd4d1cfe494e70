//! Discretization, minimization and optimality checks for scalar
//! one-dimensional non-local variational problems
//!
//! ```text
//! E(u) = ∫₀¹ ∫₀¹ W(x, u(x), (u(X) - u(x)) / (X - x)) dX dx
//! ```
//!
//! * [`grid`]: uniform grids and piecewise-linear nodal functions.
//! * [`integrand`]: densities `W` with analytic partials.
//! * [`energy`]: tensor-midpoint energy and its exact gradient.
//! * [`solver`]: first-order minimization with fixed end values.
//! * [`optimality`]: non-local divergence and principal-value residuals.
//! * [`reference`]: closed-form comparison profiles.
//! * [`cli`]: the `nlvar` command-line front end.

pub mod cli;
pub mod energy;
pub mod error;
pub mod grid;
pub mod integrand;
pub mod optimality;
pub mod reference;
pub mod solver;

pub use energy::{energy, energy_gradient, EnergyReport};
pub use error::{Error, Result};
pub use grid::{Grid1D, NodalFunction};
pub use integrand::{BuiltIn, Integrand};
pub use optimality::ResidualReport;
pub use solver::{minimize, InitPolicy, MinimizeResult, SolverConfig};
