//! Itô integration for adapted integrands.
//!
//! The classical Itô integral is defined for predictable integrands. When the
//! time kernel of the Doléans measure is absolutely continuous, every adapted
//! integrand agrees `μ`-almost everywhere with a predictable one, so the
//! integral extends to adapted integrands by integrating that predictable
//! version. This crate makes the construction computable:
//!
//! * [`path`], [`grid`], [`measure`]: exact step paths, time grids and
//!   per-realization `L^p(μ)` integrals.
//! * [`drivers`]: seeded Wiener, Q-Wiener, Poisson and Poisson random measure
//!   simulators.
//! * [`projection`]: left-limit projection, dyadic shift and truncation.
//! * [`integrate`]: elementary Itô sums, the extended integral, pathwise
//!   Lebesgue–Stieltjes integrals, Q-Wiener and compensated-PRM integrals.
//! * [`spde`]: mild solutions of diagonal semilinear SPDEs.
//! * [`verify`]: Monte Carlo and exact checks of the integral's properties.

pub mod drivers;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod measure;
pub mod path;
pub mod projection;
pub mod spde;
pub mod verify;
pub mod vector;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use measure::{exact_lp_integral, Density, DoleansMeasure};
pub use path::{FvPath, SampledPath, Side, StepPath};
pub use vector::Vector;
