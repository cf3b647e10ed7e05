//! Simulation and analysis of a non-adiabatic plug-flow tubular reactor with
//! mass recycle.
//!
//! Without axial dispersion every fluid element spends exactly one unit of
//! dimensionless time in the tube, so sampling the outlet at integer times
//! turns the balance PDEs into a two-dimensional discrete map on the inlet
//! state `(alpha, theta)`. The crate is organised bottom-up:
//!
//! - [`model`]: parameters, kinetics and the characteristic right-hand side.
//! - [`integrator`]: fixed-step integration of one pass through the tube,
//!   optionally with the tangent (variational) matrix.
//! - [`dynamics`]: the recycle boundary map, orbits, fixed points, periods.
//! - [`analysis`]: Lyapunov exponents, bursts, delay maps, transient chaos and
//!   regime classification.
//! - [`sweep`]: parallel, deterministic one-parameter sweeps (bifurcation data).
//! - [`io`]: key=value configuration, CSV writers/readers and run metadata.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod io;
pub mod model;
pub mod sweep;

pub use error::{Error, Result};
pub use integrator::{IntegratorConfig, Method, PassResult};
pub use model::{KineticsForm, ReactorParams, State};
