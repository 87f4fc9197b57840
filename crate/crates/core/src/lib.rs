//! Pseudospectral solvers for periodic reaction-diffusion systems.
//!
//! Fields live on a uniform periodic grid over `[-L, L)` in one or two
//! dimensions. Diffusion is treated exactly in Fourier space and the reaction
//! terms are advanced with integrating-factor Runge-Kutta or exponential time
//! differencing schemes. A finite-difference-free ADI solver built on a dense
//! spectral differentiation matrix is provided for comparison.

pub mod error;
pub mod adi;
pub mod grid;
pub mod models;
pub mod phi;
pub mod postprocess;
pub mod state;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Axis, GridSpec};
pub use models::{describe, list_models, ModelKind, ModelSpec, Reaction};
pub use state::State;
pub use stepper::{integrate, IntegrateOptions, RunSummary, Scheme, StepControl, StepSize};
