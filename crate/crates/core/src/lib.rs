//! Time stepping for the Allen-Cahn and Cahn-Hilliard phase-field equations
//! on a doubly periodic square: Fourier pseudospectral operators, eleven
//! first- and second-order schemes, a Newton-PCG nonlinear solver, paired-step
//! adaptive control, 1D radial front analysis and the benchmark harness.
//!
//! The crate is `no_std` and needs only `alloc`. Transforms go through the
//! [`spectral::Fft1d`] trait, so a faster engine can be plugged in by a
//! std-side caller.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bench;
pub mod control;
pub mod error;
pub mod model;
pub mod radial;
pub mod solver;
pub mod spectral;
pub mod steppers;

pub use control::{ControllerConfig, RunRecord, StepRecord};
pub use error::{Error, Result, SpectralError};
pub use model::{Equation, Model, ModelSpec, Reaction};
pub use solver::{SolveStats, SolverOptions};
pub use spectral::{Field, Grid, SpectralField};
pub use steppers::{step, SchemeId, StepperState};
