//! Pseudo-spectral solver and diagnostic toolkit for the 3D
//! incompressible Navier-Stokes equations on the periodic torus.
//!
//! The crate provides four layers:
//!
//! * [`grid`], [`fft`], [`field`] — torus discretization, real 3D
//!   transforms, and vector fields with Leray projection, 2/3-rule
//!   dealiasing, and `L^r`/`H^s` norms;
//! * [`dyadic`] — a concrete Littlewood-Paley partition of unity with
//!   shell projections and per-shell norms;
//! * [`solver`] — ETDRK4 time integration of the forced equation with
//!   exact viscous factor, plus seeded random initial data and
//!   steady-state relaxation;
//! * [`diagnostics`] and [`sync`] — time-dependent determining and
//!   dissipation wavenumbers, local Reynolds profiles, Grashof number,
//!   intermittency dimension, bound-ratio reports, and twin-solution
//!   synchronization experiments that pin low modes and measure the
//!   exponential decay of the difference.
//!
//! Binary snapshots ([`snapshot`]), experiment configs ([`config`]),
//! deterministic CSV/report emitters ([`report`]), and the command-line
//! front end ([`cli`]) tie the toolkit together.  See the crate examples
//! for runnable entry points per capability.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dyadic;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod report;
pub mod snapshot;
pub mod solver;
pub mod sync;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use field::VectorField;
pub use grid::TorusGrid;
