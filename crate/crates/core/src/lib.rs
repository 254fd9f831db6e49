//! Convergence analysis for parallel-in-time multigrid (Parareal/MGRIT) on
//! hyperbolic model problems.
//!
//! Three predictors of the worst-case error reduction `‖E^k‖` are provided:
//! space-time local Fourier analysis ([`lfa`]), semi-algebraic mode analysis
//! over the finite time grid ([`sama`]) and closed-form two-level reduction
//! bounds ([`ra`]). [`mgrit`] is a sequential reference solver that measures
//! actual error reduction for the advection problem.
//!
//! The crate is `no_std` with `alloc`. The optional `rayon` feature
//! parallelizes frequency sweeps.

#![cfg_attr(not(any(test, feature = "rayon")), no_std)]

extern crate alloc;

mod fmath;

pub mod advection;
pub mod elasticity;
pub mod hierarchy;
pub mod lfa;
pub mod matrix;
pub mod mgrit;
pub mod ra;
pub mod sama;
pub mod sweep;
pub mod symbols;

pub use hierarchy::{Cycle, Hierarchy, HierarchyError, MethodSpec, Relaxation};
pub use matrix::{CMatrix, MatrixError};
pub use num_complex::Complex64;
pub use sweep::{Frequency, PredictionSeries, SeriesPoint};
pub use symbols::{LevelSymbols, SymbolSource};
