//! A spin-orbit coupled spin-1/2 atom in a Zeeman-like field, viewed as a
//! quantum measurement: the atom's centre of mass is a pointer that records
//! the time average of `sigma_z`.
//!
//! Everything outside [`units`] is dimensionless: lengths in units of
//! `x_so = v_so / omega`, times in units of `1 / omega`, momenta in units of
//! `1 / x_so`, and `hbar = 1`.
//!
//! Module map:
//!
//! * [`spinor`], [`grid`], [`packet`], [`units`]: domain types, grids, the
//!   Gaussian initial state and the physical-units bridge.
//! * [`spin`], [`path_sum`]: the exact per-momentum spin propagator and the
//!   discrete Feynman path sum over `sigma_z` histories.
//! * [`propagator`], [`kernel`]: the full spinor wave function by the momentum
//!   integral and by coordinate-space convolution with the kernels `xi_ij`.
//! * [`observables`]: reduced spin density matrix, spin averages, density and
//!   mean position.
//! * [`asymptotics`], [`decoherence`]: long-time formulas, the regime
//!   classifier and decoherence-law fitting.

pub mod asymptotics;
pub mod decoherence;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod observables;
pub mod packet;
pub mod path_sum;
pub mod profile;
pub mod propagator;
pub mod quadrature;
pub mod spin;
pub mod spinor;
pub mod units;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use grid::{Mass, MomentumGrid, Regime, SimParams, SpatialGrid};
pub use spin::SpinMatrix;
pub use spinor::Spinor;
