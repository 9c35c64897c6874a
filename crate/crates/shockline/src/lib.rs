//! A numerical laboratory for outgoing viscous 3-shocks of the 1D
//! Navier-Stokes-Fourier system on the half-line.
//!
//! The crate builds traveling-wave profiles from the Rankine-Hugoniot
//! closures, integrates the outflow and impermeable-wall initial-boundary
//! value problems with a co-evolved dynamical shift, and evaluates the
//! weighted relative-entropy diagnostic stack (good terms, Y-decomposition,
//! boundary terms, dissipation balance) along each run.
//!
//! Start from the `examples/` directory: each example is a runnable
//! walkthrough of one capability (shock curves, profile construction,
//! stability runs, convergence studies, the Poincare inequality suite).
//! The thin `shockline` binary drives the same machinery from
//! configuration files.

pub mod diagnostics;
pub mod fitting;
pub mod hugoniot;
pub mod profile;
pub mod scenario;
pub mod shift;
pub mod solver;
pub mod thermo;

pub use hugoniot::ShockData;
pub use profile::ShockProfile;
pub use thermo::{GasParams, State};
