//! Nelson stochastic mechanics at finite temperature in the thermo-field
//! (doubled, non-tilde/tilde) formulation.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: physical parameters and closed-form thermal scalars.
//! - [`analytic`]: the harmonic-oscillator thermal-equilibrium solution, used as
//!   the oracle for everything else.
//! - [`fields`]: velocity fields built from `Ψ = e^{R+iS}` and stationary
//!   residual checks of the osmotic, continuity, Fokker-Planck, kinematical and
//!   dynamical equations, in closed form (Taylor jets) or on uniform grids.
//! - [`sde`]: the grouped forward/backward stochastic integrators, exact
//!   stationary sampling and seeded, order-independent ensembles.
//! - [`stats`]: moments with jackknife errors, marginal histograms, chi-square
//!   tests and the finite-temperature uncertainty product.

pub mod analytic;
pub mod error;
pub mod fields;
pub mod params;
pub mod sde;
pub mod stats;

pub use analytic::{EquilibriumSolution, StationaryCovariance};
pub use error::{Error, Result};
pub use params::{PhysicalParams, ThermalPoint};
