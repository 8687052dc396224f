//! Finite-volume laboratory for the compressible isothermal Navier-Stokes system
//! `P = a rho` with compactly supported density, on the line and for radial flows
//! in the plane. Alongside the solver it evaluates the integral functionals whose
//! identities force finite-time breakdown of smooth solutions, and turns the
//! initial data into an explicit lifespan bound.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod initial;
pub mod lagrangian;
pub mod oracle;
pub mod params;
pub mod solver;
pub mod state;
pub mod suite;

pub use error::{Error, Result};
