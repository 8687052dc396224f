//! Finite-volume discretization of the isothermal system
//!
//! ```text
//! rho_t + div(rho u) = 0
//! (rho u)_t + div(rho u (x) u) + a grad rho = mu Lap u + (lambda + mu) grad div u
//! ```
//!
//! on the line and for radial fields in the plane. Convective fluxes use local
//! Lax-Friedrichs with wave speed `|u| + sqrt(a)`, the pressure gradient is
//! central, and the viscous operator `(lambda + 2 mu) d/dr[(1/r) d/dr(r u)]` uses
//! the compact face stencil. Time stepping is two-stage SSP Runge-Kutta; the
//! viscous part is applied either explicitly inside each stage or by a backward
//! Euler solve after each stage's convective update.

mod run;
mod scheme;

pub use run::{run, RunOutcome, RunResult, Sink, TimeSeries};
pub use scheme::{Solver, StepReport};

use crate::error::{Error, Result};

/// How the viscous term enters each Runge-Kutta stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscousTreatment {
    /// Backward Euler on the velocity with frozen density; the step size is
    /// limited by the convective bound only.
    Implicit,
    /// Part of the explicit right-hand side; the step also obeys the viscous bound.
    Explicit,
}

/// Face reconstruction for the convective fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reconstruction {
    FirstOrder,
    /// Piecewise-linear density and velocity with minmod slopes.
    Muscl,
}

/// Ghost cells beyond the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterBoundary {
    /// `rho = 0`, `u = 0`.
    Vacuum,
    /// Mirror density, reversed velocity. Used for steady-state checks.
    Reflecting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl: f64,
    /// Vacuum cutoff as a fraction of the maximal initial density.
    pub rho_cut: f64,
    pub t_end: f64,
    /// Diagnostics cadence in steps.
    pub output_every: usize,
    pub viscous: ViscousTreatment,
    pub reconstruction: Reconstruction,
    pub boundary: OuterBoundary,
    /// Largest admissible clipped (negative) mass per step, relative to the initial mass.
    pub clip_budget: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            rho_cut: 1e-10,
            t_end: 0.1,
            output_every: 1,
            viscous: ViscousTreatment::Implicit,
            reconstruction: Reconstruction::Muscl,
            boundary: OuterBoundary::Vacuum,
            clip_budget: 1e-10,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.rho_cut >= 0.0 && self.rho_cut < 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "rho_cut must lie in [0, 1e-3), got {}",
                self.rho_cut
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidParameter(
                "output_every must be at least 1".into(),
            ));
        }
        if !(self.clip_budget >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clip budget must be non-negative, got {}",
                self.clip_budget
            )));
        }
        Ok(())
    }
}

/// Per-cell time derivatives of density and momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
}

impl Tendency {
    pub fn zeros(cells: usize) -> Self {
        Self {
            rho: vec![0.0; cells],
            mom: vec![0.0; cells],
        }
    }
}
