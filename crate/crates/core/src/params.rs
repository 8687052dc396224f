//! Physical constants of the isothermal system: pressure law `P = a rho`,
//! viscosities `mu`, `lambda`, and the spatial dimension.

use crate::error::{Error, Result};

/// Constants `a`, `mu`, `lambda` and dimension `n` of the isothermal system.
///
/// Construction enforces `a > 0`, `mu > 0` and `lambda + (2/n) mu > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    a: f64,
    mu: f64,
    lambda: f64,
    n: usize,
}

impl PhysParams {
    pub fn new(a: f64, mu: f64, lambda: f64, n: usize) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be 1 or 2, got {n}"
            )));
        }
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pressure coefficient a must be positive, got {a}"
            )));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "viscosity mu must be positive (condition mu > 0), got {mu}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "second viscosity lambda must be finite, got {lambda}"
            )));
        }
        let margin = lambda + 2.0 / n as f64 * mu;
        if margin <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "condition lambda + (2/n) mu > 0 violated: lambda = {lambda}, mu = {mu}, n = {n} \
                 gives {margin}"
            )));
        }
        Ok(Self { a, mu, lambda, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Isothermal sound speed `sqrt(a)`.
    pub fn sound_speed(&self) -> f64 {
        self.a.sqrt()
    }

    /// Coefficient `lambda + 2 mu` of the viscous operator once `mu Lap u + (lambda+mu) grad div u`
    /// is reduced to one coordinate (1D, or radial fields in 2D).
    pub fn bulk_viscosity(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// Viscosity that bounds the cumulative gradient integral by the energy budget.
    ///
    /// In 1D both dissipation terms are `u_x^2`, so they combine to `lambda + 2 mu`
    /// (positive under the admissibility condition even when `lambda + mu < 0`).
    /// In 2D `lambda + mu > 0`, so the divergence term is dropped and `mu` remains.
    pub fn certificate_viscosity(&self) -> f64 {
        match self.n {
            1 => self.bulk_viscosity(),
            _ => self.mu,
        }
    }
}
