//! Initial-data catalog: compactly supported densities and velocity profiles.
//!
//! All profiles are radial functions of `|x|`; in the radial geometry the
//! coordinate is `r >= 0` and the velocity is the radial component `ubar(r)`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};
use crate::state::FluidState;

/// Density shapes, all vanishing for `|x| >= R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityProfile {
    /// `A (1 - (|x|/R)^2)^2`
    QuarticBump { amplitude: f64 },
    /// `A (1 - |x|/R)^2`
    SquaredTent { amplitude: f64 },
    /// `A` on `|x| <= R - w`, then a quartic taper `A (1 - t^2)^2` with `t = (|x| - R + w) / w`.
    TaperedPlateau { amplitude: f64, width: f64 },
}

/// Velocity profiles; in 2D every one of them vanishes at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityProfile {
    Zero,
    /// `c x (1 - (|x|/R)^2)^2` inside the support, zero outside.
    Outward {
        scale: f64,
    },
    /// `c sin(pi x / R)`.
    Sine {
        scale: f64,
    },
}

impl fmt::Display for DensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityProfile::QuarticBump { amplitude } => write!(f, "quartic_bump(A={amplitude})"),
            DensityProfile::SquaredTent { amplitude } => write!(f, "squared_tent(A={amplitude})"),
            DensityProfile::TaperedPlateau { amplitude, width } => {
                write!(f, "tapered_plateau(A={amplitude},w={width})")
            }
        }
    }
}

impl fmt::Display for VelocityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityProfile::Zero => write!(f, "zero"),
            VelocityProfile::Outward { scale } => write!(f, "outward(c={scale})"),
            VelocityProfile::Sine { scale } => write!(f, "sine(c={scale})"),
        }
    }
}

/// Initial density and velocity with support radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub radius: f64,
    pub density: DensityProfile,
    pub velocity: VelocityProfile,
    pub geometry: Geometry,
}

/// Normalized quartic bump `(1 - s^2)^2` and its derivative in `s`, for `s = |x|/R`.
fn quartic(s: f64) -> (f64, f64) {
    if s >= 1.0 {
        (0.0, 0.0)
    } else {
        let q = 1.0 - s * s;
        (q * q, -4.0 * s * q)
    }
}

impl InitialData {
    pub fn new(
        geometry: Geometry,
        radius: f64,
        density: DensityProfile,
        velocity: VelocityProfile,
    ) -> Result<Self> {
        let data = Self {
            radius,
            density,
            velocity,
            geometry,
        };
        data.validate()?;
        Ok(data)
    }

    /// Catalog entry: quartic bump of unit amplitude at rest.
    pub fn resting_bump(geometry: Geometry, radius: f64) -> Result<Self> {
        Self::new(
            geometry,
            radius,
            DensityProfile::QuarticBump { amplitude: 1.0 },
            VelocityProfile::Zero,
        )
    }

    /// Catalog entry: quartic bump of unit amplitude moving outward with `u0 = c x bump`.
    pub fn expanding_bump(geometry: Geometry, radius: f64, scale: f64) -> Result<Self> {
        Self::new(
            geometry,
            radius,
            DensityProfile::QuarticBump { amplitude: 1.0 },
            VelocityProfile::Outward { scale },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidInitialData(format!(
                "support radius must be positive, got {}",
                self.radius
            )));
        }
        let amplitude = match self.density {
            DensityProfile::QuarticBump { amplitude } => amplitude,
            DensityProfile::SquaredTent { amplitude } => amplitude,
            DensityProfile::TaperedPlateau { amplitude, width } => {
                if !(width > 0.0 && width <= self.radius) {
                    return Err(Error::InvalidInitialData(format!(
                        "taper width must lie in (0, R], got {width}"
                    )));
                }
                amplitude
            }
        };
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::InvalidInitialData(format!(
                "density amplitude must be non-negative, got {amplitude}"
            )));
        }
        if amplitude == 0.0 {
            return Err(Error::InvalidInitialData(
                "initial density is identically zero; the density must be nontrivial".into(),
            ));
        }
        let scale = match self.velocity {
            VelocityProfile::Zero => 0.0,
            VelocityProfile::Outward { scale } | VelocityProfile::Sine { scale } => scale,
        };
        if !scale.is_finite() {
            return Err(Error::InvalidInitialData(format!(
                "velocity scale must be finite, got {scale}"
            )));
        }
        if self.geometry == Geometry::Radial2D && self.velocity(0.0) != 0.0 {
            return Err(Error::InvalidInitialData(
                "radial velocity must vanish at the origin".into(),
            ));
        }
        Ok(())
    }

    /// `rho0(x)`.
    pub fn density(&self, x: f64) -> f64 {
        self.density_with_slope(x).0
    }

    /// `(rho0(x), rho0'(x))`.
    pub fn density_with_slope(&self, x: f64) -> (f64, f64) {
        let r = self.radius;
        let s = x.abs() / r;
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        match self.density {
            DensityProfile::QuarticBump { amplitude } => {
                let (b, db) = quartic(s);
                (amplitude * b, amplitude * db * sign / r)
            }
            DensityProfile::SquaredTent { amplitude } => {
                if s >= 1.0 {
                    (0.0, 0.0)
                } else {
                    let q = 1.0 - s;
                    (amplitude * q * q, -2.0 * amplitude * q * sign / r)
                }
            }
            DensityProfile::TaperedPlateau { amplitude, width } => {
                let inner = r - width;
                if x.abs() <= inner {
                    (amplitude, 0.0)
                } else {
                    let (b, db) = quartic((x.abs() - inner) / width);
                    (amplitude * b, amplitude * db * sign / width)
                }
            }
        }
    }

    /// `u0(x)` (radial component in 2D).
    pub fn velocity(&self, x: f64) -> f64 {
        self.velocity_with_slope(x).0
    }

    /// `(u0(x), u0'(x))`.
    pub fn velocity_with_slope(&self, x: f64) -> (f64, f64) {
        let r = self.radius;
        match self.velocity {
            VelocityProfile::Zero => (0.0, 0.0),
            VelocityProfile::Outward { scale } => {
                let s = x.abs() / r;
                let sign = if x < 0.0 { -1.0 } else { 1.0 };
                let (b, db) = quartic(s);
                (scale * x * b, scale * (b + x * db * sign / r))
            }
            VelocityProfile::Sine { scale } => {
                let k = PI / r;
                (scale * (k * x).sin(), scale * k * (k * x).cos())
            }
        }
    }

    /// Closed-form mass where available (quartic bump and squared tent).
    pub fn exact_mass(&self) -> Option<f64> {
        let r = self.radius;
        match (self.density, self.geometry) {
            (DensityProfile::QuarticBump { amplitude }, Geometry::Cartesian1D) => {
                Some(amplitude * r * 16.0 / 15.0)
            }
            (DensityProfile::QuarticBump { amplitude }, Geometry::Radial2D) => {
                Some(amplitude * PI * r * r / 3.0)
            }
            (DensityProfile::SquaredTent { amplitude }, Geometry::Cartesian1D) => {
                Some(amplitude * r * 2.0 / 3.0)
            }
            (DensityProfile::SquaredTent { amplitude }, Geometry::Radial2D) => {
                Some(amplitude * PI * r * r / 6.0)
            }
            _ => None,
        }
    }
}

/// Midpoint samples of `rho0` and `rho0 u0` at `t = 0`.
pub fn sample_initial(data: &InitialData, grid: &Grid) -> Result<FluidState> {
    data.validate()?;
    if data.geometry != grid.geometry() {
        return Err(Error::InvalidInitialData(format!(
            "initial data geometry {:?} does not match grid {:?}",
            data.geometry,
            grid.geometry()
        )));
    }
    if data.radius >= grid.extent() {
        return Err(Error::InvalidInitialData(format!(
            "support radius {} must be smaller than the domain extent {}",
            data.radius,
            grid.extent()
        )));
    }
    let rho: Vec<f64> = grid.centers().iter().map(|&x| data.density(x)).collect();
    if let Some(i) = rho.iter().position(|&r| !(r >= 0.0)) {
        return Err(Error::InvalidInitialData(format!(
            "density sample {} at cell {i} is negative or not a number",
            rho[i]
        )));
    }
    if rho.iter().all(|&r| r == 0.0) {
        return Err(Error::InvalidInitialData(
            "sampled density vanishes on every cell".into(),
        ));
    }
    let mom = grid
        .centers()
        .iter()
        .zip(&rho)
        .map(|(&x, &r)| if r > 0.0 { r * data.velocity(x) } else { 0.0 })
        .collect();
    FluidState::new(0.0, rho, mom)
}
