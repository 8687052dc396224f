use crate::error::{Error, Result};

/// Density and momentum density per cell at time `t`.
///
/// In the radial geometry `mom` holds `rho * ubar`, the radial component of the
/// momentum of the field `u = ubar(r) x / r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
}

impl FluidState {
    pub fn new(t: f64, rho: Vec<f64>, mom: Vec<f64>) -> Result<Self> {
        if rho.len() != mom.len() {
            return Err(Error::InvalidInitialData(format!(
                "density has {} cells but momentum has {}",
                rho.len(),
                mom.len()
            )));
        }
        let state = Self { t, rho, mom };
        state.check_finite()?;
        if let Some(i) = state.rho.iter().position(|&r| r < 0.0) {
            return Err(Error::InvalidInitialData(format!(
                "negative density {} at cell {i}",
                state.rho[i]
            )));
        }
        if let Some(i) = (0..state.len()).find(|&i| state.rho[i] == 0.0 && state.mom[i] != 0.0) {
            return Err(Error::InvalidInitialData(format!(
                "vacuum cell {i} carries momentum {}",
                state.mom[i]
            )));
        }
        Ok(state)
    }

    pub fn vacuum(cells: usize) -> Self {
        Self {
            t: 0.0,
            rho: vec![0.0; cells],
            mom: vec![0.0; cells],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// First non-finite cell, density checked before momentum.
    pub fn check_finite(&self) -> Result<()> {
        if let Some(cell) = self.rho.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "rho",
                cell,
                t: self.t,
            });
        }
        if let Some(cell) = self.mom.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "mom",
                cell,
                t: self.t,
            });
        }
        Ok(())
    }

    pub fn max_density(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }

    /// Velocity `mom / rho` where `rho > cutoff`, zero elsewhere.
    pub fn velocity(&self, cutoff: f64) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.mom)
            .map(|(&r, &m)| reconstruct_velocity(r, m, cutoff))
            .collect()
    }
}

#[inline]
pub fn reconstruct_velocity(rho: f64, mom: f64, cutoff: f64) -> f64 {
    if rho > cutoff && rho > 0.0 {
        mom / rho
    } else {
        0.0
    }
}
