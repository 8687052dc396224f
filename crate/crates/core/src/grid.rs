//! Uniform cell-centered grids: the line `[-L, L]` and the radial interval `[0, L]`
//! standing for the disk of radius `L`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Cartesian1D,
    Radial2D,
}

impl Geometry {
    pub fn dimension(self) -> usize {
        match self {
            Geometry::Cartesian1D => 1,
            Geometry::Radial2D => 2,
        }
    }

    pub fn from_dimension(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Geometry::Cartesian1D),
            2 => Ok(Geometry::Radial2D),
            _ => Err(Error::InvalidGrid(format!("no geometry for dimension {n}"))),
        }
    }

    /// Lebesgue measure of the ball of radius `r` in this geometry.
    pub fn ball_measure(self, r: f64) -> f64 {
        match self {
            Geometry::Cartesian1D => 2.0 * r,
            Geometry::Radial2D => PI * r * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub geometry: Geometry,
    /// Half-width in 1D, outer radius in 2D.
    pub extent: f64,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(geometry: Geometry, extent: f64, cells: usize) -> Self {
        Self {
            geometry,
            extent,
            cells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells, got {}",
                self.cells
            )));
        }
        if !self.extent.is_finite() || self.extent <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "domain extent must be positive, got {}",
                self.extent
            )));
        }
        Ok(())
    }

    pub fn cell_width(&self) -> f64 {
        match self.geometry {
            Geometry::Cartesian1D => 2.0 * self.extent / self.cells as f64,
            Geometry::Radial2D => self.extent / self.cells as f64,
        }
    }
}

/// Cell geometry derived from a [`GridSpec`].
///
/// `center_metric` and `face_metric` are the transverse measure factors of the
/// conservative divergence: 1 in 1D, the radius in 2D. The divergence of a face
/// flux `F` in cell `i` is `(c_{i+1/2} F_{i+1/2} - c_{i-1/2} F_{i-1/2}) / (c_i h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    h: f64,
    centers: Vec<f64>,
    faces: Vec<f64>,
    volumes: Vec<f64>,
    center_metric: Vec<f64>,
    face_metric: Vec<f64>,
}

impl Grid {
    /// Builds the grid; only the cell-count floor and positivity of `L` are checked here.
    pub fn build(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self::build_unchecked(spec))
    }

    /// Same as [`Grid::build`] without the minimum cell count, for small worked examples.
    pub fn build_unchecked(spec: GridSpec) -> Self {
        let n = spec.cells;
        let h = spec.cell_width();
        // Index offset of the origin; in 1D this makes the coordinates exactly odd
        // under i -> n - 1 - i.
        let shift = match spec.geometry {
            Geometry::Cartesian1D => 0.5 * n as f64,
            Geometry::Radial2D => 0.0,
        };
        let faces: Vec<f64> = (0..=n).map(|k| (k as f64 - shift) * h).collect();
        let centers: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5 - shift) * h).collect();
        let (center_metric, face_metric, volumes) = match spec.geometry {
            Geometry::Cartesian1D => (vec![1.0; n], vec![1.0; n + 1], vec![h; n]),
            Geometry::Radial2D => (
                centers.clone(),
                faces.clone(),
                centers.iter().map(|&r| 2.0 * PI * r * h).collect(),
            ),
        };
        Self {
            spec,
            h,
            centers,
            faces,
            volumes,
            center_metric,
            face_metric,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn geometry(&self) -> Geometry {
        self.spec.geometry
    }

    pub fn dimension(&self) -> usize {
        self.spec.geometry.dimension()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> f64 {
        self.spec.extent
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Face positions, `len() + 1` entries.
    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn center_metric(&self) -> &[f64] {
        &self.center_metric
    }

    pub fn face_metric(&self) -> &[f64] {
        &self.face_metric
    }

    /// Measure of the whole computational domain: `2L` or `pi L^2`.
    pub fn domain_measure(&self) -> f64 {
        self.spec.geometry.ball_measure(self.spec.extent)
    }

    /// Lower end of the coordinate range (`-L` or `0`).
    pub fn lower(&self) -> f64 {
        self.faces[0]
    }

    /// Volume-weighted sum of a per-cell quantity.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.volumes)
            .map(|(v, vol)| v * vol)
            .sum()
    }
}
