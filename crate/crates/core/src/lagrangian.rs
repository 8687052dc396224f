//! Particle paths `dx/dt = u(x, t)`, the support of the density, and the exterior
//! equation the velocity satisfies where there is no mass.
//!
//! In the radial geometry a particle position is its radius; all markers on a
//! circle follow the same radial path.

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};
use crate::state::FluidState;

/// Markers seeded at the edge of the initial support.
pub const BOUNDARY_SEEDS: usize = 64;
/// Markers inside and outside the initial support.
pub const PROBES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    Boundary,
    Interior,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    seeds: Vec<f64>,
    positions: Vec<f64>,
    kinds: Vec<SeedKind>,
    /// Time at which the particle left the domain, if it did.
    escaped: Vec<Option<f64>>,
}

impl ParticleSet {
    pub fn new(seeds: Vec<f64>, kinds: Vec<SeedKind>) -> Result<Self> {
        if seeds.len() < 2 {
            return Err(Error::InvalidInitialData(format!(
                "need at least 2 particles, got {}",
                seeds.len()
            )));
        }
        if seeds.len() != kinds.len() {
            return Err(Error::InvalidInitialData(
                "one seed kind per particle required".into(),
            ));
        }
        if let Some(i) = seeds.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInitialData(format!("seed {i} is not finite")));
        }
        Ok(Self {
            positions: seeds.clone(),
            escaped: vec![None; seeds.len()],
            seeds,
            kinds,
        })
    }

    /// 64 seeds on `|x| = R`, 16 interior and 16 exterior probes spaced evenly in
    /// `(0, R)` and `(R, L)`. In 1D the seeds alternate between the two sides.
    pub fn standard(geometry: Geometry, radius: f64, extent: f64) -> Result<Self> {
        let sign = |k: usize| match geometry {
            Geometry::Cartesian1D if k % 2 == 1 => -1.0,
            _ => 1.0,
        };
        let mut seeds = Vec::with_capacity(BOUNDARY_SEEDS + 2 * PROBES);
        let mut kinds = Vec::with_capacity(seeds.capacity());
        for k in 0..BOUNDARY_SEEDS {
            seeds.push(sign(k) * radius);
            kinds.push(SeedKind::Boundary);
        }
        let frac = |k: usize| (k + 1) as f64 / (PROBES + 1) as f64;
        for k in 0..PROBES {
            seeds.push(sign(k) * radius * frac(k));
            kinds.push(SeedKind::Interior);
        }
        for k in 0..PROBES {
            seeds.push(sign(k) * (radius + (extent - radius) * frac(k)));
            kinds.push(SeedKind::Exterior);
        }
        Self::new(seeds, kinds)
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn seeds(&self) -> &[f64] {
        &self.seeds
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn kinds(&self) -> &[SeedKind] {
        &self.kinds
    }

    pub fn escaped(&self) -> &[Option<f64>] {
        &self.escaped
    }

    /// Largest `| |x(t)| - |x_bar| |` over particles of the given kind.
    pub fn max_drift(&self, kind: SeedKind) -> f64 {
        (0..self.len())
            .filter(|&i| self.kinds[i] == kind)
            .map(|i| (self.positions[i].abs() - self.seeds[i].abs()).abs())
            .fold(0.0, f64::max)
    }

    /// One classical Runge-Kutta step from `t` to `t + dt`. `velocity(x, theta)`
    /// samples the field at position `x` and time `t + theta dt`. A particle whose
    /// new position leaves `[-L, L]` (or `[0, L]`) keeps its old position and is
    /// flagged; its index is returned.
    pub fn advect<F>(&mut self, t: f64, dt: f64, extent: f64, velocity: F) -> Vec<usize>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut left = Vec::new();
        for i in 0..self.len() {
            if self.escaped[i].is_some() {
                continue;
            }
            let x = self.positions[i];
            let k1 = velocity(x, 0.0);
            let k2 = velocity(x + 0.5 * dt * k1, 0.5);
            let k3 = velocity(x + 0.5 * dt * k2, 0.5);
            let k4 = velocity(x + dt * k3, 1.0);
            let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if next.is_finite() && next.abs() <= extent {
                self.positions[i] = next;
            } else {
                self.escaped[i] = Some(t + dt);
                left.push(i);
            }
        }
        left
    }
}

/// Piecewise-linear interpolation of cell values `u` at `x`.
///
/// Ghost values are `0` half a cell beyond the outer boundary (and the lower one in
/// 1D); in the radial geometry the value at `-h/2` is `-u_0`, so the field is odd
/// through the origin. Zero outside the domain. Radial samples use `|x|`.
pub fn sample_linear(grid: &Grid, u: &[f64], x: f64) -> f64 {
    let h = grid.h();
    let n = u.len();
    let pos = match grid.geometry() {
        Geometry::Cartesian1D => x,
        Geometry::Radial2D => x.abs(),
    };
    if pos < grid.lower() || pos > grid.extent() {
        return 0.0;
    }
    let s = (pos - grid.lower()) / h - 0.5;
    let i0 = s.floor();
    let w = s - i0;
    let value = |i: isize| -> f64 {
        if i < 0 {
            match grid.geometry() {
                Geometry::Cartesian1D => 0.0,
                Geometry::Radial2D => -u[0],
            }
        } else if i as usize >= n {
            0.0
        } else {
            u[i as usize]
        }
    };
    let i0 = i0 as isize;
    (1.0 - w) * value(i0) + w * value(i0 + 1)
}

/// Linear-in-time sampler between two stored velocity fields.
pub fn sampler<'a>(
    grid: &'a Grid,
    u_old: &'a [f64],
    u_new: &'a [f64],
) -> impl Fn(f64, f64) -> f64 + 'a {
    move |x, theta| {
        (1.0 - theta) * sample_linear(grid, u_old, x) + theta * sample_linear(grid, u_new, x)
    }
}

/// Largest `|x_i|` over cells with `rho_i > threshold`; `0` if there are none.
pub fn support_radius(state: &FluidState, grid: &Grid, threshold: f64) -> f64 {
    state
        .rho
        .iter()
        .zip(grid.centers())
        .filter(|(&r, _)| r > threshold)
        .map(|(_, x)| x.abs())
        .fold(0.0, f64::max)
}

/// Mass in cells with `|x_i| > radius`.
pub fn exterior_mass(state: &FluidState, grid: &Grid, radius: f64) -> f64 {
    (0..state.len())
        .filter(|&i| grid.centers()[i].abs() > radius)
        .map(|i| state.rho[i] * grid.volumes()[i])
        .sum()
}

/// Largest `|u_i|` over cells with `|x_i| > radius`.
pub fn max_exterior_speed(u: &[f64], grid: &Grid, radius: f64) -> f64 {
    u.iter()
        .zip(grid.centers())
        .filter(|(_, x)| x.abs() > radius)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max)
}

/// L2 norm over cells with `|x_i| > radius` of the discrete exterior operator:
/// `u_xx` in 1D and `d/dr[(1/r) d/dr(r u)]` in the radial case, both built from
/// the compact face stencil. The two end cells, which lack a neighbour, are skipped.
pub fn exterior_elliptic_residual(u: &[f64], grid: &Grid, radius: f64) -> f64 {
    let n = u.len();
    let h = grid.h();
    let cc = grid.center_metric();
    let cf = grid.face_metric();
    let div = |f: usize| (cc[f] * u[f] - cc[f - 1] * u[f - 1]) / (cf[f] * h);
    let mut sum = 0.0;
    for i in 1..n - 1 {
        if grid.centers()[i].abs() <= radius {
            continue;
        }
        let r = (div(i + 1) - div(i)) / h;
        sum += r * r * grid.volumes()[i];
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(geom: Geometry, l: f64, n: usize) -> Grid {
        Grid::build(GridSpec::new(geom, l, n)).unwrap()
    }

    #[test]
    fn standard_seed_layout() {
        let p = ParticleSet::standard(Geometry::Cartesian1D, 1.0, 2.0).unwrap();
        assert_eq!(p.len(), 96);
        assert!(p.seeds()[..64].iter().all(|x| x.abs() == 1.0));
        assert_eq!(p.seeds()[..64].iter().filter(|&&x| x < 0.0).count(), 32);
        assert!(p.seeds()[64..80].iter().all(|x| x.abs() < 1.0));
        assert!(p.seeds()[80..]
            .iter()
            .all(|x| x.abs() > 1.0 && x.abs() < 2.0));
        let p = ParticleSet::standard(Geometry::Radial2D, 1.0, 2.0).unwrap();
        assert!(p.seeds().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn rejects_degenerate_sets() {
        assert!(ParticleSet::new(vec![0.0], vec![SeedKind::Interior]).is_err());
        assert!(ParticleSet::new(
            vec![0.0, f64::NAN],
            vec![SeedKind::Interior, SeedKind::Interior]
        )
        .is_err());
    }

    #[test]
    fn constant_field_moves_rigidly() {
        let mut p = ParticleSet::new(
            vec![-0.5, 0.25],
            vec![SeedKind::Interior, SeedKind::Interior],
        )
        .unwrap();
        for k in 0..10 {
            p.advect(0.01 * k as f64, 0.01, 1.0, |_, _| 0.3);
        }
        assert!((p.positions()[0] - (-0.5 + 0.03)).abs() < 1e-15);
        assert!((p.positions()[1] - 0.28).abs() < 1e-15);
    }

    #[test]
    fn linear_field_is_fourth_order() {
        let err = |steps: usize| {
            let mut p = ParticleSet::new(vec![0.1, 0.2], vec![SeedKind::Interior; 2]).unwrap();
            let dt = 1.0 / steps as f64;
            for k in 0..steps {
                p.advect(k as f64 * dt, dt, 10.0, |x, _| x);
            }
            (p.positions()[1] - 0.2 * 1f64.exp()).abs()
        };
        let (e1, e2) = (err(10), err(20));
        let order = (e1 / e2).log2();
        assert!(order > 3.8 && order < 4.3, "order {order}");
    }

    #[test]
    fn escaping_particles_are_frozen_and_flagged() {
        let mut p = ParticleSet::new(vec![0.9, 0.0], vec![SeedKind::Exterior; 2]).unwrap();
        let left = p.advect(0.0, 0.2, 1.0, |x, _| if x > 0.5 { 1.0 } else { 0.0 });
        assert_eq!(left, vec![0]);
        assert_eq!(p.positions()[0], 0.9);
        assert_eq!(p.escaped()[0], Some(0.2));
        assert!(p.advect(0.2, 2.0, 1.0, |_, _| 1.0).contains(&1));
        assert_eq!(p.positions()[0], 0.9);
    }

    #[test]
    fn interpolation_is_exact_for_linear_interior_fields() {
        let g = grid(Geometry::Cartesian1D, 1.0, 32);
        let u: Vec<f64> = g.centers().iter().map(|x| 2.0 * x + 1.0).collect();
        for x in [-0.9, -0.3, 0.0, 0.51, 0.93] {
            assert!((sample_linear(&g, &u, x) - (2.0 * x + 1.0)).abs() < 1e-14);
        }
        assert_eq!(sample_linear(&g, &u, 1.2), 0.0);
        // at the boundary, halfway to the zero ghost
        let c = g.centers()[31];
        assert!((sample_linear(&g, &u, 1.0) - 0.5 * (2.0 * c + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn radial_interpolation_is_odd_through_origin() {
        let g = grid(Geometry::Radial2D, 1.0, 32);
        let u: Vec<f64> = g.centers().iter().map(|r| 3.0 * r).collect();
        for r in [0.0, 0.01, g.h() / 2.0, 0.4] {
            assert!((sample_linear(&g, &u, r) - 3.0 * r).abs() < 1e-14);
        }
    }

    #[test]
    fn support_radius_examples() {
        let g = grid(Geometry::Cartesian1D, 1.0, 200);
        let rho: Vec<f64> = g
            .centers()
            .iter()
            .map(|&x| (1.0 - (2.0 * x).powi(2)).max(0.0).powi(2))
            .collect();
        let s = FluidState::new(0.0, rho, vec![0.0; 200]).unwrap();
        assert!((support_radius(&s, &g, 1e-12) - 0.5).abs() <= g.h());
        assert_eq!(support_radius(&FluidState::vacuum(200), &g, 1e-12), 0.0);
    }

    #[test]
    fn exterior_residual_examples() {
        let g = grid(Geometry::Cartesian1D, 2.0, 64);
        assert_eq!(exterior_elliptic_residual(&vec![0.0; 64], &g, 1.0), 0.0);
        let u: Vec<f64> = g.centers().iter().map(|x| x * x).collect();
        let cells = (1..63).filter(|&i| g.centers()[i].abs() > 1.0).count();
        let want = 2.0 * (cells as f64 * g.h()).sqrt();
        assert!((exterior_elliptic_residual(&u, &g, 1.0) - want).abs() < 1e-10);

        let g = grid(Geometry::Radial2D, 2.0, 64);
        let u: Vec<f64> = g.centers().iter().map(|r| 1.0 / r).collect();
        assert!(exterior_elliptic_residual(&u, &g, 1.0) < 1e-10);
        let u: Vec<f64> = g.centers().iter().map(|r| r * r).collect();
        assert!(exterior_elliptic_residual(&u, &g, 1.0) > 1.0);
    }

    #[test]
    fn kernel_solution_is_not_square_integrable() {
        // int_R^L r^-2 2 pi r dr = 2 pi ln(L / R) grows without bound in L
        let r0 = 1.0;
        let mut prev = 0.0;
        for l in [2.0, 8.0, 32.0, 128.0] {
            let g = grid(Geometry::Radial2D, l, 8192);
            let sq: Vec<f64> = g
                .centers()
                .iter()
                .map(|&r| if r > r0 { 1.0 / (r * r) } else { 0.0 })
                .collect();
            let norm_sq = g.integrate(&sq);
            let want = 2.0 * std::f64::consts::PI * (l / r0).ln();
            assert!((norm_sq - want).abs() < 2e-2 * want, "L = {l}");
            assert!(norm_sq > prev);
            prev = norm_sq;
        }
    }
}
