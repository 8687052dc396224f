use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};
use crate::params::PhysParams;
use crate::state::FluidState;

use super::{OuterBoundary, Reconstruction, SchemeConfig, Tendency, ViscousTreatment};

/// Ghost layers on each side of the grid.
const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Mass added by clipping negative densities to zero during the step.
    pub clipped_mass: f64,
    /// Weighted momentum `sum mom x V` removed by holding cells below the cutoff at
    /// zero momentum, including the viscous force those cells would have received.
    pub vacuum_moment: f64,
}

/// Discrete operator and time stepper bound to one grid and parameter set.
///
/// The vacuum cutoff is `rho_cut * max(rho_0)` and the clip budget is relative to
/// the initial mass, so both are fixed at construction from the initial state.
#[derive(Debug, Clone)]
pub struct Solver<'g> {
    params: PhysParams,
    grid: &'g Grid,
    cfg: SchemeConfig,
    cutoff: f64,
    initial_mass: f64,
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Velocity multiplier of the outer ghost cell.
fn ghost_factor(boundary: OuterBoundary) -> f64 {
    match boundary {
        OuterBoundary::Vacuum => 0.0,
        OuterBoundary::Reflecting => -1.0,
    }
}

impl<'g> Solver<'g> {
    pub fn new(
        params: PhysParams,
        grid: &'g Grid,
        cfg: SchemeConfig,
        initial: &FluidState,
    ) -> Result<Self> {
        cfg.validate()?;
        if params.n() != grid.dimension() {
            return Err(Error::InvalidParameter(format!(
                "dimension n = {} does not match the {:?} grid",
                params.n(),
                grid.geometry()
            )));
        }
        if initial.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "state has {} cells, grid has {}",
                initial.len(),
                grid.len()
            )));
        }
        initial.check_finite()?;
        Ok(Self {
            params,
            grid,
            cfg,
            cutoff: cfg.rho_cut * initial.max_density(),
            initial_mass: grid.integrate(&initial.rho),
        })
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Absolute density below which the velocity is taken to be zero.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    pub fn velocity(&self, state: &FluidState) -> Vec<f64> {
        state.velocity(self.cutoff)
    }

    fn is_active(&self, rho: f64) -> bool {
        rho > self.cutoff && rho > 0.0
    }

    /// Density and velocity padded with ghost cells.
    fn extend(&self, rho: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = rho.len();
        let mut re = vec![0.0; n + 2 * GHOSTS];
        let mut ue = vec![0.0; n + 2 * GHOSTS];
        re[GHOSTS..GHOSTS + n].copy_from_slice(rho);
        ue[GHOSTS..GHOSTS + n].copy_from_slice(u);
        let reflect_lower = match self.grid.geometry() {
            Geometry::Radial2D => true,
            Geometry::Cartesian1D => self.cfg.boundary == OuterBoundary::Reflecting,
        };
        let reflect_upper = self.cfg.boundary == OuterBoundary::Reflecting;
        for k in 0..GHOSTS {
            let (lo, lo_src) = (GHOSTS - 1 - k, GHOSTS + k);
            let (hi, hi_src) = (GHOSTS + n + k, GHOSTS + n - 1 - k);
            if reflect_lower {
                re[lo] = re[lo_src];
                ue[lo] = -ue[lo_src];
            }
            if reflect_upper {
                re[hi] = re[hi_src];
                ue[hi] = -ue[hi_src];
            }
        }
        (re, ue)
    }

    /// Convective and pressure part of the right-hand side.
    fn hyperbolic_rhs(&self, state: &FluidState, u: &[f64]) -> Tendency {
        let n = state.len();
        let a = self.params.a();
        let c = self.params.sound_speed();
        let h = self.grid.h();
        let cc = self.grid.center_metric();
        let cf = self.grid.face_metric();
        let (re, ue) = self.extend(&state.rho, u);

        let (sr, su): (Vec<f64>, Vec<f64>) = match self.cfg.reconstruction {
            Reconstruction::FirstOrder => (vec![0.0; re.len()], vec![0.0; re.len()]),
            Reconstruction::Muscl => {
                let mut sr = vec![0.0; re.len()];
                let mut su = vec![0.0; re.len()];
                for j in 1..re.len() - 1 {
                    sr[j] = minmod(re[j] - re[j - 1], re[j + 1] - re[j]);
                    su[j] = minmod(ue[j] - ue[j - 1], ue[j + 1] - ue[j]);
                }
                (sr, su)
            }
        };

        // Face f separates cells f-1 and f.
        let mut mass_flux = vec![0.0; n + 1];
        let mut mom_flux = vec![0.0; n + 1];
        for f in 0..=n {
            let jl = f + GHOSTS - 1;
            let jr = f + GHOSTS;
            let rl = re[jl] + 0.5 * sr[jl];
            let rr = re[jr] - 0.5 * sr[jr];
            let ul = ue[jl] + 0.5 * su[jl];
            let ur = ue[jr] - 0.5 * su[jr];
            let ml = rl * ul;
            let mr = rr * ur;
            let s = ul.abs().max(ur.abs()) + c;
            mass_flux[f] = 0.5 * (ml + mr) - 0.5 * s * (rr - rl);
            let pressure = 0.5 * a * (re[jl] + re[jr]);
            mom_flux[f] = 0.5 * (ml * ul + mr * ur) - 0.5 * s * (mr - ml) + pressure;
        }

        let mut out = Tendency::zeros(n);
        for i in 0..n {
            let scale = 1.0 / (cc[i] * h);
            out.rho[i] = -(cf[i + 1] * mass_flux[i + 1] - cf[i] * mass_flux[i]) * scale;
            out.mom[i] = -(cf[i + 1] * mom_flux[i + 1] - cf[i] * mom_flux[i]) * scale;
        }
        if self.grid.geometry() == Geometry::Radial2D {
            // Hoop term of the pressure in the conservative radial form.
            for i in 0..n {
                out.mom[i] += a * state.rho[i] / cc[i];
            }
        }
        out
    }

    /// Face values of the reduced divergence `(1/c) d(c u)/dx`, `len() + 1` entries.
    ///
    /// The face at `r = 0` carries zero weight and is set to zero.
    pub(crate) fn face_divergence(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h = self.grid.h();
        let cc = self.grid.center_metric();
        let cf = self.grid.face_metric();
        let g = ghost_factor(self.cfg.boundary);
        let mut div = vec![0.0; n + 1];
        for f in 1..n {
            div[f] = (cc[f] * u[f] - cc[f - 1] * u[f - 1]) / (cf[f] * h);
        }
        div[0] = match self.grid.geometry() {
            Geometry::Cartesian1D => (u[0] - g * u[0]) / h,
            Geometry::Radial2D => 0.0,
        };
        let c_ghost = self.outer_ghost_metric();
        div[n] = (c_ghost * g * u[n - 1] - cc[n - 1] * u[n - 1]) / (cf[n] * h);
        div
    }

    fn outer_ghost_metric(&self) -> f64 {
        match self.grid.geometry() {
            Geometry::Cartesian1D => 1.0,
            Geometry::Radial2D => self.grid.extent() + 0.5 * self.grid.h(),
        }
    }

    /// Viscous force per unit volume, `(lambda + 2 mu) d/dx div`, for velocity `u`.
    fn viscous_force(&self, u: &[f64]) -> Vec<f64> {
        let nu = self.params.bulk_viscosity();
        let h = self.grid.h();
        let div = self.face_divergence(u);
        (0..u.len())
            .map(|i| nu * (div[i + 1] - div[i]) / h)
            .collect()
    }

    /// Full semi-discrete right-hand side: convection, pressure and viscosity.
    pub fn compute_rhs(&self, state: &FluidState) -> Result<Tendency> {
        state.check_finite()?;
        let u = self.velocity(state);
        let mut out = self.hyperbolic_rhs(state, &u);
        for (m, v) in out.mom.iter_mut().zip(self.viscous_force(&u)) {
            *m += v;
        }
        Ok(out)
    }

    /// Stable step size: `cfl * min(h / max(|u| + sqrt a), h^2 rho_min / (2 (lambda + 2 mu)))`
    /// over active cells. The viscous bound only applies to explicit viscosity.
    pub fn cfl_dt(&self, state: &FluidState) -> Result<f64> {
        state.check_finite()?;
        let c = self.params.sound_speed();
        let mut max_speed: f64 = 0.0;
        let mut min_rho = f64::INFINITY;
        for (&r, &m) in state.rho.iter().zip(&state.mom) {
            if self.is_active(r) {
                max_speed = max_speed.max((m / r).abs() + c);
                min_rho = min_rho.min(r);
            }
        }
        if !min_rho.is_finite() {
            return Err(Error::AllVacuum);
        }
        let h = self.grid.h();
        let mut dt = h / max_speed;
        if self.cfg.viscous == ViscousTreatment::Explicit {
            dt = dt.min(h * h * min_rho / (2.0 * self.params.bulk_viscosity()));
        }
        Ok(self.cfg.cfl * dt)
    }

    /// Backward Euler viscous update of `mom` with density `rho` held fixed.
    ///
    /// Solved for the velocity on active cells in the symmetric form obtained by
    /// scaling row `i` with the metric `c_i`; inactive cells are held at `u = 0`.
    ///
    /// Returns the weighted momentum removed from inactive cells.
    fn implicit_viscous(&self, rho: &[f64], mom: &mut [f64], dt: f64) -> f64 {
        let n = rho.len();
        let h = self.grid.h();
        let cc = self.grid.center_metric();
        let cf = self.grid.face_metric();
        let k = dt * self.params.bulk_viscosity() / (h * h);
        let g = ghost_factor(self.cfg.boundary);
        let active: Vec<bool> = rho.iter().map(|&r| self.is_active(r)).collect();

        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let ci = cc[i];
            let mut d = ci * rho[i];
            // face i + 1/2
            if i + 1 < n {
                d += k * ci * ci / cf[i + 1];
                if active[i + 1] {
                    upper[i] = -k * ci * cc[i + 1] / cf[i + 1];
                }
            } else {
                d += k * ci * (ci - g * self.outer_ghost_metric()) / cf[n];
            }
            // face i - 1/2
            if i > 0 {
                d += k * ci * ci / cf[i];
                if active[i - 1] {
                    lower[i] = -k * ci * cc[i - 1] / cf[i];
                }
            } else if self.grid.geometry() == Geometry::Cartesian1D {
                d += k * (1.0 - g);
            }
            diag[i] = d;
            rhs[i] = ci * mom[i];
        }
        let mut u = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for i in 0..n {
            if !active[i] {
                u[i] = 0.0;
            }
        }
        let force = self.viscous_force(&u);
        let mut removed = 0.0;
        for i in 0..n {
            if active[i] {
                mom[i] = rho[i] * u[i];
            } else {
                removed += self.moment_weight(i) * (mom[i] + dt * force[i]);
                mom[i] = 0.0;
            }
        }
        removed
    }

    /// `x_i V_i`, the weight of cell `i` in the weighted momentum.
    fn moment_weight(&self, i: usize) -> f64 {
        self.grid.centers()[i] * self.grid.volumes()[i]
    }

    /// One forward Euler stage of size `dt`, followed by the implicit viscous solve when
    /// configured. Returns the clipped mass and the weighted momentum removed in
    /// vacuum.
    fn stage(&self, state: &FluidState, dt: f64) -> Result<(FluidState, f64, f64)> {
        let tendency = match self.cfg.viscous {
            ViscousTreatment::Explicit => self.compute_rhs(state)?,
            ViscousTreatment::Implicit => {
                state.check_finite()?;
                let u = self.velocity(state);
                self.hyperbolic_rhs(state, &u)
            }
        };
        let n = state.len();
        let mut rho = vec![0.0; n];
        let mut mom = vec![0.0; n];
        let mut clipped = 0.0;
        let vol = self.grid.volumes();
        for i in 0..n {
            rho[i] = state.rho[i] + dt * tendency.rho[i];
            mom[i] = state.mom[i] + dt * tendency.mom[i];
            if rho[i] < 0.0 {
                clipped -= rho[i] * vol[i];
                rho[i] = 0.0;
            }
        }
        let mut removed = 0.0;
        if self.cfg.viscous == ViscousTreatment::Implicit {
            removed += self.implicit_viscous(&rho, &mut mom, dt);
        }
        removed += self.clear_vacuum_momentum(&rho, &mut mom);
        let next = FluidState {
            t: state.t + dt,
            rho,
            mom,
        };
        next.check_finite()?;
        Ok((next, clipped, removed))
    }

    /// Zeroes momentum below the cutoff; returns the weighted momentum removed.
    fn clear_vacuum_momentum(&self, rho: &[f64], mom: &mut [f64]) -> f64 {
        let mut removed = 0.0;
        for i in 0..rho.len() {
            if !self.is_active(rho[i]) {
                removed += self.moment_weight(i) * mom[i];
                mom[i] = 0.0;
            }
        }
        removed
    }

    /// Two-stage SSP Runge-Kutta step of size `dt`.
    pub fn step_with_dt(&self, state: &FluidState, dt: f64) -> Result<(FluidState, StepReport)> {
        let (first, clip1, removed1) = self.stage(state, dt)?;
        let (second, clip2, removed2) = self.stage(&first, dt)?;
        let n = state.len();
        let mut rho = vec![0.0; n];
        let mut mom = vec![0.0; n];
        for i in 0..n {
            rho[i] = 0.5 * (state.rho[i] + second.rho[i]);
            mom[i] = 0.5 * (state.mom[i] + second.mom[i]);
        }
        let removed3 = self.clear_vacuum_momentum(&rho, &mut mom);
        let clipped = 0.5 * clip1 + 0.5 * clip2;
        let budget = self.cfg.clip_budget * self.initial_mass;
        if clipped > budget {
            let (cell, worst) = first
                .rho
                .iter()
                .zip(&second.rho)
                .map(|(a, b)| a.min(*b))
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, r)| {
                        if r < acc.1 {
                            (i, r)
                        } else {
                            acc
                        }
                    },
                );
            return Err(Error::ClipBudgetExceeded {
                clipped,
                budget,
                t: state.t,
                cell,
                rho: worst,
            });
        }
        Ok((
            FluidState {
                t: state.t + dt,
                rho,
                mom,
            },
            StepReport {
                dt,
                clipped_mass: clipped,
                vacuum_moment: 0.5 * (removed1 + removed2) + removed3,
            },
        ))
    }

    /// Step with the CFL-limited `dt`.
    pub fn step(&self, state: &FluidState) -> Result<(FluidState, StepReport)> {
        let dt = self.cfl_dt(state)?;
        self.step_with_dt(state, dt)
    }
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
