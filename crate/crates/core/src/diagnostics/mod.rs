//! Integral functionals of a discrete state and the time-integrated identities they
//! satisfy along a solution: mass conservation, the growth law of the weighted
//! momentum `M(t) = int rho u.x`, the energy balance with the `rho ln rho` term,
//! and the sup-norm bound on `u.x` by the gradient integral.
//!
//! Derivatives use the solver's compact face stencil. At the two ends of the grid
//! the face slope is extrapolated from the interior and weighted by half a cell,
//! so linear fields are differentiated exactly; in runs the velocity vanishes
//! there and the boundary faces contribute nothing.

mod certificate;

pub use certificate::{
    blowup_certificate, cubic_positive_root, poincare_constant, step4_sides, Certificate,
};

use std::f64::consts::PI;

use crate::grid::{Geometry, Grid};
use crate::params::PhysParams;
use crate::state::FluidState;

/// Exact CSV header of a diagnostics row.
pub const CSV_HEADER: &str = "t,mass,M,kinetic,entropy,cum_kinetic,dissipation,cum_dissipation,\
grad_sq,mom_residual,energy_residual,support_radius,poincare_lhs,poincare_rhs";

/// `sum rho_i V_i`.
pub fn mass(state: &FluidState, grid: &Grid) -> f64 {
    grid.integrate(&state.rho)
}

/// `int rho u.x dx`; in the radial geometry `u.x = ubar r`.
pub fn weighted_momentum(state: &FluidState, grid: &Grid) -> f64 {
    state
        .mom
        .iter()
        .zip(grid.centers())
        .zip(grid.volumes())
        .map(|((m, x), v)| m * x * v)
        .sum()
}

#[inline]
fn rho_ln_rho(rho: f64) -> f64 {
    if rho > 0.0 {
        rho * rho.ln()
    } else {
        0.0
    }
}

/// `(1/2 int rho |u|^2, int rho ln rho)` with `0 ln 0 = 0`.
pub fn kinetic_and_entropy(state: &FluidState, grid: &Grid, cutoff: f64) -> (f64, f64) {
    let u = state.velocity(cutoff);
    let mut kinetic = 0.0;
    let mut entropy = 0.0;
    for i in 0..state.len() {
        let vol = grid.volumes()[i];
        kinetic += 0.5 * state.rho[i] * u[i] * u[i] * vol;
        entropy += rho_ln_rho(state.rho[i]) * vol;
    }
    (kinetic, entropy)
}

/// `int [rho ln(rho + eps) + eps ln(rho + eps)] dx` over the whole grid.
pub fn entropy_regularized(state: &FluidState, grid: &Grid, eps: f64) -> f64 {
    state
        .rho
        .iter()
        .zip(grid.volumes())
        .map(|(&r, v)| (r + eps) * (r + eps).ln() * v)
        .sum()
}

/// `int |grad u|^2` and `int |div u|^2` of a discrete velocity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientIntegrals {
    pub grad_sq: f64,
    pub div_sq: f64,
}

pub fn gradient_integrals(u: &[f64], grid: &Grid) -> GradientIntegrals {
    let n = u.len();
    let h = grid.h();
    let cc = grid.center_metric();
    let cf = grid.face_metric();
    // Extrapolated outer ghost value, and the lower one in 1D.
    let upper_ghost = 2.0 * u[n - 1] - u[n - 2];
    let upper_metric = match grid.geometry() {
        Geometry::Cartesian1D => 1.0,
        Geometry::Radial2D => grid.extent() + 0.5 * h,
    };
    let mut slope_sq = 0.0;
    let mut div_sq = 0.0;
    let mut add_face = |slope: f64, div: f64, weight: f64| {
        slope_sq += slope * slope * weight;
        div_sq += div * div * weight;
    };
    for f in 1..n {
        let slope = (u[f] - u[f - 1]) / h;
        let div = (cc[f] * u[f] - cc[f - 1] * u[f - 1]) / (cf[f] * h);
        add_face(slope, div, cf[f] * h);
    }
    let slope = (upper_ghost - u[n - 1]) / h;
    let div = (upper_metric * upper_ghost - cc[n - 1] * u[n - 1]) / (cf[n] * h);
    add_face(slope, div, 0.5 * cf[n] * h);
    match grid.geometry() {
        Geometry::Cartesian1D => {
            let lower_ghost = 2.0 * u[0] - u[1];
            let slope = (u[0] - lower_ghost) / h;
            add_face(slope, slope, 0.5 * h);
            GradientIntegrals {
                grad_sq: slope_sq,
                div_sq,
            }
        }
        Geometry::Radial2D => {
            let hoop: f64 = (0..n).map(|i| u[i] * u[i] / cc[i] * h).sum();
            GradientIntegrals {
                grad_sq: 2.0 * PI * (slope_sq + hoop),
                div_sq: 2.0 * PI * div_sq,
            }
        }
    }
}

/// Instantaneous dissipation `D = mu int |grad u|^2 + (lambda + mu) int |div u|^2`
/// and the gradient integral `int |grad u|^2`.
pub fn dissipation(
    state: &FluidState,
    params: &PhysParams,
    grid: &Grid,
    cutoff: f64,
) -> (f64, f64) {
    let g = gradient_integrals(&state.velocity(cutoff), grid);
    let d = params.mu() * g.grad_sq + (params.lambda() + params.mu()) * g.div_sq;
    (d, g.grad_sq)
}

/// The two sides of `(int |rho u.x|)^2 <= m^2 K_n int |grad u|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Set when density lives outside `B_R`; the bound is not established there.
    pub support_exceeds_radius: bool,
}

impl PoincareCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

pub fn poincare_check(state: &FluidState, grid: &Grid, radius: f64, cutoff: f64) -> PoincareCheck {
    let u = state.velocity(cutoff);
    let weighted: f64 = (0..state.len())
        .map(|i| (state.rho[i] * u[i] * grid.centers()[i]).abs() * grid.volumes()[i])
        .sum();
    let m = mass(state, grid);
    let grad_sq = gradient_integrals(&u, grid).grad_sq;
    let exceeds = state
        .rho
        .iter()
        .zip(grid.centers())
        .any(|(&r, &x)| r > 0.0 && x.abs() > radius);
    PoincareCheck {
        lhs: weighted * weighted,
        rhs: m * m * poincare_constant(grid.geometry(), radius) * grad_sq,
        support_exceeds_radius: exceeds,
    }
}

/// One sample of every functional along a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    /// Weighted momentum `M(t)`.
    pub weighted_momentum: f64,
    pub kinetic: f64,
    pub entropy: f64,
    /// `int_0^t int rho |u|^2`.
    pub cum_kinetic: f64,
    pub dissipation: f64,
    pub cum_dissipation: f64,
    pub grad_sq: f64,
    pub cum_grad_sq: f64,
    pub mom_residual: f64,
    pub energy_residual: f64,
    pub support_radius: f64,
    pub poincare_lhs: f64,
    pub poincare_rhs: f64,
}

impl DiagnosticsRow {
    /// Comma-separated values in [`CSV_HEADER`] order with shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        [
            self.t,
            self.mass,
            self.weighted_momentum,
            self.kinetic,
            self.entropy,
            self.cum_kinetic,
            self.dissipation,
            self.cum_dissipation,
            self.grad_sq,
            self.mom_residual,
            self.energy_residual,
            self.support_radius,
            self.poincare_lhs,
            self.poincare_rhs,
        ]
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
    }

    /// Kinetic energy plus `a` times the entropy term.
    pub fn free_energy(&self, a: f64) -> f64 {
        self.kinetic + a * self.entropy
    }
}

/// Builds successive rows, accumulating the time integrals by the trapezoid rule.
#[derive(Debug, Clone)]
pub struct RowBuilder<'g> {
    params: PhysParams,
    grid: &'g Grid,
    radius: f64,
    cutoff: f64,
    support_threshold: f64,
    first: Option<DiagnosticsRow>,
    last: Option<DiagnosticsRow>,
}

impl<'g> RowBuilder<'g> {
    /// `cutoff` is the velocity cutoff; the support threshold is the same density
    /// level, floored at the smallest positive float.
    pub fn new(params: PhysParams, grid: &'g Grid, radius: f64, cutoff: f64) -> Self {
        Self {
            params,
            grid,
            radius,
            cutoff,
            support_threshold: cutoff.max(f64::MIN_POSITIVE),
            first: None,
            last: None,
        }
    }

    pub fn observe(&mut self, state: &FluidState) -> DiagnosticsRow {
        let grid = self.grid;
        let a = self.params.a();
        let mass = mass(state, grid);
        let weighted_momentum = weighted_momentum(state, grid);
        let (kinetic, entropy) = kinetic_and_entropy(state, grid, self.cutoff);
        let (dissipation, grad_sq) = dissipation(state, &self.params, grid, self.cutoff);
        let poincare = poincare_check(state, grid, self.radius, self.cutoff);
        let support_radius = crate::lagrangian::support_radius(state, grid, self.support_threshold);

        let (cum_kinetic, cum_dissipation, cum_grad_sq) = match &self.last {
            None => (0.0, 0.0, 0.0),
            Some(prev) => {
                let dt = state.t - prev.t;
                (
                    prev.cum_kinetic + dt * (prev.kinetic + kinetic),
                    prev.cum_dissipation + 0.5 * dt * (prev.dissipation + dissipation),
                    prev.cum_grad_sq + 0.5 * dt * (prev.grad_sq + grad_sq),
                )
            }
        };
        let (mom_residual, energy_residual) = match &self.first {
            None => (0.0, 0.0),
            Some(first) => {
                let n = self.params.n() as f64;
                (
                    weighted_momentum
                        - first.weighted_momentum
                        - cum_kinetic
                        - n * a * first.mass * state.t,
                    kinetic + a * entropy + cum_dissipation - first.free_energy(a),
                )
            }
        };
        let row = DiagnosticsRow {
            t: state.t,
            mass,
            weighted_momentum,
            kinetic,
            entropy,
            cum_kinetic,
            dissipation,
            cum_dissipation,
            grad_sq,
            cum_grad_sq,
            mom_residual,
            energy_residual,
            support_radius,
            poincare_lhs: poincare.lhs,
            poincare_rhs: poincare.rhs,
        };
        if self.first.is_none() {
            self.first = Some(row);
        }
        self.last = Some(row);
        row
    }
}

/// Trapezoid-rule cumulative integral of `values` sampled at `times`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for k in 0..times.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// `M(t) - M(0) - int_0^t int rho |u|^2 - n a m_0 t` for every row, recomputed from the
/// stored columns.
pub fn momentum_identity_residual(rows: &[DiagnosticsRow], params: &PhysParams) -> Vec<f64> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let twice_kinetic: Vec<f64> = rows.iter().map(|r| 2.0 * r.kinetic).collect();
    let cum = cumulative_trapezoid(&times, &twice_kinetic);
    let n = params.n() as f64;
    rows.iter()
        .zip(cum)
        .map(|(r, c)| {
            r.weighted_momentum - first.weighted_momentum - c - n * params.a() * first.mass * r.t
        })
        .collect()
}

/// `[kinetic + a entropy + int_0^t D](t) - [same](0)` for every row.
pub fn energy_identity_residual(rows: &[DiagnosticsRow], params: &PhysParams) -> Vec<f64> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.dissipation).collect();
    let cum = cumulative_trapezoid(&times, &d);
    let a = params.a();
    rows.iter()
        .zip(cum)
        .map(|(r, c)| r.free_energy(a) + c - first.free_energy(a))
        .collect()
}

/// Centered finite differences of `M(t)` at interior rows.
pub fn weighted_momentum_slopes(rows: &[DiagnosticsRow]) -> Vec<(f64, f64)> {
    rows.windows(3)
        .map(|w| {
            let slope = (w[2].weighted_momentum - w[0].weighted_momentum) / (w[2].t - w[0].t);
            (w[1].t, slope)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(geom: Geometry, l: f64, n: usize) -> Grid {
        Grid::build(GridSpec::new(geom, l, n)).unwrap()
    }

    fn state_from(grid: &Grid, rho: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64) -> FluidState {
        let r: Vec<f64> = grid.centers().iter().map(|&x| rho(x)).collect();
        let m = grid
            .centers()
            .iter()
            .zip(&r)
            .map(|(&x, &rr)| rr * u(x))
            .collect();
        FluidState::new(0.0, r, m).unwrap()
    }

    #[test]
    fn mass_of_unit_density() {
        let g = grid(Geometry::Cartesian1D, 1.0, 64);
        let s = state_from(&g, |_| 1.0, |_| 0.0);
        assert!((mass(&s, &g) - 2.0).abs() < 1e-14);
        let g = grid(Geometry::Radial2D, 1.0, 64);
        let s = state_from(&g, |_| 1.0, |_| 0.0);
        assert!((mass(&s, &g) - PI).abs() < 1e-13);
    }

    #[test]
    fn weighted_momentum_of_linear_fields() {
        let g = grid(Geometry::Cartesian1D, 1.0, 64);
        assert_eq!(
            weighted_momentum(&state_from(&g, |_| 1.0, |_| 0.0), &g),
            0.0
        );
        let m = weighted_momentum(&state_from(&g, |_| 1.0, |x| x), &g);
        // midpoint rule for x^2: exact value minus h^2/12 times the interval length
        let h = g.h();
        assert!((m - (2.0 / 3.0 - h * h / 6.0)).abs() < 1e-14);
        let g = grid(Geometry::Radial2D, 1.0, 256);
        let m = weighted_momentum(&state_from(&g, |_| 1.0, |r| r), &g);
        assert!((m - PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn entropy_values() {
        let g = grid(Geometry::Cartesian1D, 1.0, 64);
        let (_, e) = kinetic_and_entropy(&state_from(&g, |_| 1.0, |_| 0.0), &g, 0.0);
        assert_eq!(e, 0.0);
        // rho = e on [0, 1], vacuum on [-1, 0)
        let s = state_from(
            &g,
            |x| if x > 0.0 { std::f64::consts::E } else { 0.0 },
            |_| 0.0,
        );
        let (_, e) = kinetic_and_entropy(&s, &g, 0.0);
        assert!((e - std::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn regularized_entropy_values() {
        let g = grid(Geometry::Cartesian1D, 1.0, 64);
        let s = state_from(&g, |_| 1.0, |_| 0.0);
        let eps: f64 = 1e-3;
        let want = 2.0 * (1.0 + eps) * (1.0 + eps).ln();
        assert!((entropy_regularized(&s, &g, eps) - want).abs() < 1e-14);
        let vac = FluidState::vacuum(64);
        let want = 2.0 * eps * eps.ln();
        assert!((entropy_regularized(&vac, &g, eps) - want).abs() < 1e-14);
    }

    #[test]
    fn dissipation_of_linear_fields() {
        let p1 = PhysParams::new(1.0, 0.3, 0.1, 1).unwrap();
        let g = grid(Geometry::Cartesian1D, 1.0, 64);
        let (d, gs) = dissipation(&state_from(&g, |_| 1.0, |x| x), &p1, &g, 0.0);
        assert!((gs - 2.0).abs() < 1e-13);
        assert!((d - 2.0 * (0.1 + 0.6)).abs() < 1e-13);

        let p2 = PhysParams::new(1.0, 0.3, 0.1, 2).unwrap();
        let g = grid(Geometry::Radial2D, 1.0, 64);
        let s = state_from(&g, |_| 1.0, |r| r);
        let gi = gradient_integrals(&s.velocity(0.0), &g);
        assert!((gi.grad_sq - 2.0 * PI).abs() < 1e-12);
        assert!((gi.div_sq - 4.0 * PI).abs() < 1e-12);
        let (d, _) = dissipation(&s, &p2, &g, 0.0);
        assert!((d - (0.3 * 2.0 * PI + 0.4 * 4.0 * PI)).abs() < 1e-12);

        let (d, gs) = dissipation(&state_from(&g, |_| 1.0, |_| 0.0), &p2, &g, 0.0);
        assert_eq!((d, gs), (0.0, 0.0));
    }

    #[test]
    fn poincare_example_one_dimension() {
        let g = grid(Geometry::Cartesian1D, 1.0, 512);
        let pc = poincare_check(&state_from(&g, |_| 1.0, |x| x), &g, 1.0, 0.0);
        // (int |x^2|)^2 = 4/9 against 2^2 * 1 * 2 = 8
        assert!((pc.lhs - 4.0 / 9.0).abs() < 1e-5);
        assert!((pc.rhs - 8.0).abs() < 1e-10);
        assert!(pc.holds());
        let pc = poincare_check(&state_from(&g, |_| 1.0, |_| 0.0), &g, 1.0, 0.0);
        assert_eq!((pc.lhs, pc.rhs), (0.0, 0.0));
        assert!(pc.holds());
    }

    #[test]
    fn poincare_flags_support_outside_radius() {
        let g = grid(Geometry::Cartesian1D, 2.0, 64);
        let s = state_from(&g, |x| if x.abs() < 1.5 { 1.0 } else { 0.0 }, |_| 0.0);
        assert!(poincare_check(&s, &g, 1.0, 0.0).support_exceeds_radius);
        assert!(!poincare_check(&s, &g, 1.6, 0.0).support_exceeds_radius);
    }

    fn synthetic_rows(params: &PhysParams, kinetic: f64) -> Vec<DiagnosticsRow> {
        let m0 = 1.7;
        let m_init = 0.3;
        (0..11)
            .map(|k| {
                let t = 0.01 * k as f64;
                DiagnosticsRow {
                    t,
                    mass: m0,
                    weighted_momentum: m_init + params.n() as f64 * params.a() * m0 * t,
                    kinetic,
                    entropy: -0.2,
                    cum_kinetic: 0.0,
                    dissipation: 0.0,
                    cum_dissipation: 0.0,
                    grad_sq: 0.0,
                    cum_grad_sq: 0.0,
                    mom_residual: 0.0,
                    energy_residual: 0.0,
                    support_radius: 1.0,
                    poincare_lhs: 0.0,
                    poincare_rhs: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn residuals_vanish_on_exact_series() {
        for n in [1, 2] {
            let p = PhysParams::new(1.3, 0.1, 0.0, n).unwrap();
            let rows = synthetic_rows(&p, 0.0);
            assert!(momentum_identity_residual(&rows, &p)
                .iter()
                .all(|r| r.abs() < 1e-14));
            assert!(energy_identity_residual(&rows, &p)
                .iter()
                .all(|r| r.abs() < 1e-14));
            for (_, slope) in weighted_momentum_slopes(&rows) {
                assert!((slope - n as f64 * 1.3 * 1.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let t = [0.0, 0.1, 0.25, 0.7];
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        let c = cumulative_trapezoid(&t, &v);
        for (ti, ci) in t.iter().zip(c) {
            assert!((ci - (1.5 * ti * ti + ti)).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_row_matches_header_width() {
        let p = PhysParams::new(1.0, 0.1, 0.0, 1).unwrap();
        let row = synthetic_rows(&p, 0.0)[3];
        let line = row.to_csv();
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
        let parsed: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed[0], row.t);
        assert_eq!(parsed[2], row.weighted_momentum);
    }
}
