//! Reference values of the integral functionals for analytic fields, computed by
//! composite Gauss-Legendre quadrature independently of the grid, and a
//! convergence comparison of the grid diagnostics against them.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid, GridSpec};
use crate::initial::{sample_initial, DensityProfile, InitialData};
use crate::state::FluidState;

/// Gauss-Legendre nodes per panel.
pub const NODES: usize = 8;
/// Refinement levels used by [`cross_validate`]; level `k` has `2^k` panels per piece.
pub const DEFAULT_LEVELS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    Mass,
    WeightedMomentum,
    Kinetic,
    Entropy,
    GradSq,
    DivSq,
}

impl Functional {
    pub const ALL: [Functional; 6] = [
        Functional::Mass,
        Functional::WeightedMomentum,
        Functional::Kinetic,
        Functional::Entropy,
        Functional::GradSq,
        Functional::DivSq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::Mass => "mass",
            Functional::WeightedMomentum => "M",
            Functional::Kinetic => "kinetic",
            Functional::Entropy => "entropy",
            Functional::GradSq => "grad_sq",
            Functional::DivSq => "div_sq",
        }
    }

    /// Smallest observed convergence order accepted by [`cross_validate`].
    pub fn required_order(self) -> f64 {
        match self {
            Functional::Mass | Functional::WeightedMomentum | Functional::Kinetic => 1.9,
            Functional::Entropy => 1.5,
            Functional::GradSq | Functional::DivSq => 0.9,
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // P_n(x) and P_n'(x) by the three-term recurrence.
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    for i in 0..n {
        // Chebyshev-like starting guess, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1e-3) {
                break;
            }
        }
        let (_, dp) = legendre(x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FieldKind {
    Profile(InitialData),
    /// `rho = density`, `u = slope * x` on the whole domain.
    Uniform {
        density: f64,
        slope: f64,
    },
}

/// Closed-form density and velocity on `[-L, L]` or the disk of radius `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticField {
    pub name: String,
    pub geometry: Geometry,
    pub extent: f64,
    kind: FieldKind,
}

impl AnalyticField {
    pub fn profile(name: &str, data: InitialData, extent: f64) -> Self {
        Self {
            name: name.to_string(),
            geometry: data.geometry,
            extent,
            kind: FieldKind::Profile(data),
        }
    }

    pub fn uniform(name: &str, geometry: Geometry, extent: f64, density: f64, slope: f64) -> Self {
        assert!(density >= 0.0, "density must be non-negative");
        Self {
            name: name.to_string(),
            geometry,
            extent,
            kind: FieldKind::Uniform { density, slope },
        }
    }

    /// Whether the density vanishes outside a ball inside the domain.
    pub fn compactly_supported(&self) -> bool {
        matches!(self.kind, FieldKind::Profile(_))
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.kind {
            FieldKind::Profile(d) => d.density(x),
            FieldKind::Uniform { density, .. } => density,
        }
    }

    /// `(u, u')`, set to zero where the density vanishes.
    pub fn velocity_with_slope(&self, x: f64) -> (f64, f64) {
        if self.density(x) <= 0.0 {
            return (0.0, 0.0);
        }
        match self.kind {
            FieldKind::Profile(d) => d.velocity_with_slope(x),
            FieldKind::Uniform { slope, .. } => (slope * x, slope),
        }
    }

    /// Points where the integrands may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        let l = self.extent;
        let mut pts = match self.geometry {
            Geometry::Cartesian1D => vec![-l, 0.0, l],
            Geometry::Radial2D => vec![0.0, l],
        };
        if let FieldKind::Profile(d) = self.kind {
            let mut add = |p: f64| {
                if p > 0.0 && p < l {
                    pts.push(p);
                    if self.geometry == Geometry::Cartesian1D {
                        pts.push(-p);
                    }
                }
            };
            add(d.radius);
            if let DensityProfile::TaperedPlateau { width, .. } = d.density {
                add(d.radius - width);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    fn integrand(&self, functional: Functional, x: f64) -> f64 {
        let rho = self.density(x);
        let (u, du) = self.velocity_with_slope(x);
        let radial = self.geometry == Geometry::Radial2D;
        let value = match functional {
            Functional::Mass => rho,
            Functional::WeightedMomentum => rho * u * x,
            Functional::Kinetic => 0.5 * rho * u * u,
            Functional::Entropy => {
                if rho > 0.0 {
                    rho * rho.ln()
                } else {
                    0.0
                }
            }
            Functional::GradSq if radial => du * du + (u / x) * (u / x),
            Functional::DivSq if radial => (du + u / x) * (du + u / x),
            Functional::GradSq | Functional::DivSq => du * du,
        };
        if radial {
            2.0 * PI * x * value
        } else {
            value
        }
    }

    /// Closed-form value where one is known.
    pub fn exact(&self, functional: Functional) -> Option<f64> {
        let l = self.extent;
        let (measure, second_moment) = match self.geometry {
            Geometry::Cartesian1D => (2.0 * l, 2.0 * l.powi(3) / 3.0),
            Geometry::Radial2D => (PI * l * l, PI * l.powi(4) / 2.0),
        };
        match self.kind {
            FieldKind::Uniform {
                density: c,
                slope: k,
            } => {
                let n = self.geometry.dimension() as f64;
                Some(match functional {
                    Functional::Mass => c * measure,
                    Functional::WeightedMomentum => c * k * second_moment,
                    Functional::Kinetic => 0.5 * c * k * k * second_moment,
                    Functional::Entropy if c > 0.0 => c * c.ln() * measure,
                    Functional::Entropy => 0.0,
                    _ if c == 0.0 => 0.0,
                    Functional::GradSq => n * k * k * measure,
                    Functional::DivSq => n * n * k * k * measure,
                })
            }
            FieldKind::Profile(d) => match functional {
                Functional::Mass => d.exact_mass(),
                _ => None,
            },
        }
    }

    /// Midpoint samples of `rho` and `rho u` on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<FluidState> {
        match self.kind {
            FieldKind::Profile(d) => sample_initial(&d, grid),
            FieldKind::Uniform { .. } => {
                let rho: Vec<f64> = grid.centers().iter().map(|&x| self.density(x)).collect();
                let mom = grid
                    .centers()
                    .iter()
                    .zip(&rho)
                    .map(|(&x, r)| r * self.velocity_with_slope(x).0)
                    .collect();
                FluidState::new(0.0, rho, mom)
            }
        }
    }
}

/// Catalog fields: the quartic bump at rest and expanding (`c = 1`), `R = 1`,
/// `L = 2`, in both geometries.
pub fn catalog() -> Vec<AnalyticField> {
    let mut out = Vec::new();
    for geom in [Geometry::Cartesian1D, Geometry::Radial2D] {
        let tag = match geom {
            Geometry::Cartesian1D => "1d",
            Geometry::Radial2D => "2d",
        };
        out.push(AnalyticField::profile(
            &format!("resting_bump_{tag}"),
            InitialData::resting_bump(geom, 1.0).expect("catalog data is valid"),
            2.0,
        ));
        out.push(AnalyticField::profile(
            &format!("expanding_bump_{tag}"),
            InitialData::expanding_bump(geom, 1.0, 1.0).expect("catalog data is valid"),
            2.0,
        ));
    }
    out
}

/// Constant density on the unit interval or disk, at rest and with `u = x`.
pub fn trivial_fields() -> Vec<AnalyticField> {
    vec![
        AnalyticField::uniform("uniform_rest_1d", Geometry::Cartesian1D, 1.0, 1.5, 0.0),
        AnalyticField::uniform("uniform_rest_2d", Geometry::Radial2D, 1.0, 1.5, 0.0),
        AnalyticField::uniform("uniform_linear_1d", Geometry::Cartesian1D, 1.0, 1.0, 1.0),
        AnalyticField::uniform("uniform_linear_2d", Geometry::Radial2D, 1.0, 1.0, 1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn composite<F: Fn(f64) -> f64>(
    f: &F,
    pts: &[f64],
    level: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let (nodes, weights) = rule;
    let panels = 1usize << level;
    let mut sum = 0.0;
    for piece in pts.windows(2) {
        let width = (piece[1] - piece[0]) / panels as f64;
        let half = 0.5 * width;
        for p in 0..panels {
            let mid = piece[0] + (p as f64 + 0.5) * width;
            for (x, w) in nodes.iter().zip(weights) {
                sum += w * half * f(mid + half * x);
            }
        }
    }
    sum
}

/// Integral of `f` over `[pts[0], pts[last]]`, smooth between consecutive points,
/// at `levels` successive panel refinements, Richardson extrapolated with the
/// observed ratio of successive differences.
///
/// The error estimate is the last difference (at least a roundoff floor), which
/// bounds the extrapolation correction whenever the ratio is below one half.
pub fn quad_pieces<F: Fn(f64) -> f64>(f: F, pts: &[f64], levels: usize) -> Result<Quadrature> {
    if levels < 3 {
        return Err(Error::QuadratureDiverged(format!(
            "need at least 3 refinement levels, got {levels}"
        )));
    }
    let rule = gauss_legendre(NODES);
    let q: Vec<f64> = (0..levels).map(|k| composite(&f, pts, k, &rule)).collect();
    let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let floor = 64.0 * f64::EPSILON * scale;
    let d1 = q[levels - 2] - q[levels - 3];
    let d2 = q[levels - 1] - q[levels - 2];
    let last = q[levels - 1];
    if d2.abs() <= floor {
        return Ok(Quadrature {
            value: last,
            error: floor,
        });
    }
    let ratio = d2 / d1;
    if !(ratio.abs() < 0.5) {
        return Err(Error::QuadratureDiverged(format!(
            "successive differences {d1:e}, {d2:e} do not contract"
        )));
    }
    let correction = d2 * ratio / (1.0 - ratio);
    Ok(Quadrature {
        value: last + correction,
        error: d2.abs().max(floor),
    })
}

/// Reference value of `functional` for `field`; see [`quad_pieces`].
pub fn quad_functional(
    field: &AnalyticField,
    functional: Functional,
    levels: usize,
) -> Result<Quadrature> {
    quad_pieces(
        |x| field.integrand(functional, x),
        &field.breakpoints(),
        levels,
    )
    .map_err(|e| match e {
        Error::QuadratureDiverged(msg) => {
            Error::QuadratureDiverged(format!("{functional} of {}: {msg}", field.name))
        }
        other => other,
    })
}

/// Evaluates a functional of a sampled state, as the grid diagnostics do.
pub trait Evaluator {
    fn evaluate(&self, state: &FluidState, grid: &Grid, functional: Functional) -> f64;
}

impl<F: Fn(&FluidState, &Grid, Functional) -> f64> Evaluator for F {
    fn evaluate(&self, state: &FluidState, grid: &Grid, functional: Functional) -> f64 {
        self(state, grid, functional)
    }
}

/// The diagnostics module, with velocities taken wherever the density is positive.
pub struct GridDiagnostics;

impl Evaluator for GridDiagnostics {
    fn evaluate(&self, state: &FluidState, grid: &Grid, functional: Functional) -> f64 {
        match functional {
            Functional::Mass => diagnostics::mass(state, grid),
            Functional::WeightedMomentum => diagnostics::weighted_momentum(state, grid),
            Functional::Kinetic => diagnostics::kinetic_and_entropy(state, grid, 0.0).0,
            Functional::Entropy => diagnostics::kinetic_and_entropy(state, grid, 0.0).1,
            Functional::GradSq => {
                diagnostics::gradient_integrals(&state.velocity(0.0), grid).grad_sq
            }
            Functional::DivSq => diagnostics::gradient_integrals(&state.velocity(0.0), grid).div_sq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Agreement to roundoff at every size.
    Exact,
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Exact => "exact",
            Status::Pass => "pass",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub field: String,
    pub functional: Functional,
    pub reference: f64,
    pub reference_error: f64,
    /// Grid values, one per size.
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`; `None` when exact.
    pub order: Option<f64>,
    pub required: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub sizes: Vec<usize>,
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn entry(&self, field: &str, functional: Functional) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.field == field && e.functional == functional)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:<8} {:>22} {:>10} {:>8} {:>6}  status",
            "field", "func", "reference", "err@max_N", "order", "need"
        );
        for e in &self.entries {
            let order = e.order.map_or("-".to_string(), |o| format!("{o:.3}"));
            let _ = writeln!(
                out,
                "{:<20} {:<8} {:>22.15e} {:>10.2e} {:>8} {:>6.2}  {}",
                e.field,
                e.functional.name(),
                e.reference,
                e.errors.last().copied().unwrap_or(0.0),
                order,
                e.required,
                e.status
            );
        }
        let _ = writeln!(
            out,
            "{}",
            if self.passed() {
                "all entries pass"
            } else {
                "FAILURES present"
            }
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("field,functional,reference,reference_error");
        for n in &self.sizes {
            let _ = write!(out, ",value_{n},error_{n}");
        }
        out.push_str(",order,required,status\n");
        for e in &self.entries {
            let _ = write!(
                out,
                "{},{},{:?},{:?}",
                e.field,
                e.functional.name(),
                e.reference,
                e.reference_error
            );
            for (v, err) in e.values.iter().zip(&e.errors) {
                let _ = write!(out, ",{v:?},{err:?}");
            }
            let order = e.order.map_or(String::new(), |o| format!("{o:?}"));
            let _ = writeln!(out, ",{order},{:?},{}", e.required, e.status);
        }
        out
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Order and status of a convergence sequence. Errors at roundoff level count as
/// converged only if every finer grid is also at roundoff; the order is fitted
/// to the errors above it.
fn classify(grids: &[Grid], errors: &[f64], tol: f64, required: f64) -> (Option<f64>, Status) {
    let inexact = errors.iter().take_while(|&&e| e > tol).count();
    if errors[inexact..].iter().any(|&e| e > tol) {
        return (None, Status::Fail);
    }
    match inexact {
        0 => (None, Status::Exact),
        1 => (None, Status::Pass),
        k => {
            let hs: Vec<f64> = grids[..k].iter().map(|g| g.h()).collect();
            let p = loglog_slope(&hs, &errors[..k]);
            (
                Some(p),
                if p >= required {
                    Status::Pass
                } else {
                    Status::Fail
                },
            )
        }
    }
}

/// Compares the diagnostics on midpoint-sampled grids of the given sizes against
/// the quadrature reference, for every catalog and trivial field.
pub fn cross_validate(sizes: &[usize]) -> Result<Report> {
    cross_validate_with(sizes, &GridDiagnostics)
}

pub fn cross_validate_with(sizes: &[usize], evaluator: &dyn Evaluator) -> Result<Report> {
    let fields: Vec<AnalyticField> = catalog().into_iter().chain(trivial_fields()).collect();
    cross_validate_fields(&fields, sizes, evaluator)
}

pub fn cross_validate_fields(
    fields: &[AnalyticField],
    sizes: &[usize],
    evaluator: &dyn Evaluator,
) -> Result<Report> {
    if sizes.len() < 2 {
        return Err(Error::InvalidGrid(
            "cross validation needs at least two grid sizes".into(),
        ));
    }
    let mut entries = Vec::new();
    for field in fields {
        let grids: Vec<Grid> = sizes
            .iter()
            .map(|&n| Grid::build(GridSpec::new(field.geometry, field.extent, n)))
            .collect::<Result<_>>()?;
        let states: Vec<FluidState> = grids
            .iter()
            .map(|g| field.sample(g))
            .collect::<Result<_>>()?;
        for functional in Functional::ALL {
            let quad = quad_functional(field, functional, DEFAULT_LEVELS)?;
            let values: Vec<f64> = states
                .iter()
                .zip(&grids)
                .map(|(s, g)| evaluator.evaluate(s, g, functional))
                .collect();
            let errors: Vec<f64> = values.iter().map(|v| (v - quad.value).abs()).collect();
            let tol = 1e-12 * quad.value.abs().max(1.0) + 4.0 * quad.error;
            let required = functional.required_order();
            let (order, status) = classify(&grids, &errors, tol, required);
            entries.push(Entry {
                field: field.name.clone(),
                functional,
                reference: quad.value,
                reference_error: quad.error,
                values,
                errors,
                order,
                required,
                status,
            });
        }
    }
    Ok(Report {
        sizes: sizes.to_vec(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(NODES);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 4e-15);
        for deg in 0..2 * NODES {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let want = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn unit_density_mass() {
        let f = AnalyticField::uniform("one", Geometry::Cartesian1D, 1.0, 1.0, 0.0);
        let q = quad_functional(&f, Functional::Mass, 4).unwrap();
        assert!((q.value - 2.0).abs() < 1e-14);
        assert!(q.error < 1e-13);
    }

    #[test]
    fn unit_disk_gradient() {
        let f = AnalyticField::uniform("disk", Geometry::Radial2D, 1.0, 1.0, 1.0);
        let q = quad_functional(&f, Functional::GradSq, 4).unwrap();
        assert!((q.value - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn exact_values_match_quadrature() {
        for f in catalog().iter().chain(&trivial_fields()) {
            for func in Functional::ALL {
                if let Some(exact) = f.exact(func) {
                    let q = quad_functional(f, func, DEFAULT_LEVELS).unwrap();
                    assert!(
                        (q.value - exact).abs() < 1e-13 * exact.abs().max(1.0),
                        "{} {func}: {} vs {exact}",
                        f.name,
                        q.value
                    );
                }
            }
        }
    }

    #[test]
    fn breakpoints_include_support_edges() {
        let f = &catalog()[0];
        assert_eq!(f.breakpoints(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let f = &catalog()[2];
        assert_eq!(f.breakpoints(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn diverging_integrand_is_rejected() {
        // int_0^1 dx / x: each halving adds about ln 2
        let err = quad_pieces(|x| 1.0 / x, &[0.0, 1.0], 6).unwrap_err();
        assert!(matches!(err, Error::QuadratureDiverged(_)));
        assert!(quad_pieces(|x| x, &[0.0, 1.0], 2).is_err());
        let q = quad_pieces(|x| x.sqrt(), &[0.0, 1.0], 6).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() <= q.error);
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
