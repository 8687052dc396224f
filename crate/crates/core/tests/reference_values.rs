//! Oracle values against references computed independently with 30-digit
//! arithmetic (mpmath), frozen here.

use std::f64::consts::PI;

use isoblow::grid::Grid;
use isoblow::oracle::{
    catalog, cross_validate, cross_validate_with, quad_functional, Evaluator, Functional,
    GridDiagnostics, Status, DEFAULT_LEVELS,
};
use isoblow::state::FluidState;

/// `(field, functional, value)`; `u = x (1 - |x|^2)^2` for the expanding fields.
fn frozen() -> Vec<(&'static str, Functional, f64)> {
    use Functional::*;
    vec![
        ("resting_bump_1d", Mass, 16.0 / 15.0),
        ("resting_bump_1d", Entropy, -0.384_794_251_833_122_2),
        (
            "expanding_bump_1d",
            WeightedMomentum,
            0.073_881_673_881_673_88,
        ),
        ("expanding_bump_1d", Kinetic, 0.022_732_822_732_822_733),
        ("expanding_bump_1d", GradSq, 0.812_698_412_698_412_7),
        ("resting_bump_2d", Mass, PI / 3.0),
        ("resting_bump_2d", Entropy, -2.0 * PI / 9.0),
        ("expanding_bump_2d", WeightedMomentum, PI / 30.0),
        ("expanding_bump_2d", Kinetic, 0.028_049_934_407_051_725),
        ("expanding_bump_2d", GradSq, 8.0 * PI / 15.0),
        ("expanding_bump_2d", DivSq, 8.0 * PI / 15.0),
    ]
}

#[test]
fn quadrature_matches_frozen_references() {
    let fields = catalog();
    for (name, functional, reference) in frozen() {
        let field = fields.iter().find(|f| f.name == name).unwrap();
        let q = quad_functional(field, functional, DEFAULT_LEVELS).unwrap();
        let gap = (q.value - reference).abs();
        assert!(
            gap <= 5.0 * q.error.max(1e-15 * reference.abs()),
            "{name} {}: {} vs {reference} (estimate {:e})",
            functional.name(),
            q.value,
            q.error
        );
    }
}

#[test]
fn error_estimates_are_honest() {
    for field in catalog() {
        for functional in Functional::ALL {
            let coarse = quad_functional(&field, functional, DEFAULT_LEVELS).unwrap();
            let fine = quad_functional(&field, functional, DEFAULT_LEVELS + 1).unwrap();
            assert!(
                (fine.value - coarse.value).abs() <= coarse.error,
                "{} {}",
                field.name,
                functional.name()
            );
        }
    }
}

#[test]
fn catalog_passes_at_required_orders() {
    let report = cross_validate(&[64, 128, 256]).unwrap();
    assert!(report.passed(), "{}", report.to_text());
    // Constant density: every functional except the x^2 moments of u = x is a
    // polynomial the midpoint and face stencils integrate exactly.
    for e in &report.entries {
        let moment = matches!(
            e.functional,
            Functional::WeightedMomentum | Functional::Kinetic
        );
        if e.field.starts_with("uniform_rest") || (e.field.starts_with("uniform") && !moment) {
            assert_eq!(
                e.status,
                Status::Exact,
                "{} {}",
                e.field,
                e.functional.name()
            );
        }
    }
    let mass = report.entry("resting_bump_1d", Functional::Mass).unwrap();
    assert!(mass.order.unwrap() >= 1.9);
    let grad = report
        .entry("expanding_bump_2d", Functional::GradSq)
        .unwrap();
    assert!(grad.order.unwrap() >= 0.9);
    assert!(report.to_csv().lines().count() == report.entries.len() + 1);
}

/// Evaluates `grad_sq` with the boundary faces dropped: an O(1) error on every
/// field whose gradient does not vanish at the ends.
struct CorruptGradient;

impl Evaluator for CorruptGradient {
    fn evaluate(&self, state: &FluidState, grid: &Grid, functional: Functional) -> f64 {
        let clean = GridDiagnostics.evaluate(state, grid, functional);
        match functional {
            Functional::GradSq => {
                let u = state.velocity(0.0);
                let n = u.len();
                let lost = (u[n - 1] * u[n - 1] + u[0] * u[0]) / grid.h();
                clean * 1.01 + lost
            }
            _ => clean,
        }
    }
}

#[test]
fn corrupted_stencil_is_flagged() {
    let report = cross_validate_with(&[64, 128, 256], &CorruptGradient).unwrap();
    assert!(!report.passed());
    let failed: Vec<Functional> = report.failures().map(|e| e.functional).collect();
    assert!(!failed.is_empty());
    assert!(
        failed.iter().all(|&f| f == Functional::GradSq),
        "{failed:?}"
    );
    assert_eq!(
        report
            .entry("expanding_bump_1d", Functional::GradSq)
            .unwrap()
            .status,
        Status::Fail
    );
}

#[test]
fn diagnostics_on_a_fine_grid_approach_the_references() {
    let fields = catalog();
    for (name, functional, reference) in frozen() {
        let field = fields.iter().find(|f| f.name == name).unwrap();
        let grid = Grid::build(isoblow::grid::GridSpec::new(
            field.geometry,
            field.extent,
            2048,
        ))
        .unwrap();
        let state = field.sample(&grid).unwrap();
        let value = GridDiagnostics.evaluate(&state, &grid, functional);
        assert!(
            (value - reference).abs() <= 1e-4 * reference.abs(),
            "{name} {}: {value} vs {reference}",
            functional.name()
        );
    }
}
