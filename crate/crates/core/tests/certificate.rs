use std::f64::consts::E;

use isoblow::diagnostics::{blowup_certificate, cubic_positive_root, DiagnosticsRow};
use isoblow::params::PhysParams;

/// First sign change on a uniform grid, refined by bisection in that cell.
fn brute_force_root(c: [f64; 3], upper: f64, points: usize) -> f64 {
    let p = |t: f64| (c[0] * t * t + c[1]) * t + c[2];
    let step = upper / points as f64;
    let k = (1..=points)
        .find(|&k| p(k as f64 * step) > 0.0)
        .expect("root in range");
    let (mut lo, mut hi) = ((k - 1) as f64 * step, k as f64 * step);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn worked_example_cube_root_of_two() {
    // a = 1, m0 = 2, M0 = 0, K_n C1 = 1: 4 T^3 - 8 = 0.
    let scan = brute_force_root([4.0, 0.0, -8.0], 10.0, 1_000_000);
    assert!((scan - 1.2599210498948732).abs() < 1e-12);
    let t = cubic_positive_root(4.0, 0.0, -8.0);
    assert!((t - scan).abs() <= 1e-12 * scan);
}

#[test]
fn worked_example_through_the_certificate() {
    // 1D, R = 1: K_1 = 1. lambda + 2 mu = 1 and E = 1 give C1 = 1.
    let params = PhysParams::new(1.0, 0.5, 0.0, 1).unwrap();
    let row = DiagnosticsRow {
        mass: 2.0,
        kinetic: 1.0 - 2.0 / E,
        ..DiagnosticsRow::default()
    };
    let c = blowup_certificate(&row, &params, 1.0).unwrap();
    assert_eq!(c.poincare_constant, 1.0);
    assert!((c.gradient_bound - 1.0).abs() < 1e-15);
    assert!((c.t_star - 2f64.cbrt()).abs() < 1e-12);
    assert!(!c.degenerate);
    // Leading coefficient n^2 a^2 m0^2 / 3 = 4/3: T^3 = 6.
    assert!((c.t_star_sharp - 6f64.cbrt()).abs() < 1e-12);
}

#[test]
fn degenerate_budget_gives_zero() {
    let params = PhysParams::new(1.0, 0.5, 0.0, 1).unwrap();
    let row = DiagnosticsRow {
        mass: 1.0,
        entropy: -2.0 / E,
        ..DiagnosticsRow::default()
    };
    let c = blowup_certificate(&row, &params, 1.0).unwrap();
    assert!(c.degenerate);
    assert_eq!(c.t_star, 0.0);
}

#[test]
fn eight_times_c1_doubles_t_star() {
    for c0 in [-1e-6, -0.3, -1.0, -17.0, -4e5] {
        let base = cubic_positive_root(2.5, 0.0, c0);
        let scaled = cubic_positive_root(2.5, 0.0, 8.0 * c0);
        assert!((scaled / base - 2.0).abs() <= 2e-12, "{c0}");
    }
}

#[test]
fn rejects_empty_density() {
    let params = PhysParams::new(1.0, 0.5, 0.0, 2).unwrap();
    let row = DiagnosticsRow::default();
    assert!(blowup_certificate(&row, &params, 1.0).is_err());
}

#[test]
fn effective_viscosity_by_dimension() {
    let row = DiagnosticsRow {
        mass: 1.0,
        kinetic: 0.5,
        ..DiagnosticsRow::default()
    };
    // 1D admits lambda + mu < 0; the combined coefficient stays positive.
    let p1 = PhysParams::new(1.0, 1.0, -1.5, 1).unwrap();
    let c1 = blowup_certificate(&row, &p1, 1.0).unwrap();
    assert!((c1.effective_viscosity - 0.5).abs() < 1e-15);
    let p2 = PhysParams::new(1.0, 1.0, -0.5, 2).unwrap();
    let c2 = blowup_certificate(&row, &p2, 1.0).unwrap();
    assert_eq!(c2.effective_viscosity, 1.0);
    assert!((c2.poincare_constant - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
}
