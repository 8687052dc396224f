use proptest::prelude::*;

use isoblow::config::parse_config;
use isoblow::diagnostics::{cubic_positive_root, dissipation, poincare_check};
use isoblow::grid::{Geometry, Grid, GridSpec};
use isoblow::initial::{DensityProfile, InitialData, VelocityProfile};
use isoblow::params::PhysParams;
use isoblow::solver::{run, SchemeConfig};
use isoblow::state::FluidState;

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::Cartesian1D), Just(Geometry::Radial2D)]
}

/// Density and momentum supported in `|x| <= radius`.
fn supported_state(grid: &Grid, radius: f64, rho: &[f64], u: &[f64]) -> FluidState {
    let n = grid.len();
    let mut r = vec![0.0; n];
    let mut m = vec![0.0; n];
    for i in 0..n {
        if grid.centers()[i].abs() < radius {
            r[i] = rho[i];
            m[i] = rho[i] * u[i];
        }
    }
    FluidState::new(0.0, r, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_accepts_exactly_the_admissible_set(
        n in 1usize..=2,
        mu in 0.001f64..10.0,
        lambda in -25.0f64..25.0,
    ) {
        let text = format!(
            "[physics]\na = 1\nmu = {mu:?}\nlambda = {lambda:?}\nn = {n}\n[grid]\nL = 2\nN = 32\n[initial]\nR = 1\n"
        );
        let admissible = lambda + 2.0 / n as f64 * mu > 0.0;
        prop_assert_eq!(parse_config(&text, "p").is_ok(), admissible);
    }

    #[test]
    fn dissipation_is_nonnegative(
        geom in geometry(),
        seed in prop::collection::vec((0.0f64..3.0, -5.0f64..5.0), 32),
        mu in 0.01f64..2.0,
        frac in 0.0f64..0.99,
    ) {
        let n = geom.dimension();
        // lambda down to just above the admissibility limit.
        let lambda = -(2.0 / n as f64) * mu * frac;
        let params = PhysParams::new(1.0, mu, lambda, n).unwrap();
        let grid = Grid::build(GridSpec::new(geom, 1.0, 32)).unwrap();
        let (rho, u): (Vec<f64>, Vec<f64>) = seed.into_iter().unzip();
        let state = supported_state(&grid, 2.0, &rho, &u);
        let (d, grad_sq) = dissipation(&state, &params, &grid, 1e-12);
        prop_assert!(d >= 0.0, "D = {}", d);
        prop_assert!(grad_sq >= 0.0);
    }

    #[test]
    fn poincare_bound_holds_inside_the_ball(
        geom in geometry(),
        seed in prop::collection::vec((0.01f64..3.0, -5.0f64..5.0), 64),
        radius in 0.3f64..0.9,
    ) {
        let grid = Grid::build(GridSpec::new(geom, 1.0, 64)).unwrap();
        let (rho, u): (Vec<f64>, Vec<f64>) = seed.into_iter().unzip();
        let state = supported_state(&grid, radius, &rho, &u);
        let p = poincare_check(&state, &grid, radius, 0.0);
        prop_assert!(!p.support_exceeds_radius);
        prop_assert!(p.holds(), "{} > {}", p.lhs, p.rhs);
    }

    #[test]
    fn certificate_root_is_the_sign_change(
        c3 in 1e-3f64..1e3,
        c1 in -1e3f64..0.0,
        c0 in -1e3f64..-1e-6,
    ) {
        let t = cubic_positive_root(c3, c1, c0);
        let p = |s: f64| (c3 * s * s + c1) * s + c0;
        prop_assert!(t > 0.0);
        prop_assert!(p(t * (1.0 - 1e-9)) <= 0.0);
        prop_assert!(p(t * (1.0 + 1e-9)) > 0.0);
    }

    #[test]
    fn cube_root_homogeneity(c3 in 1e-3f64..1e3, c0 in -1e3f64..-1e-6) {
        let t = cubic_positive_root(c3, 0.0, c0);
        let t8 = cubic_positive_root(c3, 0.0, 8.0 * c0);
        prop_assert!((t8 / t - 2.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn symmetric_data_stay_symmetric(
        amplitude in 0.2f64..3.0,
        radius in 0.4f64..1.2,
        scale in -1.0f64..1.0,
        tent in any::<bool>(),
    ) {
        let density = if tent {
            DensityProfile::SquaredTent { amplitude }
        } else {
            DensityProfile::QuarticBump { amplitude }
        };
        let data = InitialData::new(
            Geometry::Cartesian1D,
            radius,
            density,
            VelocityProfile::Outward { scale },
        )
        .unwrap();
        let params = PhysParams::new(1.0, 0.1, 0.0, 1).unwrap();
        let grid = Grid::build(GridSpec::new(Geometry::Cartesian1D, 2.0, 128)).unwrap();
        let cfg = SchemeConfig { t_end: 0.03, ..SchemeConfig::default() };
        let res = run(&data, &params, &grid, &cfg, &mut []).unwrap();
        prop_assert!(res.completed());
        let s = &res.final_state;
        let n = s.len();
        for i in 0..n / 2 {
            let j = n - 1 - i;
            prop_assert!((s.rho[i] - s.rho[j]).abs() <= 1e-13 * amplitude);
            prop_assert!((s.mom[i] + s.mom[j]).abs() <= 1e-13 * amplitude.max(1.0));
        }
        let rows = &res.series.rows;
        let m0 = rows[0].mass;
        prop_assert!(rows.iter().all(|r| (r.mass - m0).abs() <= 1e-12 * m0));
    }
}
