//! Lifespan bound from the weighted-momentum growth law.
//!
//! Along a smooth solution `M(t) >= M_0 + n a m_0 t`, and `M(t)^2` is bounded by
//! `m_0^2 K_n int |grad u|^2`, whose time integral is bounded by the initial energy.
//! The cubic `a^2 m_0^2 T^3 - 2 M_0^2 T - 2 m_0^2 K_n C_1` collects these bounds;
//! its positive root is the certificate `T*`.
//!
//! Squaring the growth law and integrating gives the leading coefficient
//! `n^2 a^2 m_0^2 / 3`. For `n = 2` that is larger than `a^2 m_0^2`, so the cubic
//! above is implied; for `n = 1` it is three times smaller, and the cubic is not.
//! [`Certificate::t_star_sharp`] is the root of the cubic with the derived
//! coefficient and is reported next to `T*`.

use std::f64::consts::E;

use super::{cumulative_trapezoid, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::grid::Geometry;
use crate::params::PhysParams;

/// `K_n` in `|u.x|^2 <= K_n int |grad u|^2` for fields vanishing outside `B_R`.
pub fn poincare_constant(geometry: Geometry, radius: f64) -> f64 {
    match geometry {
        Geometry::Cartesian1D => radius.powi(3),
        Geometry::Radial2D => radius * radius / (2.0 * std::f64::consts::PI),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub dimension: usize,
    pub radius: f64,
    pub a: f64,
    pub initial_mass: f64,
    /// `M_0`.
    pub initial_weighted_momentum: f64,
    pub initial_kinetic: f64,
    pub initial_entropy: f64,
    /// `K_n`.
    pub poincare_constant: f64,
    /// `kinetic + a entropy + a |B_R| / e`, an upper bound for the dissipated energy.
    pub energy_bound: f64,
    /// `lambda + 2 mu` in 1D, `mu` in 2D.
    pub effective_viscosity: f64,
    /// `C_1`, the bound on `int_0^T int |grad u|^2`.
    pub gradient_bound: f64,
    /// Coefficients of `T^3`, `T`, and `1`.
    pub cubic: [f64; 3],
    pub t_star: f64,
    /// Set when `M_0 = 0` and `C_1 = 0`: the cubic is `a^2 m_0^2 T^3` and `T* = 0`.
    pub degenerate: bool,
    /// Root with leading coefficient `n^2 a^2 m_0^2 / 3`.
    pub t_star_sharp: f64,
}

impl Certificate {
    pub fn cubic_at(&self, t: f64) -> f64 {
        let [c3, c1, c0] = self.cubic;
        (c3 * t * t + c1) * t + c0
    }
}

/// Certificate from the diagnostics of the initial state.
pub fn blowup_certificate(
    initial: &DiagnosticsRow,
    params: &PhysParams,
    radius: f64,
) -> Result<Certificate> {
    let m0 = initial.mass;
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::Certificate(format!(
            "initial mass must be positive (nontrivial initial density), got {m0}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Certificate(format!(
            "support radius must be positive, got {radius}"
        )));
    }
    for (name, v) in [
        ("weighted momentum", initial.weighted_momentum),
        ("kinetic energy", initial.kinetic),
        ("entropy", initial.entropy),
    ] {
        if !v.is_finite() {
            return Err(Error::Certificate(format!(
                "initial {name} is not finite ({v})"
            )));
        }
    }
    let geometry = Geometry::from_dimension(params.n())?;
    let a = params.a();
    let big_m0 = initial.weighted_momentum;
    let k_n = poincare_constant(geometry, radius);
    let energy_bound =
        initial.kinetic + a * initial.entropy + a * geometry.ball_measure(radius) / E;
    let mu_eff = params.certificate_viscosity();
    let c1 = energy_bound / mu_eff;
    let cubic = [
        a * a * m0 * m0,
        -2.0 * big_m0 * big_m0,
        -2.0 * m0 * m0 * k_n * c1,
    ];
    if !(energy_bound >= 0.0) || !cubic.iter().all(|c| c.is_finite()) || cubic[0] <= 0.0 {
        return Err(Error::Certificate(format!(
            "energy bound {energy_bound:?} and cubic {cubic:?} are outside the admissible range"
        )));
    }
    let degenerate = cubic[1] == 0.0 && cubic[2] == 0.0;
    let t_star = cubic_positive_root(cubic[0], cubic[1], cubic[2]);
    let n = params.n() as f64;
    let t_star_sharp = cubic_positive_root(n * n * cubic[0] / 3.0, cubic[1], cubic[2]);
    Ok(Certificate {
        dimension: params.n(),
        radius,
        a,
        initial_mass: m0,
        initial_weighted_momentum: big_m0,
        initial_kinetic: initial.kinetic,
        initial_entropy: initial.entropy,
        poincare_constant: k_n,
        energy_bound,
        effective_viscosity: mu_eff,
        gradient_bound: c1,
        cubic,
        t_star,
        degenerate,
        t_star_sharp,
    })
}

/// Positive root of `c3 T^3 + c1 T + c0` with `c3 > 0`, `c1 <= 0`, `c0 <= 0`, by
/// bisection. The cubic is non-positive on `[0, T*]` and positive beyond, so the
/// root is unique; it is `0` when `c1 = c0 = 0`.
pub fn cubic_positive_root(c3: f64, c1: f64, c0: f64) -> f64 {
    assert!(
        c3 > 0.0 && c1 <= 0.0 && c0 <= 0.0,
        "cubic outside the certificate family"
    );
    if c1 == 0.0 && c0 == 0.0 {
        return 0.0;
    }
    let p = |t: f64| (c3 * t * t + c1) * t + c0;
    // Start from the scale of the larger of the two balancing terms.
    let mut hi = (-c0 / c3).cbrt().max((-c1 / c3).sqrt());
    while p(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Both sides of the Step-4 inequality along a run: for each row,
/// `(T, a^2 m_0^2 T^3, 2 int_0^T M^2 + 2 T M_0^2)`.
pub fn step4_sides(rows: &[DiagnosticsRow], params: &PhysParams) -> Vec<(f64, f64, f64)> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let m_sq: Vec<f64> = rows
        .iter()
        .map(|r| r.weighted_momentum * r.weighted_momentum)
        .collect();
    let int_m_sq = cumulative_trapezoid(&times, &m_sq);
    let a = params.a();
    let m0 = first.mass;
    let big_m0 = first.weighted_momentum;
    rows.iter()
        .zip(int_m_sq)
        .map(|(r, i)| {
            let t = r.t - first.t;
            (
                r.t,
                a * a * m0 * m0 * t.powi(3),
                2.0 * i + 2.0 * t * big_m0 * big_m0,
            )
        })
        .collect()
}
