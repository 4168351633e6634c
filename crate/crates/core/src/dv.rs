//! Noise coefficients `D` and `V` of the exit height.
//!
//! For a start on the slow solution,
//!
//! ```text
//! D = ∫ ∂_yyT dy,   V = ∫ (1 + ∂_yT)² dy   over [y_in, y_fin],
//! ```
//!
//! with the derivatives re-based at each `y` of the orbit. As `x_fin → ∞`
//! both have closed forms in terms of `f`, `𝓕`, `𝓖`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::airy::{airy_eval, kappa_star, scalar_functions_from, ystar, AiryQuartet};
use crate::error::{Error, Result};
use crate::flow::{slow_x, FinalSection};
use crate::quad::{integrate, QuadOptions};

/// `D` and `V` for one `(y_in, x_fin)`; `x_fin = +∞` marks the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DVResult {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub x_fin: f64,
    pub y_in: f64,
    pub quadrature_error_estimate: f64,
}

/// Tolerances used for the `D`/`V` integrals.
pub const DV_QUAD: QuadOptions = QuadOptions { rel_tol: 1e-7, abs_tol: 1e-10, max_intervals: 4000 };

/// `D` and `V` by quadrature, for a start on the slow solution at `y_in`.
pub fn dv_integral(y_in: f64, x_fin: f64) -> Result<DVResult> {
    if x_fin == f64::INFINITY {
        return dv_limit(y_in);
    }
    let x_in = slow_x(y_in)?;
    if !(x_fin >= x_in) {
        return Err(Error::domain(format!("x_fin = {x_fin} is not ahead of x_in = {x_in}")));
    }
    let sec = FinalSection::on_slow_solution(y_in, x_fin)?;
    let d = integrate(
        |y| sec.derivatives_at(y).map(|t| t.d2t_dy2).unwrap_or(f64::NAN),
        y_in,
        sec.y_fin,
        DV_QUAD,
    )?;
    let v = integrate(
        |y| sec.derivatives_at(y).map(|t| (1.0 + t.dt_dy).powi(2)).unwrap_or(f64::NAN),
        y_in,
        sec.y_fin,
        DV_QUAD,
    )?;
    Ok(DVResult {
        d: d.value,
        v: v.value,
        x_fin,
        y_in,
        quadrature_error_estimate: d.error + v.error,
    })
}

/// Closed forms of `D` and `V` as `x_fin → ∞`.
pub fn dv_limit(y_in: f64) -> Result<DVResult> {
    let ys = ystar();
    if !(y_in <= ys) {
        return Err(Error::domain(format!("y_in = {y_in} must not exceed y* = {ys}")));
    }
    let s = scalar_functions_from(&airy_eval(-y_in)?);
    let dai = airy_eval(-ys)?.dai;
    let dai2 = dai * dai;
    let d = 0.75 + (2.0 * PI * (kappa_star() * s.F_val - s.G_val) - s.f_val) / dai2;
    let v = 0.5 * ys + s.F_val / (dai2 * dai2);
    Ok(DVResult { d, v, x_fin: f64::INFINITY, y_in, quadrature_error_estimate: 0.0 })
}

/// Brute-force scan of `F`, `G`, `H` on `(−y*, z_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub z_max: f64,
    pub n: usize,
    pub min_f: f64,
    pub argmin_f: f64,
    /// Grid points where `F ≤ 0`.
    pub f_nonpositive: usize,
    /// Grid points where `H' ≥ 0`.
    pub h_prime_nonnegative: usize,
    pub f_at_start: f64,
    pub h_at_start: f64,
    /// `1/(π Ai'(−y*))`, the expected `H(−y*)`.
    pub h_at_start_expected: f64,
    pub h_at_zero: f64,
    pub h_prime_at_zero: f64,
}

impl PositivityReport {
    pub fn holds(&self) -> bool {
        self.f_nonpositive == 0 && self.h_prime_nonnegative == 0
    }
}

/// `F(z) = 2π(κ* f − g) f + Ai²`, with `κ* = Bi'(−y*)/Ai'(−y*)`.
pub fn f_positivity(q: &AiryQuartet) -> f64 {
    let s = scalar_functions_from(q);
    2.0 * PI * (kappa_star() * s.f_val - s.g_val) * s.f_val + q.ai * q.ai
}

/// `G(z) = g − κ* f`.
pub fn g_positivity(q: &AiryQuartet) -> f64 {
    let s = scalar_functions_from(q);
    s.g_val - kappa_star() * s.f_val
}

/// `(H, H')` with `H = κ* Ai − Bi`.
pub fn h_positivity(q: &AiryQuartet) -> (f64, f64) {
    let k = kappa_star();
    (k * q.ai - q.bi, k * q.dai - q.dbi)
}

/// Evaluate `F` and `H'` on `n` equispaced points of `(−y*, z_max]`.
pub fn positivity_scan(z_max: f64, n: usize) -> Result<PositivityReport> {
    let ys = ystar();
    if !(z_max > -ys) || n < 10 {
        return Err(Error::domain("positivity scan needs z_max > -y* and n >= 10"));
    }
    let mut min_f = f64::INFINITY;
    let mut argmin_f = f64::NAN;
    let (mut f_bad, mut h_bad) = (0, 0);
    for i in 1..=n {
        let z = -ys + (z_max + ys) * i as f64 / n as f64;
        let q = airy_eval(z)?;
        let f = f_positivity(&q);
        if f < min_f {
            min_f = f;
            argmin_f = z;
        }
        if f <= 0.0 {
            f_bad += 1;
        }
        if h_positivity(&q).1 >= 0.0 {
            h_bad += 1;
        }
    }
    let start = airy_eval(-ys)?;
    let zero = airy_eval(0.0)?;
    let (h0, dh0) = h_positivity(&zero);
    Ok(PositivityReport {
        z_max,
        n,
        min_f,
        argmin_f,
        f_nonpositive: f_bad,
        h_prime_nonnegative: h_bad,
        f_at_start: f_positivity(&start),
        h_at_start: h_positivity(&start).0,
        h_at_start_expected: 1.0 / (PI * start.dai),
        h_at_zero: h0,
        h_prime_at_zero: dh0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference values: D∞, V∞ by 30-digit quadrature of the limiting
    // derivative integrands (independent of the 𝓕/𝓖 closed form).
    const LIMITS: &[(f64, f64, f64)] = &[
        (-2.0, 0.74854084166674241, 1.1690536150832274),
        (0.0, 0.53666350109802912, 1.1645379142596608),
        (1.0, 0.11448324808765104, 1.0380958120166505),
        (-6.0, 0.74999999992156003, 1.1690537052298835),
    ];

    #[test]
    fn closed_form_matches_reference() {
        for &(y, d, v) in LIMITS {
            let r = dv_limit(y).unwrap();
            assert!((r.d - d).abs() < 1e-12, "D({y}) = {} vs {d}", r.d);
            assert!((r.v - v).abs() < 1e-12, "V({y}) = {} vs {v}", r.v);
        }
    }

    #[test]
    fn deep_limits() {
        let r = dv_limit(-25.0).unwrap();
        assert!((r.d - 0.75).abs() < 1e-6);
        assert!((r.v - 1.169053705229883).abs() < 1e-6);
    }

    #[test]
    fn vanishes_at_ystar() {
        let r = dv_limit(ystar()).unwrap();
        assert!(r.d.abs() < 1e-12 && r.v.abs() < 1e-12, "{r:?}");
        assert!(dv_limit(ystar() + 0.01).is_err());
    }

    #[test]
    fn finite_section_reference() {
        // (y_in, x_fin, D, V) from 30-digit quadrature.
        let cases = [
            (-2.0, 5.0, 0.7502401433699641, 0.9795600216736722),
            (-2.0, 1000.0, 0.74854084191625486, 1.1680536166412124),
            (-24.9, 30.0, 0.75000921218704605, 1.1357770474719527),
            (-24.9, 5.0, 0.75170282531305027, 0.9795601122562317),
            (-24.9, 10.0, 0.75023928772522812, 1.0705089000575606),
        ];
        for (y, x, d, v) in cases {
            let r = dv_integral(y, x).unwrap();
            assert!((r.d - d).abs() < 1e-7 * d, "D({y},{x}) = {} vs {d}", r.d);
            assert!((r.v - v).abs() < 1e-7 * v, "V({y},{x}) = {} vs {v}", r.v);
        }
    }

    #[test]
    fn empty_interval() {
        let x = slow_x(-1.0).unwrap();
        let r = dv_integral(-1.0, x).unwrap();
        assert_eq!((r.d, r.v), (0.0, 0.0));
    }

    #[test]
    fn d_converges_to_limit() {
        let lim = dv_limit(-2.0).unwrap();
        let mut last = f64::INFINITY;
        for x in [5.0, 10.0, 30.0, 100.0, 1e3] {
            let gap = (dv_integral(-2.0, x).unwrap().d - lim.d).abs();
            assert!(gap < last, "x_fin = {x}");
            last = gap;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn v_gap_is_distance_to_ystar() {
        // The V integrand tends to 1 near y*, so V(x_fin) falls short of V∞
        // by about y* − y_fin ≈ 1/x_fin.
        for x in [30.0, 100.0, 1e3] {
            let r = dv_integral(-2.0, x).unwrap();
            let lim = dv_limit(-2.0).unwrap();
            let y_fin = FinalSection::on_slow_solution(-2.0, x).unwrap().y_fin;
            let gap = lim.v - r.v;
            assert!((gap - (ystar() - y_fin)).abs() < 2.0 / (x * x), "x_fin = {x}: {gap}");
        }
    }

    #[test]
    fn plateau_near_fig4_values() {
        let r = dv_integral(-24.9, 30.0).unwrap();
        assert!((r.d - 0.75).abs() < 0.02);
    }

    #[test]
    fn limit_curve_decreases() {
        let ys = ystar();
        let mut prev = dv_limit(-6.0).unwrap();
        let mut y = -6.0;
        while y < ys - 0.02 {
            y += 0.02;
            let r = dv_limit(y).unwrap();
            assert!(r.d <= prev.d + 1e-12 && r.v <= prev.v + 1e-12, "y = {y}");
            assert!(r.d > 0.0 && r.v > 0.0);
            prev = r;
        }
    }

    #[test]
    fn positivity_holds() {
        let rep = positivity_scan(10.0, 2000).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert!(rep.min_f > 0.0);
        assert!(rep.f_at_start.abs() < 1e-14);
        assert!((rep.h_at_start - rep.h_at_start_expected).abs() < 1e-13);
        assert!(rep.h_at_zero < 0.0 && rep.h_prime_at_zero < 0.0);
        let q = airy_eval(-ystar() + 1e-9).unwrap();
        assert!(f_positivity(&q).abs() < 1e-7);
    }

    #[test]
    fn g_vanishes_at_start() {
        let q = airy_eval(-ystar()).unwrap();
        assert!(g_positivity(&q).abs() < 1e-13);
        assert!(h_positivity(&q).1.abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn v_limit_agrees_with_integral_form(y in -6.0f64..2.3) {
            // ∫ (1 + ∂_yT∞)² dy over [y_in, y*] versus the 𝓕 closed form.
            let ys = ystar();
            let dai = airy_eval(-ys).unwrap().dai;
            let integrand = |u: f64| {
                let q = airy_eval(-u).unwrap();
                let c = u * q.ai * q.ai + q.dai * q.dai;
                (c / (dai * dai)).powi(2)
            };
            let v = integrate(integrand, y, ys, DV_QUAD).unwrap().value;
            prop_assert!((v - dv_limit(y).unwrap().v).abs() < 1e-6);
        }

        #[test]
        fn d_and_v_positive(y in -10.0f64..2.3, x in 1.0f64..50.0) {
            prop_assume!(slow_x(y).unwrap() < x);
            let r = dv_integral(y, x).unwrap();
            prop_assert!(r.d > 0.0 && r.v > 0.0);
        }
    }
}
