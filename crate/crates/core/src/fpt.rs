//! First passage of integrated Brownian motion `σX_t`, `X_t = ∫₀ᵗ W_s ds`,
//! through a decreasing boundary `d(t)` with `d(δ) = 0`, `d′(δ) = −1`.
//!
//! The density is `ψ = b φ`, where `φ` is the Gaussian marginal of `σX_t` at
//! `d(t)` and `b` solves the Durbin fixed-point equation
//!
//! ```text
//! b(t) = b₀(t) + 1/(σ√2π) ∫₀ᵗ √(ρ(t,t)/(ρ(s,t,t)ρ(s,s))) b̃(s,t) b(s) e^{−r(s,t)/2σ²} ds
//! ```
//!
//! solved here by Picard iteration on a uniform grid of `(0, 2δ]`. A
//! Monte Carlo sampler with exact Gaussian steps of `(W, X)` serves as the
//! independent check, and [`slice_prediction`] / [`slice_monte_carlo`]
//! connect the result to the exit height of the nonlinear flow across a thin
//! slice `[x₀, x₀ + δ]`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::travel_time;
use crate::quad::trapezoid;
use crate::rng::NormalStream;
use crate::sde::{simulate_sections, FlowConfig, HitStatus, Kernel};
use crate::stats::pairwise_sum;

/// Boundary curve in the normalized form `d(δ) = 0`, `d′(δ) = −1`.
pub trait Boundary: Sync {
    fn value(&self, t: f64) -> f64;
    fn deriv1(&self, t: f64) -> f64;
    fn deriv2(&self, t: f64) -> f64;
    /// Zero-crossing time `δ`.
    fn delta(&self) -> f64;
}

/// `d(t) = δ − t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearBoundary {
    pub delta: f64,
}

impl LinearBoundary {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!("delta must be positive, got {delta}")));
        }
        Ok(LinearBoundary { delta })
    }
}

impl Boundary for LinearBoundary {
    fn value(&self, t: f64) -> f64 {
        self.delta - t
    }
    fn deriv1(&self, _t: f64) -> f64 {
        -1.0
    }
    fn deriv2(&self, _t: f64) -> f64 {
        0.0
    }
    fn delta(&self) -> f64 {
        self.delta
    }
}

/// `d(t) = −(t − δ) + c (t − δ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticBoundary {
    pub delta: f64,
    pub c: f64,
}

impl QuadraticBoundary {
    /// Requires `2|c|δ < 1` so that `d` is strictly decreasing on `[0, 2δ]`.
    pub fn new(delta: f64, c: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!("delta must be positive, got {delta}")));
        }
        if !(2.0 * c.abs() * delta < 1.0) {
            return Err(Error::domain(format!("boundary not decreasing on [0, 2δ] for c = {c}")));
        }
        Ok(QuadraticBoundary { delta, c })
    }
}

impl Boundary for QuadraticBoundary {
    fn value(&self, t: f64) -> f64 {
        let u = t - self.delta;
        -u + self.c * u * u
    }
    fn deriv1(&self, t: f64) -> f64 {
        -1.0 + 2.0 * self.c * (t - self.delta)
    }
    fn deriv2(&self, _t: f64) -> f64 {
        2.0 * self.c
    }
    fn delta(&self) -> f64 {
        self.delta
    }
}

/// `E[(X_u − X_s)(X_t − X_s)]` for `0 ≤ s ≤ u ≤ t`.
pub fn rho3(s: f64, u: f64, t: f64) -> Result<f64> {
    if !(0.0 <= s && s <= u && u <= t) {
        return Err(Error::domain(format!("rho3 needs 0 ≤ s ≤ u ≤ t, got ({s}, {u}, {t})")));
    }
    Ok(rho3_unchecked(s, u, t))
}

fn rho3_unchecked(s: f64, u: f64, t: f64) -> f64 {
    2.0 / 3.0 * s * s * s - u * u * u / 6.0 + 0.5 * (u * u * t - s * s * u - s * s * t)
}

/// `E[X_s X_t]`, `s ≤ t`.
#[cfg(test)]
fn rho(s: f64, t: f64) -> f64 {
    s * s * (0.5 * t - s / 6.0)
}

/// `ρ(s,t,t) = (t − s)²(t + 2s)/3`, factored to avoid cancellation.
fn rho_stt(s: f64, t: f64) -> f64 {
    (t - s) * (t - s) * (t + 2.0 * s) / 3.0
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be positive, got {t}")))
    }
}

/// Density of `σX_t` at `d(t)`.
pub fn phi(t: f64, d: &impl Boundary, sigma: f64) -> Result<f64> {
    check_t(t)?;
    Ok(phi_unchecked(t, d, sigma))
}

fn phi_unchecked(t: f64, d: &impl Boundary, sigma: f64) -> f64 {
    let v = t * t * t / 3.0;
    let dv = d.value(t);
    (-dv * dv / (2.0 * sigma * sigma * v)).exp() / (sigma * (2.0 * PI * v).sqrt())
}

/// Leading Durbin coefficient `b₀(t) = 3d(t)/(2t) − d′(t)`.
pub fn b0(t: f64, d: &impl Boundary) -> Result<f64> {
    check_t(t)?;
    Ok(b0_unchecked(t, d))
}

fn b0_unchecked(t: f64, d: &impl Boundary) -> f64 {
    1.5 * d.value(t) / t - d.deriv1(t)
}

/// Closed-form `(β₁, β₂)` for `0 < s < t`.
pub fn betas(s: f64, t: f64) -> Result<(f64, f64)> {
    check_pair(s, t)?;
    Ok(betas_unchecked(s, t))
}

fn betas_unchecked(s: f64, t: f64) -> (f64, f64) {
    let w = (t - s) * (4.0 * t - s);
    (-3.0 * t * t / (s * w), 3.0 * (2.0 * t - s) / w)
}

fn check_pair(s: f64, t: f64) -> Result<()> {
    if 0.0 < s && s < t && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("need 0 < s < t, got ({s}, {t})")))
    }
}

/// `b̃(s,t) = d′(t) − β₁ d(s) − β₂ d(t)` for `0 < s < t`.
pub fn btilde(s: f64, t: f64, d: &impl Boundary) -> Result<f64> {
    check_pair(s, t)?;
    Ok(btilde_unchecked(s, t, d))
}

fn btilde_unchecked(s: f64, t: f64, d: &impl Boundary) -> f64 {
    let (b1, b2) = betas_unchecked(s, t);
    d.deriv1(t) - b1 * d.value(s) - b2 * d.value(t)
}

/// Exponent `r(s,t)`; at `s = t` its limit `d′(t)²/t`.
pub fn r_exponent(s: f64, t: f64, d: &impl Boundary) -> Result<f64> {
    if !(0.0 < s && s <= t && t.is_finite()) {
        return Err(Error::domain(format!("need 0 < s ≤ t, got ({s}, {t})")));
    }
    Ok(r_unchecked(s, t, d))
}

fn r_unchecked(s: f64, t: f64, d: &impl Boundary) -> f64 {
    if s == t {
        let dp = d.deriv1(t);
        return dp * dp / t;
    }
    let (ds, dt) = (d.value(s), d.value(t));
    3.0 * (ds * ds / (s * s * s) - dt * dt / (t * t * t)) + (dt - ds) * (dt - ds) / rho_stt(s, t)
}

/// Integrand of the fixed-point equation without `b(s)` and the `1/(σ√2π)`
/// factor; the diagonal uses the removable limit
/// `[3d − 2t d′ + (3/2)t² d″] / (3 t^{5/2}) · e^{−d′²/(2σ²t)}`.
pub fn kernel(s: f64, t: f64, d: &impl Boundary, sigma: f64) -> f64 {
    let two_s2 = 2.0 * sigma * sigma;
    if s == t {
        let pre = (3.0 * d.value(t) - 2.0 * t * d.deriv1(t) + 1.5 * t * t * d.deriv2(t)) / (3.0 * t * t * t.sqrt());
        let dp = d.deriv1(t);
        return pre * (-dp * dp / (two_s2 * t)).exp();
    }
    let e = -r_unchecked(s, t, d) / two_s2;
    if e < -745.0 {
        return 0.0;
    }
    let geom = (t * t * t / (rho_stt(s, t) * s * s * s / 3.0) / 3.0).sqrt();
    geom * btilde_unchecked(s, t, d) * e.exp()
}

/// Solution of the Durbin equation on `t_k = k·2δ/n`, `k = 1..n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FptDensityGrid {
    pub t_nodes: Vec<f64>,
    pub b_vals: Vec<f64>,
    pub b0_vals: Vec<f64>,
    pub phi_vals: Vec<f64>,
    pub psi_vals: Vec<f64>,
    pub sigma: f64,
    pub iterations_used: usize,
    /// Sup-norm change of the last Picard step.
    pub residual: f64,
}

pub const DEFAULT_GRID_N: usize = 400;
const PICARD_TOL: f64 = 1e-12;
const PICARD_MAX: usize = 50;

/// Picard iteration `b ← b₀ + Γb` with trapezoidal inner quadrature, started
/// from `b₀`. The interval `(0, t₁)` is dropped: the kernel is exponentially
/// small there.
pub fn solve_b(d: &impl Boundary, sigma: f64, grid_n: usize) -> Result<FptDensityGrid> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if grid_n < 50 {
        return Err(Error::domain(format!("grid_n must be at least 50, got {grid_n}")));
    }
    let n = grid_n;
    let h = 2.0 * d.delta() / n as f64;
    let t: Vec<f64> = (1..=n).map(|k| k as f64 * h).collect();
    let b0v: Vec<f64> = t.iter().map(|&tk| b0_unchecked(tk, d)).collect();
    // Row k holds the trapezoid-weighted kernel K(t_j, t_k), j ≤ k.
    let scale = h / (sigma * (2.0 * PI).sqrt());
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            (0..=k)
                .map(|j| {
                    let w = if k == 0 { 0.0 } else if j == 0 || j == k { 0.5 } else { 1.0 };
                    w * scale * kernel(t[j], t[k], d, sigma)
                })
                .collect()
        })
        .collect();
    let mut b = b0v.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < PICARD_MAX {
        let next: Vec<f64> = (0..n)
            .map(|k| b0v[k] + rows[k].iter().zip(&b).map(|(w, bj)| w * bj).sum::<f64>())
            .collect();
        residual = next.iter().zip(&b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        b = next;
        iterations += 1;
        if residual < PICARD_TOL {
            break;
        }
    }
    if !(residual < PICARD_TOL) {
        return Err(Error::NoConvergence { what: "Picard iteration for b", achieved: residual });
    }
    let phi_vals: Vec<f64> = t.iter().map(|&tk| phi_unchecked(tk, d, sigma)).collect();
    let psi_vals = b.iter().zip(&phi_vals).map(|(bk, pk)| bk * pk).collect();
    Ok(FptDensityGrid {
        t_nodes: t,
        b_vals: b,
        b0_vals: b0v,
        phi_vals,
        psi_vals,
        sigma,
        iterations_used: iterations,
        residual,
    })
}

impl FptDensityGrid {
    /// Grid with the origin prepended (`ψ(0) = 0`), for quadrature.
    fn with_origin(&self, f: impl Fn(f64, f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let mut x = Vec::with_capacity(self.t_nodes.len() + 1);
        let mut y = Vec::with_capacity(self.t_nodes.len() + 1);
        x.push(0.0);
        y.push(0.0);
        for (&t, &p) in self.t_nodes.iter().zip(&self.psi_vals) {
            x.push(t);
            y.push(f(t, p));
        }
        (x, y)
    }

    /// `∫₀ᵗ ψ` at every node (cumulative trapezoid), starting with `t = 0`.
    pub fn cdf(&self) -> (Vec<f64>, Vec<f64>) {
        let (x, y) = self.with_origin(|_, p| p);
        let mut c = vec![0.0; x.len()];
        for i in 1..x.len() {
            c[i] = c[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        }
        (x, c)
    }
}

/// Raw moments `∫ tᵏ ψ dt`, `k = 0..=max_order`, and the centred variance of
/// the normalized density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FptMoments {
    pub raw: Vec<f64>,
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn fpt_moments(grid: &FptDensityGrid, max_order: usize) -> FptMoments {
    let raw: Vec<f64> = (0..=max_order.max(2))
        .map(|k| {
            let (x, y) = grid.with_origin(|t, p| t.powi(k as i32) * p);
            trapezoid(&x, &y)
        })
        .collect();
    let mass = raw[0];
    let mean = raw[1] / mass;
    let (x, y) = grid.with_origin(|t, p| (t - mean).powi(2) * p);
    let variance = trapezoid(&x, &y) / mass;
    FptMoments { raw: raw[..=max_order].to_vec(), mass, mean, variance }
}

/// One exact step of `(W, X)`: `ΔW = √dt z₁`,
/// `ΔX = W dt + dt^{3/2}(z₁/2 + z₂/(2√3))`.
#[inline]
pub fn integrated_bm_step(w: f64, x: f64, dt: f64, z1: f64, z2: f64) -> (f64, f64) {
    let sq = dt.sqrt();
    let x_new = x + w * dt + dt * sq * (0.5 * z1 + z2 / (2.0 * 3f64.sqrt()));
    (w + sq * z1, x_new)
}

/// First-passage times of `σX_t` through `d`, one per path; `NaN` marks a
/// path that has not crossed by `t_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FptSample {
    pub tau: Vec<f64>,
    pub n_timed_out: u64,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
}

impl FptSample {
    pub fn hits(&self) -> Vec<f64> {
        self.tau.iter().copied().filter(|t| !t.is_nan()).collect()
    }
}

/// Exact-step Monte Carlo of `τ⁰ = inf{t > 0 : σX_t ≥ d(t)}` with linear
/// interpolation of the crossing inside a step. Horizon `t_max = 4δ`.
pub fn mc_integrated_bm(d: &impl Boundary, sigma: f64, n_paths: u64, dt: f64, seed: u64) -> Result<FptSample> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("sigma must be finite and ≥ 0, got {sigma}")));
    }
    if !(dt > 0.0 && dt < d.delta()) {
        return Err(Error::Config(format!("dt must lie in (0, δ), got {dt}")));
    }
    if n_paths == 0 {
        return Err(Error::Config("n_paths must be positive".into()));
    }
    let max_steps = (4.0 * d.delta() / dt).ceil() as u64;
    let tau: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut z = NormalStream::new(seed, i);
            let (mut w, mut x) = (0.0, 0.0);
            let mut g = -d.value(0.0);
            for k in 0..max_steps {
                let (w1, x1) = integrated_bm_step(w, x, dt, z.next_normal(), z.next_normal());
                let t1 = (k + 1) as f64 * dt;
                let g1 = sigma * x1 - d.value(t1);
                if g1 >= 0.0 {
                    return (k as f64 + g / (g - g1)) * dt;
                }
                (w, x, g) = (w1, x1, g1);
            }
            f64::NAN
        })
        .collect();
    let hits: Vec<f64> = tau.iter().copied().filter(|t| !t.is_nan()).collect();
    let m = crate::stats::moments(&hits);
    Ok(FptSample {
        n_timed_out: (tau.len() - hits.len()) as u64,
        mean: m.mean,
        variance: m.var,
        se_mean: m.se_mean(),
        tau,
    })
}

/// Sup distance between the sample's empirical CDF and `∫ψ`.
pub fn ks_against_grid(sample: &FptSample, grid: &FptDensityGrid) -> f64 {
    let (x, c) = grid.cdf();
    crate::stats::ks_distance(&sample.hits(), &x, &c)
}

/// Leading-order moments of `Z = y_τ − y₀ − T` for the flow crossing the
/// slice `[x₀, x₀ + δ]`, with `T` the exact deterministic travel time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicePrediction {
    pub r0: f64,
    pub travel_time: f64,
    /// `E Z = T²σ²/(2r₀²)`.
    pub mean: f64,
    /// `E Z² = Tσ² − T²σ²/r₀`.
    pub second: f64,
    /// `E Z³`: zero at the orders the expansion resolves.
    pub third: f64,
}

pub fn slice_prediction(x0: f64, y0: f64, delta: f64, sigma: f64) -> Result<SlicePrediction> {
    let r0 = x0 * x0 + y0;
    if !(r0 > 0.0) {
        return Err(Error::domain(format!("slice needs x0² + y0 > 0, got {r0}")));
    }
    let t = travel_time(x0, y0, x0 + delta)?;
    let s2 = sigma * sigma;
    Ok(SlicePrediction {
        r0,
        travel_time: t,
        mean: t * t * s2 / (2.0 * r0 * r0),
        second: t * s2 - t * t * s2 / r0,
        third: 0.0,
    })
}

/// Raw moments of `Z` from a direct Monte Carlo run, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceMoments {
    pub n_hit: u64,
    pub moments: [f64; 3],
    pub std_errors: [f64; 3],
}

pub fn slice_monte_carlo(x0: f64, y0: f64, delta: f64, sigma: f64, n_paths: u64, dt: f64, seed: u64) -> Result<SliceMoments> {
    let t = travel_time(x0, y0, x0 + delta)?;
    let cfg = FlowConfig {
        x_in: x0,
        y_in: y0,
        x_fin: x0 + delta,
        sigma,
        dt,
        n_paths,
        seed,
        t_max: Some(10.0 * t + 1.0),
        tube_h0: None,
    };
    let rec = simulate_sections(&cfg, &[cfg.x_fin], Kernel::Auto)?;
    let z: Vec<f64> = rec.iter().filter(|r| r.status == HitStatus::Hit).map(|r| r.y_tau - y0 - t).collect();
    let n = z.len() as f64;
    let mut moments = [0.0; 3];
    let mut std_errors = [0.0; 3];
    for (k, (m, se)) in moments.iter_mut().zip(&mut std_errors).enumerate() {
        let p = (k + 1) as i32;
        let pow: Vec<f64> = z.iter().map(|v| v.powi(p)).collect();
        let mean = pairwise_sum(&pow) / n;
        let sq: Vec<f64> = pow.iter().map(|v| (v - mean).powi(2)).collect();
        *m = mean;
        *se = (pairwise_sum(&sq) / (n - 1.0) / n).sqrt();
    }
    Ok(SliceMoments { n_hit: z.len() as u64, moments, std_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn covariance_identities() {
        let (s, t) = (0.03, 0.08);
        assert!((rho3(0.0, t, t).unwrap() - t * t * t / 3.0).abs() < 1e-18);
        assert!((rho3(0.0, s, t).unwrap() - (-s * s * s / 6.0 + s * s * t / 2.0)).abs() < 1e-18);
        let want = (t - s) * (t - s) * (t + 2.0 * s) / 3.0;
        assert!((rho3(s, t, t).unwrap() - want).abs() < 1e-18);
        assert!((rho_stt(s, t) - want).abs() < 1e-18);
        assert!(rho3(0.05, 0.04, 0.1).is_err());
    }

    #[test]
    fn phi_and_b0_values() {
        let d = LinearBoundary::new(0.1).unwrap();
        let sigma = 0.1;
        let want = 1.0 / (sigma * (2.0 * PI * 1e-3 / 3.0).sqrt());
        assert!((phi(0.1, &d, sigma).unwrap() - want).abs() < 1e-12 * want);
        assert_eq!(phi(1e-4, &d, sigma).unwrap(), 0.0);
        assert!(phi(0.0, &d, sigma).is_err());
        assert!((b0(0.1, &d).unwrap() - 1.0).abs() < 1e-15);
        assert!((b0(0.05, &d).unwrap() - 2.5).abs() < 1e-14);
        let q = QuadraticBoundary::new(0.1, 2.0).unwrap();
        assert!((b0(0.1, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_even_in_boundary() {
        struct Neg(LinearBoundary);
        impl Boundary for Neg {
            fn value(&self, t: f64) -> f64 {
                -self.0.value(t)
            }
            fn deriv1(&self, t: f64) -> f64 {
                -self.0.deriv1(t)
            }
            fn deriv2(&self, _t: f64) -> f64 {
                0.0
            }
            fn delta(&self) -> f64 {
                self.0.delta
            }
        }
        let d = LinearBoundary::new(0.1).unwrap();
        for t in [0.07, 0.1, 0.13] {
            assert_eq!(phi(t, &d, 0.1).unwrap(), phi(t, &Neg(d), 0.1).unwrap());
        }
    }

    /// Gaussian-kernel density of `σX_t` from exact draws `X_t ~ N(0, t³/3)`.
    fn kde(t: f64, at: f64, sigma: f64, n: u64) -> f64 {
        let sd = sigma * (t * t * t / 3.0).sqrt();
        let bw = 0.05 * sd;
        let mut z = NormalStream::new(11, 0);
        let mut acc = 0.0;
        for _ in 0..n {
            let u = (sd * z.next_normal() - at) / bw;
            acc += (-0.5 * u * u).exp();
        }
        acc / (n as f64 * bw * (2.0 * PI).sqrt())
    }

    #[test]
    fn phi_matches_sampled_density() {
        let d = LinearBoundary::new(0.1).unwrap();
        // At t = δ/2 the boundary lies ~77 standard deviations out: both vanish.
        assert_eq!(phi(0.05, &d, 0.1).unwrap(), kde(0.05, d.value(0.05), 0.1, 1000));
        let p = phi(0.1, &d, 0.1).unwrap();
        assert!((kde(0.1, 0.0, 0.1, 1_000_000) - p).abs() < 0.02 * p);
    }

    #[test]
    fn betas_solve_the_linear_system() {
        let (s, t): (f64, f64) = (0.03, 0.08);
        let (a, b, c) = (rho(s, s), rho(s, t), rho(t, t));
        let (r1, r2) = (s * s / 2.0, t * t / 2.0);
        let det = a * c - b * b;
        let want = ((c * r1 - b * r2) / det, (a * r2 - b * r1) / det);
        let got = betas(s, t).unwrap();
        assert!((got.0 - want.0).abs() < 1e-12 * want.0.abs());
        assert!((got.1 - want.1).abs() < 1e-12 * want.1.abs());
        assert!(betas(t, t).is_err() && betas(0.0, t).is_err());
    }

    #[test]
    fn btilde_taylor_form_and_diagonal() {
        let d = LinearBoundary::new(0.1).unwrap();
        let (s, t) = (0.03, 0.08);
        let taylor = (t - s) / (s * (4.0 * t - s)) * (3.0 * d.value(t) - (3.0 * t - s) * d.deriv1(t));
        assert!((btilde(s, t, &d).unwrap() - taylor).abs() < 1e-12);
        let near = btilde(t - 1e-7, t, &d).unwrap();
        assert!(near.abs() < 1e-4);
    }

    #[test]
    fn r_exponent_values() {
        let d = LinearBoundary::new(0.1).unwrap();
        assert!(r_exponent(0.05, 0.1, &d).unwrap() > 0.0);
        let t = 0.07;
        assert!((r_exponent(t, t, &d).unwrap() - 1.0 / t).abs() < 1e-12);
        let near = r_exponent(t - 1e-6, t, &d).unwrap();
        assert!((near - 1.0 / t).abs() < 1e-3);
    }

    #[test]
    fn r_min_scan_is_positive() {
        for d in [&LinearBoundary::new(0.1).unwrap() as &dyn BoundaryDyn, &QuadraticBoundary::new(0.1, 1.5).unwrap()] {
            let n = 200;
            let mut min = f64::INFINITY;
            for i in 1..=n {
                let t = 0.2 * i as f64 / n as f64;
                for j in 1..=i {
                    let s = t * j as f64 / i as f64;
                    min = min.min(d.r(s, t) * s * s * s / (t * t));
                }
            }
            assert!(min > 0.0, "r_min scan {min}");
        }
    }

    trait BoundaryDyn {
        fn r(&self, s: f64, t: f64) -> f64;
    }
    impl<B: Boundary> BoundaryDyn for B {
        fn r(&self, s: f64, t: f64) -> f64 {
            r_unchecked(s, t, self)
        }
    }

    #[test]
    fn kernel_diagonal_is_the_limit() {
        let q = QuadraticBoundary::new(0.1, 1.5).unwrap();
        let t = 0.09;
        let diag = kernel(t, t, &q, 1.0);
        let near = kernel(t - 1e-6, t, &q, 1.0);
        assert!((diag - near).abs() < 1e-4 * diag.abs(), "{diag} {near}");
    }

    #[test]
    fn small_noise_density() {
        let d = LinearBoundary::new(0.1).unwrap();
        let g = solve_b(&d, 0.05, DEFAULT_GRID_N).unwrap();
        let corr = g.t_nodes.iter().zip(g.b_vals.iter().zip(&g.b0_vals)).map(|(t, (b, b0))| t * (b - b0).abs()).fold(0.0, f64::max);
        assert!(corr <= 1e-8, "{corr}");
        let m = fpt_moments(&g, 2);
        assert!((m.mass - 1.0).abs() < 1e-3, "{}", m.mass);
        assert!(g.psi_vals.iter().all(|&p| p >= 0.0));
        assert!(g.b_vals.iter().all(|&b| b > 0.0));
        for i in 0..g.t_nodes.len() {
            assert_eq!(g.psi_vals[i], g.b_vals[i] * g.phi_vals[i]);
        }
        let g2 = solve_b(&d, 0.02, DEFAULT_GRID_N).unwrap();
        assert!(g2.iterations_used <= 3, "{}", g2.iterations_used);
    }

    #[test]
    fn moments_match_expansion() {
        let d = LinearBoundary::new(0.1).unwrap();
        let m = fpt_moments(&solve_b(&d, 0.1, DEFAULT_GRID_N).unwrap(), 3);
        assert!((m.mean - 0.10005).abs() < 2e-5, "{}", m.mean);
        assert!((m.variance - 1e-5 / 3.0).abs() < 1.5e-6, "{}", m.variance);
        // E τ³ = δ³ + O(δ⁴σ²)
        assert!((m.raw[3] - 1e-3).abs() < 5e-6, "{}", m.raw[3]);
    }

    #[test]
    fn moments_collapse_as_noise_vanishes() {
        let d = LinearBoundary::new(0.1).unwrap();
        let m = fpt_moments(&solve_b(&d, 0.01, 2000).unwrap(), 2);
        assert!((m.mean - 0.1).abs() < 1e-6);
        assert!(m.variance < 1e-7);
    }

    #[test]
    fn solver_rejects_bad_input() {
        let d = LinearBoundary::new(0.1).unwrap();
        assert!(solve_b(&d, 0.0, 400).is_err());
        assert!(solve_b(&d, 0.1, 10).is_err());
        assert!(QuadraticBoundary::new(0.1, 6.0).is_err());
    }

    #[test]
    fn exact_step_variance() {
        let n = 1_000_000u64;
        let steps = 10;
        let dt = 0.01;
        let xs: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut z = NormalStream::new(5, i);
                let (mut w, mut x) = (0.0, 0.0);
                for _ in 0..steps {
                    (w, x) = integrated_bm_step(w, x, dt, z.next_normal(), z.next_normal());
                }
                x
            })
            .collect();
        let var = pairwise_sum(&xs.iter().map(|x| x * x).collect::<Vec<_>>()) / n as f64;
        assert!((var / (1e-3 / 3.0) - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn zero_noise_hits_at_delta() {
        let d = LinearBoundary::new(0.1).unwrap();
        let s = mc_integrated_bm(&d, 0.0, 64, 1e-3, 1).unwrap();
        assert_eq!(s.n_timed_out, 0);
        assert!(s.tau.iter().all(|t| (t - 0.1).abs() < 1e-12));
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let d = LinearBoundary::new(0.1).unwrap();
        let g = solve_b(&d, 0.1, DEFAULT_GRID_N).unwrap();
        let m = fpt_moments(&g, 2);
        let s = mc_integrated_bm(&d, 0.1, 20_000, 1e-4, 3).unwrap();
        assert!((s.mean - m.mean).abs() < 3.0 * s.se_mean, "{} {}", s.mean, m.mean);
        assert!(ks_against_grid(&s, &g) < 0.02);
    }

    #[test]
    fn slice_prediction_values() {
        let p = slice_prediction(-2.0, -3.5, 0.05, 0.02).unwrap();
        assert_eq!(p.r0, 0.5);
        assert!((p.travel_time - 0.1).abs() < 0.02);
        assert!(p.mean > 0.0 && p.second > 0.0);
        assert!(slice_prediction(0.0, -1.0, 0.05, 0.02).is_err());
    }

    proptest! {
        #[test]
        fn rho3_symmetric_form(s in 0.0f64..0.1, a in 0.0f64..0.1, b in 0.0f64..0.1) {
            let (u, t) = (s + a.min(b), s + a.max(b));
            // ρ(s,u,t) = E[X_u X_t] − E[X_s X_t] − E[X_s X_u] + E[X_s²]
            let via = rho(u, t) - rho(s, t) - rho(s, u) + rho(s, s);
            prop_assert!((rho3(s, u, t).unwrap() - via).abs() < 1e-15);
        }

        #[test]
        fn btilde_taylor_quadratic(s in 0.005f64..0.19, f in 0.05f64..0.95, c in -2.0f64..2.0) {
            let d = QuadraticBoundary::new(0.1, c).unwrap();
            let t = s + f * (0.2 - s);
            // d″ is constant, so the Taylor form is exact.
            let taylor = (t - s) / (s * (4.0 * t - s))
                * (3.0 * d.value(t) - (3.0 * t - s) * d.deriv1(t) + 1.5 * t * t * d.deriv2(t));
            let got = btilde(s, t, &d).unwrap();
            prop_assert!((got - taylor).abs() < 1e-9 * (1.0 + taylor.abs()));
        }
    }
}
