//! Numerical toolkit for the dynamic saddle-node bifurcation with noise on
//! the slow variable.
//!
//! The scaled system is
//!
//! ```text
//! dx = (y + x²) dt
//! dy = dt + σ dW
//! ```
//!
//! and the crate provides:
//!
//! - [`airy`]: double-precision Ai, Bi and derivatives, the largest Ai zero
//!   `y*`, and the scalar functions `f`, `𝓕`, `𝓖`, `g` built from them.
//! - [`flow`]: the σ = 0 Riccati/Airy solution, travel times and their
//!   closed-form derivatives in the initial slow coordinate.
//! - [`dv`]: the noise coefficients `D` and `V` (integral and limiting forms)
//!   and the positivity scan for the limiting `D`.
//! - [`sde`]: seed-reproducible Euler–Maruyama Monte Carlo of exit heights.
//! - [`fpt`]: first-passage densities of integrated Brownian motion through a
//!   decreasing boundary.

pub mod airy;
pub mod dv;
mod error;
pub mod flow;
pub mod fpt;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod sde;
pub mod stats;

pub use airy::{airy_eval, scalar_functions, ystar, AiryQuartet, ScalarFunctionTable};
pub use dv::{dv_integral, dv_limit, positivity_scan, DVResult, PositivityReport};
pub use error::{Error, Result};
pub use fpt::{Boundary, FptDensityGrid, FptMoments, LinearBoundary, QuadraticBoundary};
pub use sde::{FlowConfig, HitRecord, HitStatus, MomentSummary, SweepRow};
pub use flow::{
    riccati_from_initial, travel_time, travel_time_derivative_limits, travel_time_derivatives,
    FlowPoint, RiccatiSolution, ScaleDirection, TravelTimeDerivatives,
};
