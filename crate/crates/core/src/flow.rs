//! The noiseless flow `ẋ = y + x²`, `ẏ = 1`.
//!
//! Along an orbit `y = y_in + t`, so the fast variable is a function of `y`:
//!
//! ```text
//! x(y) = (α Ai'(-y) + β Bi'(-y)) / (α Ai(-y) + β Bi(-y))
//! ```
//!
//! with `K = β/α`. Orbits are stored through the normalised pair `(α, β)` so
//! that `K = ∞` (a pure Bi orbit) needs no special case.

use std::f64::consts::PI;

use serde::Serialize;

use crate::airy::{airy_eval, ystar, AiryQuartet};
use crate::error::{Error, Result};
use crate::roots;

/// Point of the `(x, y)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowPoint {
    pub x: f64,
    pub y: f64,
}

/// Orbit of the noiseless system through a given initial point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiSolution {
    pub y_in: f64,
    /// Airy mixing constant `K`; infinite for a pure Bi orbit.
    #[serde(rename = "K")]
    pub k: f64,
    alpha: f64,
    beta: f64,
}

const POLE_GUARD: f64 = 1e-300;

impl RiccatiSolution {
    fn from_coefficients(y_in: f64, alpha: f64, beta: f64) -> Self {
        let n = alpha.hypot(beta);
        let (alpha, beta) = (alpha / n, beta / n);
        RiccatiSolution { y_in, k: beta / alpha, alpha, beta }
    }

    /// The slow solution (`K = 0`).
    pub fn slow(y_in: f64) -> Self {
        RiccatiSolution { y_in, k: 0.0, alpha: 1.0, beta: 0.0 }
    }

    pub fn is_slow(&self) -> bool {
        self.beta == 0.0
    }

    fn numerator_denominator(&self, y: f64) -> Result<(f64, f64)> {
        let q = airy_eval(-y)?;
        Ok(self.combine(&q))
    }

    fn combine(&self, q: &AiryQuartet) -> (f64, f64) {
        if self.beta == 0.0 {
            (q.dai, q.ai)
        } else {
            (self.alpha * q.dai + self.beta * q.dbi, self.alpha * q.ai + self.beta * q.bi)
        }
    }

    /// Fast variable on the orbit when the slow variable equals `y`.
    pub fn x_at_y(&self, y: f64) -> Result<f64> {
        let (num, den) = self.numerator_denominator(y)?;
        if den.abs() < POLE_GUARD || !(num / den).is_finite() {
            return Err(Error::Divergence(format!("orbit has a pole at y = {y}")));
        }
        Ok(num / den)
    }

    /// Fast variable at time `t` after the initial point.
    pub fn x_det(&self, t: f64) -> Result<f64> {
        self.x_at_y(self.y_in + t)
    }

    /// `(N − x_fin·Den)·sign Den(y_in)`: negative while the orbit is left of
    /// `x_fin` and positive from the crossing up to (and through) the pole.
    fn crossing_function(&self, x_fin: f64) -> Result<impl Fn(f64) -> f64 + '_> {
        let (_, den0) = self.numerator_denominator(self.y_in)?;
        let s = den0.signum();
        Ok(move |y: f64| match self.numerator_denominator(y) {
            Ok((n, d)) => s * (n - x_fin * d),
            Err(_) => f64::NAN,
        })
    }

    /// Slow coordinate at which the orbit reaches `x_fin`.
    pub fn y_at_x(&self, x_fin: f64) -> Result<f64> {
        let x_in = self.x_at_y(self.y_in)?;
        if !x_fin.is_finite() {
            return Err(Error::domain(format!("target section must be finite, got {x_fin}")));
        }
        if x_fin == x_in {
            return Ok(self.y_in);
        }
        if x_fin < x_in {
            return Err(Error::domain(format!(
                "target x_fin = {x_fin} lies behind the initial x_in = {x_in}"
            )));
        }
        let h = self.crossing_function(x_fin)?;
        let (lo, hi) = if self.is_slow() {
            (self.y_in, ystar().max(self.y_in))
        } else {
            self.march_bracket(&h)?
        };
        roots::brent(&h, lo, hi, 0.0, 400)
    }

    fn march_bracket(&self, h: &impl Fn(f64) -> f64) -> Result<(f64, f64)> {
        let mut lo = self.y_in;
        let mut k = 0;
        loop {
            let step = (1e-3 * 2f64.powi(k)).min(0.25);
            let hi = lo + step;
            let v = h(hi);
            if v.is_nan() {
                return Err(Error::domain(format!("orbit left the evaluation range near y = {hi}")));
            }
            if v > 0.0 {
                return Ok((lo, hi));
            }
            lo = hi;
            k += 1;
        }
    }
}

/// Orbit through `(x_in, y_in)`.
pub fn riccati_from_initial(x_in: f64, y_in: f64) -> Result<RiccatiSolution> {
    if !(x_in.is_finite() && y_in.is_finite()) {
        return Err(Error::domain("initial point must be finite"));
    }
    let q = airy_eval(-y_in)?;
    // K = (Ai' − x Ai)/(x Bi − Bi'), kept as the pair (α, β) = (x Bi − Bi', Ai' − x Ai).
    let alpha = x_in * q.bi - q.dbi;
    let beta = q.dai - x_in * q.ai;
    if !(alpha.is_finite() && beta.is_finite()) || (alpha == 0.0 && beta == 0.0) {
        return Err(Error::domain(format!("cannot represent the orbit through ({x_in}, {y_in})")));
    }
    Ok(RiccatiSolution::from_coefficients(y_in, alpha, beta))
}

/// `x_det(t)` for a fitted orbit.
pub fn x_det(sol: &RiccatiSolution, t: f64) -> Result<f64> {
    sol.x_det(t)
}

/// Fast variable of the slow solution at `y`: `Ai'(-y)/Ai(-y)`.
pub fn slow_x(y: f64) -> Result<f64> {
    if y >= ystar() {
        return Err(Error::domain(format!("slow solution is only defined for y < y*, got {y}")));
    }
    let q = airy_eval(-y)?;
    if q.ai < 1e-290 {
        return Err(Error::domain(format!("slow solution unresolvable in binary64 at y = {y}")));
    }
    Ok(q.dai / q.ai)
}

fn check_admissible(x_in: f64, y_in: f64) -> Result<()> {
    if x_in * x_in + y_in <= 0.0 {
        return Err(Error::domain(format!(
            "initial point ({x_in}, {y_in}) must satisfy x² + y > 0"
        )));
    }
    Ok(())
}

/// Deterministic time for the orbit through `(x_in, y_in)` to reach `x = x_fin`.
pub fn travel_time(x_in: f64, y_in: f64, x_fin: f64) -> Result<f64> {
    check_admissible(x_in, y_in)?;
    if x_fin == x_in {
        return Ok(0.0);
    }
    if x_fin < x_in {
        return Err(Error::domain(format!("x_fin = {x_fin} is not ahead of x_in = {x_in}")));
    }
    let sol = riccati_from_initial(x_in, y_in)?;
    Ok(sol.y_at_x(x_fin)? - y_in)
}

/// Travel time and its `y_in` derivatives on the slow solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TravelTimeDerivatives {
    #[serde(rename = "T")]
    pub t: f64,
    pub dt_dy: f64,
    pub d2t_dy2: f64,
    /// `A = r_fin − c_in/Ai(-y_fin)²`
    #[serde(rename = "A")]
    pub a: f64,
    /// `B`, the second variational coefficient
    #[serde(rename = "B")]
    pub b: f64,
    pub c_in: f64,
    pub r_fin: f64,
    pub x_in: f64,
    pub y_in: f64,
    pub x_fin: f64,
    pub y_fin: f64,
}

/// Everything about the final section needed to evaluate derivatives at
/// many initial points of the same slow orbit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FinalSection {
    pub x_fin: f64,
    pub y_fin: f64,
    pub r_fin: f64,
    /// `Ai(-y_fin)²`
    pub ai2: f64,
    /// `Bi(-y_fin)/Ai(-y_fin)`
    pub ratio: f64,
}

impl FinalSection {
    pub fn on_slow_solution(y_ref: f64, x_fin: f64) -> Result<Self> {
        let y_fin = RiccatiSolution::slow(y_ref).y_at_x(x_fin)?;
        let q = airy_eval(-y_fin)?;
        Ok(FinalSection {
            x_fin,
            y_fin,
            r_fin: x_fin * x_fin + y_fin,
            ai2: q.ai * q.ai,
            ratio: q.bi / q.ai,
        })
    }

    /// Derivatives with the initial point moved to `(x_slow(y), y)`.
    pub fn derivatives_at(&self, y: f64) -> Result<TravelTimeDerivatives> {
        let q = airy_eval(-y)?;
        if q.ai < 1e-290 {
            return Err(Error::domain(format!("slow solution unresolvable in binary64 at y = {y}")));
        }
        let x_in = q.dai / q.ai;
        let ai_in2 = q.ai * q.ai;
        let c = y * ai_in2 + q.dai * q.dai;
        let (x, r, a) = (self.x_fin, self.r_fin, self.ai2);
        let ar = a * r;
        let delta_ratio = q.bi / q.ai - self.ratio;

        // c²·(Bi/Ai difference), guarded against 0·∞ once Ai(-y) underflows.
        let c2_delta = if c == 0.0 { 0.0 } else { c * (c * delta_ratio) };
        let big_a = r - c / a;
        let big_b = 2.0 * r * x + 1.0
            + 2.0 / a * (-c * (2.0 * x - x_in) - 0.5 * ai_in2 + PI * c2_delta);

        // 1 + ∂_yT = c/(a r) and the grouped form of ∂_yyT, in which the
        // O(x_fin c/a) pieces of the A² and B terms cancel analytically.
        let kappa = c / ar;
        let r_in = x_in * x_in + y;
        let c2_terms = if c == 0.0 {
            0.0
        } else {
            c * c * (2.0 * x / ar - 1.0 / (ar * r)) - 2.0 * PI * c2_delta
        };
        let d2 = (ai_in2 * (1.0 - 2.0 * x_in * r_in) + c2_terms) / ar;

        Ok(TravelTimeDerivatives {
            t: self.y_fin - y,
            dt_dy: kappa - 1.0,
            d2t_dy2: d2,
            a: big_a,
            b: big_b,
            c_in: c,
            r_fin: r,
            x_in,
            y_in: y,
            x_fin: x,
            y_fin: self.y_fin,
        })
    }
}

/// `T`, `∂_yT`, `∂_yyT` for the initial point `(Ai'(-y_in)/Ai(-y_in), y_in)`.
pub fn travel_time_derivatives(y_in: f64, x_fin: f64) -> Result<TravelTimeDerivatives> {
    if !(y_in < ystar()) {
        return Err(Error::domain(format!("y_in = {y_in} must be below y* = {}", ystar())));
    }
    let x_in = slow_x(y_in)?;
    if !(x_fin >= x_in) {
        return Err(Error::domain(format!("x_fin = {x_fin} is not ahead of x_in = {x_in}")));
    }
    FinalSection::on_slow_solution(y_in, x_fin)?.derivatives_at(y_in)
}

/// `(∂_yT, ∂_yyT)` in the limit `x_fin → ∞`, on the slow solution.
pub fn travel_time_derivative_limits(y_in: f64) -> Result<(f64, f64)> {
    if !(y_in < ystar()) {
        return Err(Error::domain(format!("y_in = {y_in} must be below y* = {}", ystar())));
    }
    let q = airy_eval(-y_in)?;
    let s = airy_eval(-ystar())?;
    let dai2 = s.dai * s.dai;
    let c = y_in * q.ai * q.ai + q.dai * q.dai;
    let bracket = -y_in * q.ai * q.bi - q.dai * q.dbi;
    let d1 = c / dai2 - 1.0;
    let d2 = 2.0 / dai2 * (PI * c * bracket + PI * c * c * s.dbi / s.dai + 0.5 * q.ai * q.ai);
    Ok((d1, d2))
}

/// Direction of [`rescale`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleDirection {
    /// Scaled `(x, y)` to the original `(x̄, ȳ)`.
    ToOriginal,
    /// Original `(x̄, ȳ)` to scaled `(x, y)`.
    ToScaled,
}

/// Map between scaled and original variables: `x̄ = ε^{1/3} x`, `ȳ = ε^{2/3} y`.
pub fn rescale(point: FlowPoint, eps: f64, direction: ScaleDirection) -> Result<FlowPoint> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let fx = eps.cbrt();
    let fy = fx * fx;
    Ok(match direction {
        ScaleDirection::ToOriginal => FlowPoint { x: point.x * fx, y: point.y * fy },
        ScaleDirection::ToScaled => FlowPoint { x: point.x / fx, y: point.y / fy },
    })
}

/// Scaled noise intensity `σ = σ̄ / ε^{1/3}` for original intensity `σ̄`.
pub fn scaled_sigma(sigma_bar: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    Ok(sigma_bar / eps.cbrt())
}

/// Sample `(t, x, y)` along the orbit through `(x_in, y_in)` every `step`
/// until it crosses `x_fin`; the last row is the crossing itself.
pub fn trajectory(x_in: f64, y_in: f64, x_fin: f64, step: f64) -> Result<Vec<(f64, f64, f64)>> {
    if !(step > 0.0) {
        return Err(Error::domain("step must be positive"));
    }
    let t_end = travel_time(x_in, y_in, x_fin)?;
    let sol = riccati_from_initial(x_in, y_in)?;
    let n = (t_end / step).floor() as usize;
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..=n {
        let t = i as f64 * step;
        if t >= t_end {
            break;
        }
        // Both ends are pinned to the exact input values.
        let x = if i == 0 { x_in } else { sol.x_det(t)? };
        out.push((t, x, y_in + t));
    }
    out.push((t_end, x_fin, y_in + t_end));
    Ok(out)
}
