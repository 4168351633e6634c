//! Airy functions Ai, Bi and their derivatives on the real line.
//!
//! Inside `|z| ≤ 9` values come from a table of anchors spaced 0.5 apart:
//! anchors on `[-3, 2]` are summed directly from the Maclaurin series, the
//! others are reached by stepping the ODE `w'' = z w` with its Taylor
//! recurrence, always in the direction where the stepped solution is
//! dominant. A query then takes one Taylor step of length ≤ 0.25 from the
//! nearest anchor. Outside that band the asymptotic expansions are summed
//! up to their smallest term (ζ ≥ 18 there, so truncation error is ≈ e^{-2ζ}).

use std::f64::consts::{FRAC_1_PI, FRAC_PI_4};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots;

/// Ai(0) = 1/(3^{2/3} Γ(2/3)).
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// -Ai'(0) = 1/(3^{1/3} Γ(1/3)).
pub const MINUS_DAI0: f64 = 0.258_819_403_792_806_8;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_PI: f64 = 1.772_453_850_905_516;

const TABLE_MIN: f64 = -9.0;
const TABLE_MAX: f64 = 9.0;
const TABLE_STEP: f64 = 0.5;
const TABLE_LEN: usize = 37;
const MACLAURIN_MIN: f64 = -3.0;
const MACLAURIN_MAX: f64 = 2.0;

/// Largest accepted |z|.
pub const Z_LIMIT: f64 = 200.0;

/// Ai, Bi and their first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryQuartet {
    pub z: f64,
    pub ai: f64,
    pub bi: f64,
    pub dai: f64,
    pub dbi: f64,
}

impl AiryQuartet {
    /// `Ai·Bi' − Ai'·Bi`, which equals 1/π exactly.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.dbi - self.dai * self.bi
    }
}

/// `f`, `𝓕`, `𝓖` and `g` composed from a single quartet.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarFunctionTable {
    pub z: f64,
    /// `f(z) = Ai'² − z Ai²`
    pub f_val: f64,
    /// `𝓕(z)`, a primitive of `f²`
    #[serde(rename = "F_val")]
    pub F_val: f64,
    /// `𝓖(z)`, a primitive of `f g`
    #[serde(rename = "G_val")]
    pub G_val: f64,
    /// `g(z) = Ai' Bi' − z Ai Bi`
    pub g_val: f64,
}

/// Value/derivative pair of one solution of `w'' = z w`.
#[derive(Clone, Copy, Debug)]
struct Pair {
    w: f64,
    dw: f64,
}

#[derive(Clone, Copy, Debug)]
struct Anchor {
    ai: Pair,
    bi: Pair,
}

/// One Taylor step of `w'' = z w` from `z0` by `h`.
///
/// The coefficients obey `c_n = (z0 c_{n-2} + c_{n-3}) / (n (n-1))`.
fn taylor_step(z0: f64, p: Pair, h: f64) -> Pair {
    let (mut c3, mut c2, mut c1) = (0.0, p.w, p.dw); // c_{n-3}, c_{n-2}, c_{n-1}
    let mut w = p.w + p.dw * h;
    let mut dw = p.dw;
    let mut hp = h; // h^{n-1}
    let mut small = 0;
    for n in 2..120 {
        let nf = n as f64;
        let c = (z0 * c2 + c3) / (nf * (nf - 1.0));
        let dterm = nf * c * hp;
        hp *= h;
        let term = c * hp;
        w += term;
        dw += dterm;
        if term.abs() <= 1e-18 * w.abs() && dterm.abs() <= 1e-18 * dw.abs() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        c3 = c2;
        c2 = c1;
        c1 = c;
    }
    Pair { w, dw }
}

/// The two Maclaurin series `f = Σ a_k z^{3k}`, `g = Σ b_k z^{3k+1}` and their
/// derivatives; Ai and Bi are fixed linear combinations of them.
fn maclaurin(z: f64) -> Anchor {
    let z3 = z * z * z;
    let (mut f, mut df, mut g, mut dg) = (1.0, 0.0, z, 1.0);
    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut zp = 1.0; // z^{3k}
    for k in 1..60 {
        let kf = k as f64;
        a /= (3.0 * kf - 1.0) * (3.0 * kf);
        b /= (3.0 * kf) * (3.0 * kf + 1.0);
        let dprev = zp * z * z; // z^{3k-1}
        zp *= z3;
        let tf = a * zp;
        let tg = b * zp * z;
        f += tf;
        g += tg;
        df += a * 3.0 * kf * dprev;
        dg += b * (3.0 * kf + 1.0) * zp;
        if tf.abs() < 1e-18 * f.abs().max(1e-300) && tg.abs() < 1e-18 * g.abs().max(1e-300) && k > 2
        {
            break;
        }
    }
    Anchor {
        ai: Pair { w: AI0 * f - MINUS_DAI0 * g, dw: AI0 * df - MINUS_DAI0 * dg },
        bi: Pair {
            w: SQRT_3 * (AI0 * f + MINUS_DAI0 * g),
            dw: SQRT_3 * (AI0 * df + MINUS_DAI0 * dg),
        },
    }
}

fn anchor_z(i: usize) -> f64 {
    TABLE_MIN + TABLE_STEP * i as f64
}

fn anchors() -> &'static [Anchor; TABLE_LEN] {
    static TABLE: OnceLock<[Anchor; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let zero = Pair { w: 0.0, dw: 0.0 };
        let mut t = [Anchor { ai: zero, bi: zero }; TABLE_LEN];
        let lo = ((MACLAURIN_MIN - TABLE_MIN) / TABLE_STEP) as usize;
        let hi = ((MACLAURIN_MAX - TABLE_MIN) / TABLE_STEP) as usize;
        for (i, slot) in t.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *slot = maclaurin(anchor_z(i));
        }
        // Oscillatory side: both solutions are stepped leftwards.
        for i in (0..lo).rev() {
            let z0 = anchor_z(i + 1);
            t[i].ai = taylor_step(z0, t[i + 1].ai, -TABLE_STEP);
            t[i].bi = taylor_step(z0, t[i + 1].bi, -TABLE_STEP);
        }
        // Bi grows to the right, Ai grows to the left.
        for i in hi + 1..TABLE_LEN {
            let z0 = anchor_z(i - 1);
            t[i].bi = taylor_step(z0, t[i - 1].bi, TABLE_STEP);
        }
        let top = asymptotic(TABLE_MAX);
        t[TABLE_LEN - 1].ai = Pair { w: top.ai, dw: top.dai };
        for i in (hi + 1..TABLE_LEN - 1).rev() {
            let z0 = anchor_z(i + 1);
            t[i].ai = taylor_step(z0, t[i + 1].ai, -TABLE_STEP);
        }
        t
    })
}

/// Parity-split sums for the oscillatory side, stopped at the smallest term:
/// `[Σ(-1)^k u_{2k} ζ^{-2k}, Σ(-1)^k u_{2k+1} ζ^{-2k-1}]` and the same for v.
fn oscillatory_sums(zeta: f64) -> [f64; 4] {
    let mut sums = [1.0, 0.0, 1.0, 0.0];
    let mut u = 1.0f64;
    let mut zp = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zp /= zeta;
        let tu = u * zp;
        let tv = v * zp;
        let mag = tu.abs().max(tv.abs());
        if mag > last || mag < 1e-17 {
            break;
        }
        last = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let parity = k % 2;
        sums[parity] += sign * tu;
        sums[2 + parity] += sign * tv;
    }
    sums
}

/// Asymptotic expansions for `|z| ≥ 9`.
fn asymptotic(z: f64) -> AiryQuartet {
    let x = z.abs();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let q = x.sqrt().sqrt();
    if z > 0.0 {
        let (su_alt, sv_alt, su, sv) = plain_sums(zeta);
        let em = (-zeta).exp();
        let ep = zeta.exp();
        AiryQuartet {
            z,
            ai: em / (2.0 * SQRT_PI * q) * su_alt,
            dai: -q * em / (2.0 * SQRT_PI) * sv_alt,
            bi: ep / (SQRT_PI * q) * su,
            dbi: q * ep / SQRT_PI * sv,
        }
    } else {
        let [ue, uo, ve, vo] = oscillatory_sums(zeta);
        let phase = zeta - FRAC_PI_4;
        let (s, c) = phase.sin_cos();
        AiryQuartet {
            z,
            ai: (c * ue + s * uo) / (SQRT_PI * q),
            bi: (-s * ue + c * uo) / (SQRT_PI * q),
            dai: q * (s * ve - c * vo) / SQRT_PI,
            dbi: q * (c * ve + s * vo) / SQRT_PI,
        }
    }
}

/// `(Σ(-1)^k u_k ζ^{-k}, Σ(-1)^k v_k ζ^{-k}, Σ u_k ζ^{-k}, Σ v_k ζ^{-k})`.
fn plain_sums(zeta: f64) -> (f64, f64, f64, f64) {
    let (mut ua, mut va, mut u_s, mut v_s) = (1.0, 1.0, 1.0, 1.0);
    let mut u = 1.0f64;
    let mut zp = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zp /= zeta;
        let (tu, tv) = (u * zp, v * zp);
        let mag = tu.abs().max(tv.abs());
        if mag > last || mag < 1e-17 {
            break;
        }
        last = mag;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        ua += sign * tu;
        va += sign * tv;
        u_s += tu;
        v_s += tv;
    }
    (ua, va, u_s, v_s)
}

/// Ai, Bi, Ai', Bi' at `z`.
///
/// Accurate to about 1e-14 relative (1e-15 absolute near zeros) for
/// `|z| ≤ 15`. Ai underflows to 0 for large positive `z`; Bi overflows to
/// `+∞` beyond `z ≈ 104`.
pub fn airy_eval(z: f64) -> Result<AiryQuartet> {
    if !z.is_finite() {
        return Err(Error::domain(format!("Airy argument must be finite, got {z}")));
    }
    if z.abs() > Z_LIMIT {
        return Err(Error::domain(format!("Airy argument |{z}| exceeds {Z_LIMIT}")));
    }
    Ok(airy_unchecked(z))
}

pub(crate) fn airy_unchecked(z: f64) -> AiryQuartet {
    if !(TABLE_MIN..=TABLE_MAX).contains(&z) {
        return asymptotic(z);
    }
    let i = ((z - TABLE_MIN) / TABLE_STEP).round() as usize;
    let z0 = anchor_z(i);
    let h = z - z0;
    let a = &anchors()[i];
    if h == 0.0 {
        return AiryQuartet { z, ai: a.ai.w, dai: a.ai.dw, bi: a.bi.w, dbi: a.bi.dw };
    }
    let ai = taylor_step(z0, a.ai, h);
    let bi = taylor_step(z0, a.bi, h);
    AiryQuartet { z, ai: ai.w, dai: ai.dw, bi: bi.w, dbi: bi.dw }
}

/// `y* > 0`, the negative of the largest zero of Ai.
pub fn ystar() -> f64 {
    static YSTAR: OnceLock<f64> = OnceLock::new();
    *YSTAR.get_or_init(|| {
        let ai = |y: f64| airy_unchecked(-y).ai;
        let y = roots::bisect(ai, 2.0, 3.0, 1e-13, 200).expect("Ai changes sign on [2, 3]");
        let q = airy_unchecked(-y);
        // d/dy Ai(-y) = -Ai'(-y)
        y + q.ai / q.dai
    })
}

/// `Ai'(-y*)`.
pub fn dai_at_ystar() -> f64 {
    airy_unchecked(-ystar()).dai
}

/// `Bi'(-y*)`.
pub fn dbi_at_ystar() -> f64 {
    airy_unchecked(-ystar()).dbi
}

/// `Bi'(-y*) / Ai'(-y*)`.
pub fn kappa_star() -> f64 {
    dbi_at_ystar() / dai_at_ystar()
}

/// `f(z) = Ai'(z)² − z Ai(z)²`.
pub fn f_of(q: &AiryQuartet) -> f64 {
    q.dai * q.dai - q.z * q.ai * q.ai
}

/// `g(z) = Ai'(z) Bi'(z) − z Ai(z) Bi(z)`.
pub fn g_of(q: &AiryQuartet) -> f64 {
    q.dai * q.dbi - q.z * q.ai * q.bi
}

/// `𝓕(z)`.
#[allow(non_snake_case)]
pub fn F_of(q: &AiryQuartet) -> f64 {
    let (z, a, d) = (q.z, q.ai, q.dai);
    let (a2, d2) = (a * a, d * d);
    (z * z * z / 2.0 + 0.125) * a2 * a2 - z / 2.0 * a2 * a * d - z * z * a2 * d2
        + 0.5 * a * d2 * d
        + z / 2.0 * d2 * d2
}

/// `𝓖(z)`.
#[allow(non_snake_case)]
pub fn G_of(q: &AiryQuartet) -> f64 {
    let (z, a, d) = (q.z, q.ai, q.dai);
    let (a2, d2) = (a * a, d * d);
    let p = (z * z * z / 2.0 + 0.125) * a2 * a - 3.0 * z / 8.0 * a2 * d - z * z / 2.0 * a * d2
        + 0.125 * d2 * d;
    let r = -z / 8.0 * a2 * a - z * z / 2.0 * a2 * d + 0.375 * a * d2 + z / 2.0 * d2 * d;
    p * q.bi + r * q.dbi
}

/// `f`, `𝓕`, `𝓖`, `g` at `z`, all from one Airy evaluation.
pub fn scalar_functions(z: f64) -> Result<ScalarFunctionTable> {
    let q = airy_eval(z)?;
    Ok(scalar_functions_from(&q))
}

pub fn scalar_functions_from(q: &AiryQuartet) -> ScalarFunctionTable {
    ScalarFunctionTable { z: q.z, f_val: f_of(q), F_val: F_of(q), G_val: G_of(q), g_val: g_of(q) }
}

/// Exact Wronskian value.
pub const WRONSKIAN: f64 = FRAC_1_PI;
