//! Counter-based normal variates.
//!
//! Every path owns a key derived from `(seed, path_index)`; the `j`-th pair of
//! normals is a pure function of `(key, j)`, so results never depend on how
//! paths are scheduled. Uniforms are turned into normals by Box–Muller with
//! table/polynomial `ln` and polynomial `sincos` built only from correctly
//! rounded operations (including FMA and `sqrt`), which keeps scalar and
//! vectorised builds bit-identical.

use std::f64::consts::{FRAC_PI_2, LN_2, SQRT_2};
use std::sync::OnceLock;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream key of one path.
#[inline]
pub fn path_key(seed: u64, path_index: u64) -> u64 {
    mix64(seed ^ mix64(path_index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Raw 64-bit word number `counter` of stream `key`.
#[inline(always)]
pub fn stream_word(key: u64, counter: u64) -> u64 {
    mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform on `(0, 1]`.
#[inline(always)]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform on `[0, 1)`.
#[inline(always)]
pub fn half_open_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Natural logarithm by the `atanh` series; used to build the tables of
/// [`ln_unit`] and as its reference in tests.
pub fn ln_series(u: f64) -> f64 {
    let bits = u.to_bits();
    let e = ((bits >> 52) & 0x7FF) as i64 - 1023;
    let m = f64::from_bits((bits & MANTISSA) | ONE_BITS);
    let big = m > SQRT_2;
    let m = if big { m * 0.5 } else { m };
    let e = (e + big as i64) as f64;
    // ln m = 2 atanh(s), |s| ≤ 0.1716
    let s = (m - 1.0) / (m + 1.0);
    let s2 = s * s;
    let mut p: f64 = 1.0 / 21.0;
    for c in [1.0 / 19.0, 1.0 / 17.0, 1.0 / 15.0, 1.0 / 13.0, 1.0 / 11.0, 1.0 / 9.0, 1.0 / 7.0, 1.0 / 5.0, 1.0 / 3.0] {
        p = p.mul_add(s2, c);
    }
    e.mul_add(LN2_HI, e.mul_add(LN2_LO, 2.0 * s * s2.mul_add(p, 1.0)))
}

const MANTISSA: u64 = 0x000F_FFFF_FFFF_FFFF;
const ONE_BITS: u64 = 0x3FF0_0000_0000_0000;
const LN2_HI: f64 = 0.693_147_180_369_123_8; // 32 significant bits
const LN2_LO: f64 = LN_2 - LN2_HI;
const TABLE_BITS: u32 = 7;
const TABLE_LEN: usize = 1 << TABLE_BITS;

/// `c_i ≈ 1/(1 + i/128)` and `−ln c_i` for the table-driven logarithm.
pub struct LnTable {
    inv: [f64; TABLE_LEN],
    neg_ln_inv: [f64; TABLE_LEN],
}

pub fn ln_table() -> &'static LnTable {
    static T: OnceLock<LnTable> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = LnTable { inv: [0.0; TABLE_LEN], neg_ln_inv: [0.0; TABLE_LEN] };
        for i in 0..TABLE_LEN {
            let c = 1.0 / (1.0 + i as f64 / TABLE_LEN as f64);
            t.inv[i] = c;
            t.neg_ln_inv[i] = -ln_series(c);
        }
        t
    })
}

/// Natural logarithm of `u ∈ [2^-53, 1]` from a 128-entry table and a short
/// `log1p` polynomial on `[0, 2^-7)`; no division.
#[inline(always)]
pub fn ln_unit(t: &LnTable, u: f64) -> f64 {
    let bits = u.to_bits();
    let e = (((bits >> 52) & 0x7FF) as i64 - 1023) as f64;
    let m = f64::from_bits((bits & MANTISSA) | ONE_BITS);
    let i = ((bits >> (52 - TABLE_BITS)) as usize) & (TABLE_LEN - 1);
    let r = m.mul_add(t.inv[i], -1.0);
    let mut p: f64 = -1.0 / 8.0;
    for c in [1.0 / 7.0, -1.0 / 6.0, 1.0 / 5.0, -1.0 / 4.0, 1.0 / 3.0, -0.5] {
        p = p.mul_add(r, c);
    }
    let log1p = (r * r).mul_add(p, r);
    e.mul_add(LN2_HI, e.mul_add(LN2_LO, t.neg_ln_inv[i]) + log1p)
}

/// `(sin 2πu, cos 2πu)` for `u ∈ [0, 1)` on the 2^-53 grid.
#[inline(always)]
pub fn sincos_turn(u: f64) -> (f64, f64) {
    let v = u * 4.0;
    let k = (v + 0.5).floor();
    let x = (v - k) * FRAC_PI_2;
    let x2 = x * x;
    // Taylor polynomials on |x| ≤ π/4
    let mut s: f64 = -1.0 / 1_307_674_368_000.0; // -1/15!
    for c in [
        1.0 / 6_227_020_800.0,
        -1.0 / 39_916_800.0,
        1.0 / 362_880.0,
        -1.0 / 5040.0,
        1.0 / 120.0,
        -1.0 / 6.0,
    ] {
        s = s.mul_add(x2, c);
    }
    let s = (x * x2).mul_add(s, x);
    let mut c: f64 = 1.0 / 20_922_789_888_000.0; // 1/16!
    for k in [
        -1.0 / 87_178_291_200.0,
        1.0 / 479_001_600.0,
        -1.0 / 3_628_800.0,
        1.0 / 40_320.0,
        -1.0 / 720.0,
        1.0 / 24.0,
        -0.5,
    ] {
        c = c.mul_add(x2, k);
    }
    let c = x2.mul_add(c, 1.0);
    let swap = k == 1.0 || k == 3.0;
    let sin_neg = k == 2.0 || k == 3.0;
    let cos_neg = k == 1.0 || k == 2.0;
    let (a, b) = if swap { (c, s) } else { (s, c) };
    (if sin_neg { -a } else { a }, if cos_neg { -b } else { b })
}

/// Box–Muller pair from two raw words.
#[inline(always)]
pub fn box_muller(t: &LnTable, b1: u64, b2: u64) -> (f64, f64) {
    let r = (-2.0 * ln_unit(t, open_unit(b1))).max(0.0).sqrt();
    let (s, c) = sincos_turn(half_open_unit(b2));
    (r * c, r * s)
}

/// Normal pair number `j` of stream `key`.
#[inline]
pub fn normal_pair(key: u64, j: u64) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("fma") {
        // SAFETY: the required feature was detected at run time.
        return unsafe { normal_pair_fma(key, j) };
    }
    box_muller(ln_table(), stream_word(key, 2 * j), stream_word(key, 2 * j + 1))
}

// Same arithmetic with hardware FMA instead of the libm fallback.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "fma")]
unsafe fn normal_pair_fma(key: u64, j: u64) -> (f64, f64) {
    box_muller(ln_table(), stream_word(key, 2 * j), stream_word(key, 2 * j + 1))
}

/// Sequential reader over one path's normals: step `2j` uses the cosine
/// branch of pair `j`, step `2j + 1` the sine branch.
#[derive(Debug, Clone)]
pub struct NormalStream {
    key: u64,
    next: u64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        NormalStream { key: path_key(seed, path_index), next: 0, spare: None }
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (a, b) = normal_pair(self.key, self.next);
        self.next += 1;
        self.spare = Some(b);
        a
    }
}

/// Normals of pairs `j0..j0 + out.len()/2` for `L` streams at once, laid out
/// `[step][lane]` with the cosine branch first.
#[inline(always)]
pub fn fill_lanes<const L: usize>(t: &LnTable, keys: &[u64; L], j0: u64, out: &mut [[f64; L]]) {
    for (j, pair) in out.chunks_exact_mut(2).enumerate() {
        let c = 2 * (j0 + j as u64);
        for l in 0..L {
            let (a, b) = box_muller(t, stream_word(keys[l], c), stream_word(keys[l], c + 1));
            pair[0][l] = a;
            pair[1][l] = b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stream_is_reproducible() {
        let mut a = NormalStream::new(7, 42);
        let mut b = NormalStream::new(7, 42);
        for _ in 0..100 {
            assert_eq!(a.next_normal().to_bits(), b.next_normal().to_bits());
        }
        let mut c = NormalStream::new(7, 43);
        assert_ne!(NormalStream::new(7, 42).next_normal(), c.next_normal());
    }

    #[test]
    fn normal_moments() {
        let mut s = NormalStream::new(1, 0);
        let n = 400_000;
        let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = s.next_normal();
            m1 += z;
            m2 += z * z;
            m4 += z.powi(4);
        }
        let nf = n as f64;
        assert!((m1 / nf).abs() < 5.0 / nf.sqrt());
        assert!((m2 / nf - 1.0).abs() < 5.0 * (2.0 / nf).sqrt());
        assert!((m4 / nf - 3.0).abs() < 5.0 * (96.0 / nf).sqrt());
    }

    #[test]
    fn pair_matches_portable_arithmetic() {
        let t = ln_table();
        for j in 0..10_000 {
            let key = path_key(3, j);
            let want = box_muller(t, stream_word(key, 2 * j), stream_word(key, 2 * j + 1));
            let got = normal_pair(key, j);
            assert_eq!((got.0.to_bits(), got.1.to_bits()), (want.0.to_bits(), want.1.to_bits()));
        }
    }

    #[test]
    fn unit_ranges() {
        assert_eq!(open_unit(0), 1.0 / 9_007_199_254_740_992.0);
        assert_eq!(open_unit(u64::MAX), 1.0);
        assert_eq!(half_open_unit(0), 0.0);
        assert!(half_open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn ln_extremes() {
        let t = ln_table();
        let tiny = 1.0 / 9_007_199_254_740_992.0;
        assert!((ln_unit(t, tiny) + 53.0 * LN_2).abs() < 1e-13);
        assert_eq!(ln_unit(t, 1.0), 0.0);
        assert!((ln_series(tiny) + 53.0 * LN_2).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn ln_matches_std(bits in any::<u64>()) {
            let u = open_unit(bits);
            let want = u.ln();
            prop_assert!((ln_series(u) - want).abs() <= 4e-16 * want.abs());
            // The table form loses relative accuracy only through the
            // absolute 1e-16 floor just below u = 1.
            prop_assert!((ln_unit(ln_table(), u) - want).abs() <= 4e-16 * want.abs() + 2e-16);
        }

        #[test]
        fn sincos_matches_std(bits in any::<u64>()) {
            let u = half_open_unit(bits);
            let (s, c) = sincos_turn(u);
            let t = 2.0 * std::f64::consts::PI * u;
            prop_assert!((s - t.sin()).abs() < 2e-15);
            prop_assert!((c - t.cos()).abs() < 2e-15);
        }
    }
}

