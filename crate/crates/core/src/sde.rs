//! Euler–Maruyama Monte Carlo of the exit height.
//!
//! ```text
//! x ← x + (y + x²) dt
//! y ← y + dt + σ √dt N(0, 1)
//! ```
//!
//! Paths are advanced 32 at a time in lock-step (structure of arrays) so
//! the step vectorises; the normals of each path come from its own
//! counter-based stream, hence every path is bitwise independent of batching,
//! of the thread count and of the instruction set in use. One path can record
//! its first crossing of several sections `x = x_fin`, sorted increasingly.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::ystar;
use crate::dv::dv_integral;
use crate::error::{Error, Result};
use crate::flow::travel_time;
use crate::rng::{fill_lanes, ln_table, path_key, LnTable, NormalStream};
use crate::stats::{moments, Moments};

/// One Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub x_in: f64,
    pub y_in: f64,
    pub x_fin: f64,
    pub sigma: f64,
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
    /// Safety horizon; `None` means `L + 10σ√L` with `L = (y* − y_in) + 5`.
    pub t_max: Option<f64>,
    /// Half-width of the censoring tube around `y_in + t`; `None` disables it.
    pub tube_h0: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            x_in: -5.0,
            y_in: -24.9,
            x_fin: 30.0,
            sigma: 0.25,
            dt: 1e-4,
            n_paths: 100_000,
            seed: 1,
            t_max: None,
            tube_h0: None,
        }
    }
}

impl FlowConfig {
    pub fn effective_t_max(&self) -> f64 {
        // Exit-time fluctuations grow like σ√t, so the slack does too.
        let l = (ystar() - self.y_in) + 5.0;
        self.t_max.unwrap_or(l + 10.0 * self.sigma * l.sqrt())
    }

    /// Check the invariants of the experiment for the given sections.
    pub fn validate_for(&self, sections: &[f64]) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.x_in.is_finite() && self.y_in.is_finite()) {
            return bad("initial point must be finite".into());
        }
        if self.x_in * self.x_in + self.y_in <= 0.0 {
            return bad(format!("x_in² + y_in must be positive, got {}", self.x_in * self.x_in + self.y_in));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and ≥ 0, got {}", self.sigma));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be positive".into());
        }
        if let Some(h) = self.tube_h0 {
            if !(h > 0.0) {
                return bad(format!("tube_h0 must be positive, got {h}"));
            }
        }
        let t_max = self.effective_t_max();
        for &xf in sections {
            if !(xf > self.x_in) || !xf.is_finite() {
                return bad(format!("x_fin = {xf} must exceed x_in = {}", self.x_in));
            }
            let t = travel_time(self.x_in, self.y_in, xf)?;
            let need = t + 10.0 * self.sigma.max(self.dt.sqrt());
            if t_max < need {
                return bad(format!("t_max = {t_max} is below travel time + slack = {need}"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_for(&[self.x_fin])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitStatus {
    Hit,
    TimedOut,
    TubeExit,
}

/// First passage of one path through one section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub tau: f64,
    pub y_tau: f64,
    pub status: HitStatus,
}

impl HitRecord {
    const EMPTY: HitRecord = HitRecord { tau: f64::NAN, y_tau: f64::NAN, status: HitStatus::TimedOut };
}

/// Instruction set used by the lane kernel. All choices give identical bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Auto,
    Portable,
}

#[derive(Debug, Clone, Copy)]
struct KernelParams {
    x_in: f64,
    y_in: f64,
    dt: f64,
    noise: f64,
    max_steps: u64,
    tube_h0: f64,
    seed: u64,
}

impl KernelParams {
    fn new(cfg: &FlowConfig) -> Self {
        let t_max = cfg.effective_t_max();
        KernelParams {
            x_in: cfg.x_in,
            y_in: cfg.y_in,
            dt: cfg.dt,
            noise: cfg.sigma * cfg.dt.sqrt(),
            max_steps: (t_max / cfg.dt).ceil() as u64,
            tube_h0: cfg.tube_h0.unwrap_or(f64::INFINITY),
            seed: cfg.seed,
        }
    }
}

const LANES: usize = 32;
const CHUNK_PAIRS: usize = 64;
const PATHS_PER_TASK: usize = 64;

/// Linear interpolation of the crossing inside step `step` (from `t = step·dt`).
#[inline(always)]
fn crossing(step: u64, dt: f64, thr: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> HitRecord {
    let theta = (thr - x0) / (x1 - x0);
    HitRecord { tau: (step as f64 + theta) * dt, y_tau: y0 + theta * (y1 - y0), status: HitStatus::Hit }
}

/// Scalar reference implementation for one path and one section.
pub fn simulate_path(cfg: &FlowConfig, path_index: u64) -> HitRecord {
    let p = KernelParams::new(cfg);
    let mut z = NormalStream::new(cfg.seed, path_index);
    let (mut x, mut y) = (p.x_in, p.y_in);
    for step in 0..p.max_steps {
        let xn = x + (y + x * x) * p.dt;
        let yn = y + p.dt + p.noise * z.next_normal();
        if xn >= cfg.x_fin {
            return crossing(step, p.dt, cfg.x_fin, x, xn, y, yn);
        }
        let t = (step + 1) as f64 * p.dt;
        if (yn - (p.y_in + t)).abs() > p.tube_h0 {
            return HitRecord { tau: t, y_tau: yn, status: HitStatus::TubeExit };
        }
        x = xn;
        y = yn;
    }
    HitRecord { tau: p.max_steps as f64 * p.dt, y_tau: y, status: HitStatus::TimedOut }
}

/// Up to `LANES` paths starting at `first`, all sections; `out` is `[path][section]`.
#[inline(always)]
fn block_body<const TUBE: bool, G>(gen: G, p: &KernelParams, sections: &[f64], first: u64, active: usize, out: &mut [HitRecord])
where
    G: Fn(&LnTable, &[u64; LANES], u64, &mut [[f64; LANES]]),
{
    let ns = sections.len();
    let mut key = [0u64; LANES];
    let mut x = [p.x_in; LANES];
    let mut y = [p.y_in; LANES];
    let mut next = [0usize; LANES];
    // NaN thresholds never compare true, which retires a lane.
    let mut thr = [f64::NAN; LANES];
    let mut live = 0usize;
    for l in 0..LANES {
        key[l] = path_key(p.seed, first + l as u64);
        if l < active && ns > 0 {
            thr[l] = sections[0];
            live += 1;
        }
    }
    let table = ln_table();
    let mut buf = vec![[0.0f64; LANES]; 2 * CHUNK_PAIRS];
    let mut step = 0u64;
    while live > 0 && step < p.max_steps {
        gen(table, &key, step / 2, &mut buf);
        let n_here = (2 * CHUNK_PAIRS as u64).min(p.max_steps - step) as usize;
        for (s, z) in buf.iter().enumerate().take(n_here) {
            let mut xn = [0.0; LANES];
            let mut yn = [0.0; LANES];
            let mut flag = 0u32;
            for l in 0..LANES {
                xn[l] = x[l] + (y[l] + x[l] * x[l]) * p.dt;
                yn[l] = y[l] + p.dt + p.noise * z[l];
                flag |= (xn[l] >= thr[l]) as u32;
            }
            let gstep = step + s as u64;
            let t_new = (gstep + 1) as f64 * p.dt;
            if TUBE {
                let centre = p.y_in + t_new;
                for l in 0..LANES {
                    flag |= (((yn[l] - centre).abs() > p.tube_h0) & !thr[l].is_nan()) as u32;
                }
            }
            if flag != 0 {
                for l in 0..LANES {
                    if thr[l].is_nan() {
                        continue;
                    }
                    while next[l] < ns && xn[l] >= sections[next[l]] {
                        out[l * ns + next[l]] = crossing(gstep, p.dt, sections[next[l]], x[l], xn[l], y[l], yn[l]);
                        next[l] += 1;
                    }
                    if TUBE && next[l] < ns && (yn[l] - (p.y_in + t_new)).abs() > p.tube_h0 {
                        for k in next[l]..ns {
                            out[l * ns + k] = HitRecord { tau: t_new, y_tau: yn[l], status: HitStatus::TubeExit };
                        }
                        next[l] = ns;
                    }
                    if next[l] == ns {
                        thr[l] = f64::NAN;
                        live -= 1;
                    } else {
                        thr[l] = sections[next[l]];
                    }
                }
            }
            x = xn;
            y = yn;
        }
        step += n_here as u64;
    }
    let t_end = step as f64 * p.dt;
    for l in 0..active {
        for k in next[l]..ns {
            out[l * ns + k] = HitRecord { tau: t_end, y_tau: y[l], status: HitStatus::TimedOut };
        }
    }
}

fn block_portable(p: &KernelParams, sections: &[f64], first: u64, active: usize, out: &mut [HitRecord]) {
    let gen = |t: &LnTable, k: &[u64; LANES], j: u64, b: &mut [[f64; LANES]]| fill_lanes(t, k, j, b);
    if p.tube_h0.is_finite() {
        block_body::<true, _>(gen, p, sections, first, active, out)
    } else {
        block_body::<false, _>(gen, p, sections, first, active, out)
    }
}

// Generation and stepping are compiled as separate functions: inlined into
// one body the register pressure of the generator spills the lane state.
macro_rules! isa_block {
    ($block:ident, $fill:ident, $features:literal) => {
        #[cfg(target_arch = "x86_64")]
        #[target_feature(enable = $features)]
        #[inline(never)]
        unsafe fn $fill(t: &LnTable, k: &[u64; LANES], j: u64, b: &mut [[f64; LANES]]) {
            fill_lanes(t, k, j, b)
        }

        #[cfg(target_arch = "x86_64")]
        #[target_feature(enable = $features)]
        unsafe fn $block(p: &KernelParams, sections: &[f64], first: u64, active: usize, out: &mut [HitRecord]) {
            // SAFETY: same features as the caller.
            let gen = |t: &LnTable, k: &[u64; LANES], j: u64, b: &mut [[f64; LANES]]| unsafe { $fill(t, k, j, b) };
            if p.tube_h0.is_finite() {
                block_body::<true, _>(gen, p, sections, first, active, out)
            } else {
                block_body::<false, _>(gen, p, sections, first, active, out)
            }
        }
    };
}

isa_block!(block_avx512, fill_avx512, "avx512f,avx512dq,avx512vl,avx2,fma");
isa_block!(block_avx2, fill_avx2, "avx2,fma");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Isa {
    Portable,
    #[cfg(target_arch = "x86_64")]
    Avx2,
    #[cfg(target_arch = "x86_64")]
    Avx512,
}

fn detected_isa() -> Isa {
    static ISA: OnceLock<Isa> = OnceLock::new();
    *ISA.get_or_init(|| {
        #[cfg(target_arch = "x86_64")]
        {
            if is_x86_feature_detected!("avx512f")
                && is_x86_feature_detected!("fma")
                && is_x86_feature_detected!("avx512dq")
                && is_x86_feature_detected!("avx512vl")
            {
                return Isa::Avx512;
            }
            if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") {
                return Isa::Avx2;
            }
        }
        Isa::Portable
    })
}

fn run_block(isa: Isa, p: &KernelParams, sections: &[f64], first: u64, active: usize, out: &mut [HitRecord]) {
    match isa {
        Isa::Portable => block_portable(p, sections, first, active, out),
        // SAFETY: the variant is only selected after runtime feature detection.
        #[cfg(target_arch = "x86_64")]
        Isa::Avx2 => unsafe { block_avx2(p, sections, first, active, out) },
        #[cfg(target_arch = "x86_64")]
        Isa::Avx512 => unsafe { block_avx512(p, sections, first, active, out) },
    }
}

/// All paths of `cfg` through every section; the result is `[path][section]`.
///
/// Runs on the current rayon pool (see [`with_threads`]).
pub fn simulate_sections(cfg: &FlowConfig, sections: &[f64], kernel: Kernel) -> Result<Vec<HitRecord>> {
    cfg.validate_for(sections)?;
    if sections.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sections must be strictly increasing".into()));
    }
    let isa = match kernel {
        Kernel::Auto => detected_isa(),
        Kernel::Portable => Isa::Portable,
    };
    let p = KernelParams::new(cfg);
    let ns = sections.len();
    let n = cfg.n_paths as usize;
    let mut out = vec![HitRecord::EMPTY; n * ns];
    out.par_chunks_mut(PATHS_PER_TASK * ns).enumerate().for_each(|(task, chunk)| {
        let base = task * PATHS_PER_TASK;
        let paths_here = chunk.len() / ns;
        for (b, block) in chunk.chunks_mut(LANES * ns).enumerate() {
            let first = base + b * LANES;
            let active = (paths_here - b * LANES).min(LANES);
            run_block(isa, &p, sections, first as u64, active, block);
        }
    });
    Ok(out)
}

/// Run `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Moments of the exit height over the paths that hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub n_hit: u64,
    /// Timed-out plus tube-exit paths.
    pub n_censored: u64,
    pub n_timed_out: u64,
    pub n_tube_exit: u64,
    pub mean_ytau: f64,
    pub var_ytau: f64,
    pub third_central: f64,
    pub fourth_central: f64,
    pub se_mean: f64,
    pub se_var: f64,
    /// More than 1% of the paths timed out.
    pub timeout_warning: bool,
}

impl MomentSummary {
    /// Summary of one section's records.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a HitRecord>) -> Self {
        let mut ys = Vec::new();
        let (mut timed, mut tube) = (0u64, 0u64);
        for r in records {
            match r.status {
                HitStatus::Hit => ys.push(r.y_tau),
                HitStatus::TimedOut => timed += 1,
                HitStatus::TubeExit => tube += 1,
            }
        }
        let m: Moments = moments(&ys);
        let total = ys.len() as u64 + timed + tube;
        MomentSummary {
            n_hit: ys.len() as u64,
            n_censored: timed + tube,
            n_timed_out: timed,
            n_tube_exit: tube,
            mean_ytau: m.mean,
            var_ytau: m.var,
            third_central: m.m3,
            fourth_central: m.m4,
            se_mean: m.se_mean(),
            se_var: m.se_var(),
            timeout_warning: total > 0 && timed * 100 > total,
        }
    }
}

/// Moments of `y_τ` for the single section `cfg.x_fin`.
pub fn run_monte_carlo(cfg: &FlowConfig) -> Result<MomentSummary> {
    if cfg.n_paths < 100 {
        return Err(Error::Config(format!("need at least 100 paths, got {}", cfg.n_paths)));
    }
    let rec = simulate_sections(cfg, &[cfg.x_fin], Kernel::Auto)?;
    Ok(MomentSummary::from_records(&rec))
}

/// Fraction of paths leaving the tube `|y − (y_in + t)| ≤ h₀` before hitting.
pub fn tube_exit_fraction(cfg: &FlowConfig) -> Result<f64> {
    if cfg.tube_h0.is_none() {
        return Err(Error::Config("tube_exit_fraction needs tube_h0".into()));
    }
    let rec = simulate_sections(cfg, &[cfg.x_fin], Kernel::Auto)?;
    let exits = rec.iter().filter(|r| r.status == HitStatus::TubeExit).count();
    Ok(exits as f64 / rec.len() as f64)
}

/// One `(σ, x_fin)` row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub x_fin: f64,
    pub y_fin: f64,
    pub summary: MomentSummary,
    /// `2(E y_τ − y_fin)/σ²`
    pub l_d: f64,
    /// `Var y_τ / σ²`
    pub l_v: f64,
    /// `(8/3)(E y_τ − y_fin)`
    pub m_d: f64,
    /// `(2/y*) Var y_τ`
    pub m_v: f64,
    pub se_m_d: f64,
    pub se_m_v: f64,
    pub d_theory: f64,
    pub v_theory: f64,
}

/// `M_D` normalisation: `(8/3)(E y_τ − y_fin) ≈ σ²` when `D ≈ 3/4`.
pub const M_D_FACTOR: f64 = 8.0 / 3.0;

impl SweepRow {
    pub fn new(sigma: f64, x_fin: f64, y_fin: f64, s: MomentSummary, d_theory: f64, v_theory: f64) -> Self {
        let shift = s.mean_ytau - y_fin;
        let s2 = sigma * sigma;
        let mv = 2.0 / ystar();
        SweepRow {
            sigma,
            x_fin,
            y_fin,
            summary: s,
            l_d: 2.0 * shift / s2,
            l_v: s.var_ytau / s2,
            m_d: M_D_FACTOR * shift,
            m_v: mv * s.var_ytau,
            se_m_d: M_D_FACTOR * s.se_mean,
            se_m_v: mv * s.se_var,
            d_theory,
            v_theory,
        }
    }
}

/// Monte Carlo over a grid of noise levels and sections, with the matching
/// theory columns. Each σ uses one simulation for all sections.
pub fn sweep_statistics(base: &FlowConfig, sigmas: &[f64], x_fins: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_statistics_with(base, sigmas, x_fins, Kernel::Auto)
}

pub fn sweep_statistics_with(base: &FlowConfig, sigmas: &[f64], x_fins: &[f64], kernel: Kernel) -> Result<Vec<SweepRow>> {
    if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::Config(format!("sweep noise levels must be positive, got {s}")));
    }
    let mut sections: Vec<f64> = x_fins.to_vec();
    sections.sort_by(f64::total_cmp);
    sections.dedup();
    let mut theory = Vec::with_capacity(sections.len());
    for &xf in &sections {
        let y_fin = base.y_in + travel_time(base.x_in, base.y_in, xf)?;
        let dv = dv_integral(base.y_in, xf)?;
        theory.push((y_fin, dv.d, dv.v));
    }
    let ns = sections.len();
    let mut rows = Vec::with_capacity(sigmas.len() * x_fins.len());
    for &sigma in sigmas {
        let cfg = FlowConfig { sigma, ..*base };
        let rec = simulate_sections(&cfg, &sections, kernel)?;
        for &xf in x_fins {
            let k = sections.iter().position(|&s| s == xf).expect("section present");
            let s = MomentSummary::from_records(rec.iter().skip(k).step_by(ns));
            let (y_fin, d, v) = theory[k];
            rows.push(SweepRow::new(sigma, xf, y_fin, s, d, v));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sigma: f64, n: u64) -> FlowConfig {
        FlowConfig { sigma, n_paths: n, ..FlowConfig::default() }
    }

    #[test]
    fn lane_kernel_matches_scalar_path() {
        let cfg = FlowConfig { n_paths: 21, ..small(0.5, 21) };
        let rec = simulate_sections(&cfg, &[cfg.x_fin], Kernel::Auto).unwrap();
        for (i, r) in rec.iter().enumerate() {
            let s = simulate_path(&cfg, i as u64);
            assert_eq!(r.tau.to_bits(), s.tau.to_bits(), "path {i}");
            assert_eq!(r.y_tau.to_bits(), s.y_tau.to_bits(), "path {i}");
            assert_eq!(r.status, s.status);
        }
        let port = simulate_sections(&cfg, &[cfg.x_fin], Kernel::Portable).unwrap();
        assert_eq!(rec, port);
    }

    #[test]
    fn multi_section_matches_single() {
        let cfg = small(0.3, 16);
        let secs = [0.0, 5.0, 30.0];
        let all = simulate_sections(&cfg, &secs, Kernel::Auto).unwrap();
        for (k, &xf) in secs.iter().enumerate() {
            let one = simulate_sections(&FlowConfig { x_fin: xf, ..cfg }, &[xf], Kernel::Auto).unwrap();
            for i in 0..16 {
                assert_eq!(all[i * 3 + k], one[i]);
            }
        }
    }

    #[test]
    fn deterministic_limit() {
        let cfg = FlowConfig { dt: 1e-5, ..small(0.0, 1) };
        let r = simulate_path(&cfg, 0);
        let y_fin = cfg.y_in + travel_time(cfg.x_in, cfg.y_in, cfg.x_fin).unwrap();
        assert_eq!(r.status, HitStatus::Hit);
        assert!((r.y_tau - y_fin).abs() < 1e-3, "{}", r.y_tau - y_fin);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let cfg = small(0.25, 200);
        let a = with_threads(1, || run_monte_carlo(&cfg)).unwrap().unwrap();
        let b = with_threads(8, || run_monte_carlo(&cfg)).unwrap().unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let r1 = simulate_path(&cfg, 3);
        let r2 = simulate_path(&cfg, 3);
        assert_eq!(r1.y_tau.to_bits(), r2.y_tau.to_bits());
    }

    #[test]
    fn zero_noise_has_zero_variance() {
        let s = run_monte_carlo(&small(0.0, 100)).unwrap();
        assert_eq!(s.var_ytau, 0.0);
        assert_eq!(s.n_hit, 100);
    }

    #[test]
    fn tube_censoring() {
        let cfg = FlowConfig { tube_h0: Some(1.0), ..small(0.0, 100) };
        assert_eq!(tube_exit_fraction(&cfg).unwrap(), 0.0);
        let cfg = FlowConfig { tube_h0: Some(0.5), ..small(1.0, 200) };
        assert!(tube_exit_fraction(&cfg).unwrap() > 0.0);
        let cfg = FlowConfig { tube_h0: Some(0.5), n_paths: 24, ..small(1.0, 24) };
        let rec = simulate_sections(&cfg, &[cfg.x_fin], Kernel::Auto).unwrap();
        for (i, r) in rec.iter().enumerate() {
            assert_eq!(*r, simulate_path(&cfg, i as u64));
        }
    }

    #[test]
    fn timed_out_paths_are_flagged() {
        let cfg = FlowConfig { t_max: Some(100.0), ..small(0.1, 100) };
        let short = FlowConfig { t_max: Some(1.0), ..cfg };
        assert!(short.validate().is_err());
        let p = KernelParams { max_steps: 10, ..KernelParams::new(&cfg) };
        let mut out = vec![HitRecord::EMPTY; 8];
        block_portable(&p, &[30.0], 0, 8, &mut out);
        assert!(out.iter().all(|r| r.status == HitStatus::TimedOut));
        let s = MomentSummary::from_records(&out);
        assert!(s.timeout_warning && s.n_censored == 8);
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig { x_fin: -6.0, ..FlowConfig::default() }.validate().is_err());
        assert!(FlowConfig { dt: 0.0, ..FlowConfig::default() }.validate().is_err());
        assert!(FlowConfig { x_in: 0.0, y_in: -1.0, ..FlowConfig::default() }.validate().is_err());
        assert!(run_monte_carlo(&small(0.1, 50)).is_err());
        assert!(FlowConfig::default().validate().is_ok());
    }
}
