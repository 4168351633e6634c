//! Command bodies. Each returns its outputs as in-memory artifacts; the binary
//! decides where they go.

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;

use foldnoise::airy::{airy_eval, ystar};
use foldnoise::dv::{dv_integral, dv_limit};
use foldnoise::flow::{slow_x, trajectory, travel_time};
use foldnoise::fpt::{fpt_moments, ks_against_grid, mc_integrated_bm, solve_b, LinearBoundary};
use foldnoise::sde::{run_monte_carlo, sweep_statistics, with_threads, SweepRow};
use foldnoise::stats::{linear_fit, rmse};
use foldnoise::FlowConfig;

use crate::output::{csv_table, json_artifact, Artifact};

/// `start:end:step` → inclusive grid (up to rounding of the last node).
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    ensure!(parts.len() == 3, "range must be start:end:step, got {s:?}");
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in range {s:?}")))
        .collect::<Result<_>>()?;
    grid(v[0], v[1], v[2])
}

pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    ensure!(step > 0.0 && step.is_finite(), "step must be positive, got {step}");
    ensure!(start.is_finite() && end >= start, "need start ≤ end, got {start}..{end}");
    let n = ((end - start) / step + 1e-9).floor() as usize;
    ensure!(n < 10_000_000, "grid of {n} points is too large");
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in list {s:?}")))
        .collect()
}

/// `z, Ai, Bi, dAi, dBi, wronskian_residual`.
pub fn airy_table(zmin: f64, zmax: f64, step: f64) -> Result<Artifact> {
    let rows = grid(zmin, zmax, step)?
        .into_iter()
        .map(|z| {
            let q = airy_eval(z)?;
            Ok([z, q.ai, q.bi, q.dai, q.dbi, q.wronskian() - std::f64::consts::FRAC_1_PI])
        })
        .collect::<Result<Vec<_>>>()?;
    csv_table("airy.csv", &["z", "Ai", "Bi", "dAi", "dBi", "wronskian_residual"], rows)
}

/// `t, x, y` along the deterministic orbit.
pub fn det_trajectory(name: &str, x_in: f64, y_in: f64, x_fin: f64, step: f64) -> Result<Artifact> {
    let pts = trajectory(x_in, y_in, x_fin, step)?;
    csv_table(name, &["t", "x", "y"], pts.into_iter().map(|(t, x, y)| [t, x, y]))
}

/// `x_fin, D, V, D_limit, V_limit` for an initial point on the slow solution.
pub fn dv_table(y_in: f64, x_fins: &[f64]) -> Result<Artifact> {
    let lim = dv_limit(y_in)?;
    let rows = x_fins
        .iter()
        .map(|&xf| {
            let r = dv_integral(y_in, xf)?;
            Ok([xf, r.d, r.v, lim.d, lim.v])
        })
        .collect::<Result<Vec<_>>>()?;
    csv_table("dv.csv", &["x_fin", "D", "V", "D_limit", "V_limit"], rows)
}

/// `y_in, D_inf, V_inf`.
pub fn dv_limit_curve(name: &str, y_ins: &[f64]) -> Result<Artifact> {
    let rows = y_ins
        .iter()
        .map(|&y| {
            let r = dv_limit(y)?;
            Ok([y, r.d, r.v])
        })
        .collect::<Result<Vec<_>>>()?;
    csv_table(name, &["y_in", "D_inf", "V_inf"], rows)
}

pub const SWEEP_HEADER: [&str; 14] = [
    "sigma", "x_fin", "n_hit", "n_censored", "mean_ytau", "var_ytau", "L_D", "L_V", "M_D", "M_V", "se_mean", "se_var",
    "D_theory", "V_theory",
];

fn sweep_record(r: &SweepRow) -> [f64; 14] {
    let s = &r.summary;
    [
        r.sigma,
        r.x_fin,
        s.n_hit as f64,
        s.n_censored as f64,
        s.mean_ytau,
        s.var_ytau,
        r.l_d,
        r.l_v,
        r.m_d,
        r.m_v,
        s.se_mean,
        s.se_var,
        r.d_theory,
        r.v_theory,
    ]
}

pub fn sweep_csv(name: &str, rows: &[SweepRow]) -> Result<Artifact> {
    csv_table(name, &SWEEP_HEADER, rows.iter().map(sweep_record))
}

fn run_sweep(base: &FlowConfig, sigmas: &[f64], x_fins: &[f64], threads: usize) -> Result<Vec<SweepRow>> {
    Ok(with_threads(threads, || sweep_statistics(base, sigmas, x_fins))??)
}

/// One experiment; σ = 0 is allowed (the `L` columns are then undefined).
pub fn mc_run(cfg: &FlowConfig, threads: usize) -> Result<(Vec<SweepRow>, Artifact)> {
    let rows = if cfg.sigma > 0.0 {
        run_sweep(cfg, &[cfg.sigma], &[cfg.x_fin], threads)?
    } else {
        let s = with_threads(threads, || run_monte_carlo(cfg))??;
        let y_fin = cfg.y_in + travel_time(cfg.x_in, cfg.y_in, cfg.x_fin)?;
        let dv = dv_integral(cfg.y_in, cfg.x_fin)?;
        vec![SweepRow::new(cfg.sigma, cfg.x_fin, y_fin, s, dv.d, dv.v)]
    };
    if rows.iter().any(|r| r.summary.timeout_warning) {
        eprintln!("warning: more than 1% of the paths timed out; raise t_max");
    }
    let a = sweep_csv("mc_run.csv", &rows)?;
    Ok((rows, a))
}

pub fn mc_sweep(base: &FlowConfig, sigmas: &[f64], x_fins: &[f64], threads: usize) -> Result<(Vec<SweepRow>, Artifact)> {
    ensure!(!sigmas.is_empty() && !x_fins.is_empty(), "sweep needs at least one sigma and one x_fin");
    let rows = run_sweep(base, sigmas, x_fins, threads)?;
    let a = sweep_csv("mc_sweep.csv", &rows)?;
    Ok((rows, a))
}

/// `t, phi, b0, b, psi` for the linear boundary `d(t) = δ − t`.
pub fn fpt_density(delta: f64, sigma: f64, grid_n: usize) -> Result<Artifact> {
    let d = LinearBoundary::new(delta)?;
    let g = solve_b(&d, sigma, grid_n)?;
    let rows = (0..g.t_nodes.len()).map(|i| [g.t_nodes[i], g.phi_vals[i], g.b0_vals[i], g.b_vals[i], g.psi_vals[i]]);
    csv_table("fpt_density.csv", &["t", "phi", "b0", "b", "psi"], rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct FptValidation {
    pub delta: f64,
    pub sigma: f64,
    pub grid_n: usize,
    pub paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub picard_iterations: usize,
    pub quadrature_mass: f64,
    pub quadrature_mean: f64,
    pub quadrature_variance: f64,
    /// `δ + δ²σ²/2`
    pub expansion_mean: f64,
    /// `δ³σ²/3`
    pub expansion_variance: f64,
    pub mc_mean: f64,
    pub mc_variance: f64,
    pub mc_se_mean: f64,
    pub mc_timed_out: u64,
    pub ks_distance: f64,
}

pub struct FptValidateArgs {
    pub delta: f64,
    pub sigma: f64,
    pub paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub grid_n: usize,
}

/// Durbin quadrature against the exact-step Monte Carlo.
pub fn fpt_validate(a: &FptValidateArgs, threads: usize) -> Result<(FptValidation, Artifact)> {
    let d = LinearBoundary::new(a.delta)?;
    let g = solve_b(&d, a.sigma, a.grid_n)?;
    let m = fpt_moments(&g, 2);
    let s = with_threads(threads, || mc_integrated_bm(&d, a.sigma, a.paths, a.dt, a.seed))??;
    let s2 = a.sigma * a.sigma;
    let v = FptValidation {
        delta: a.delta,
        sigma: a.sigma,
        grid_n: a.grid_n,
        paths: a.paths,
        dt: a.dt,
        seed: a.seed,
        picard_iterations: g.iterations_used,
        quadrature_mass: m.mass,
        quadrature_mean: m.mean,
        quadrature_variance: m.variance,
        expansion_mean: a.delta + 0.5 * a.delta * a.delta * s2,
        expansion_variance: a.delta.powi(3) * s2 / 3.0,
        mc_mean: s.mean,
        mc_variance: s.variance,
        mc_se_mean: s.se_mean,
        mc_timed_out: s.n_timed_out,
        ks_distance: ks_against_grid(&s, &g),
    };
    let art = json_artifact("fpt_validate.json", &v)?;
    Ok((v, art))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

/// Monte Carlo size of the fig4/fig5 presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McScale {
    pub paths: u64,
    pub dt: f64,
}

impl McScale {
    pub const DESK: McScale = McScale { paths: 100_000, dt: 1e-4 };
    pub const FULL: McScale = McScale { paths: 300_000, dt: 1e-5 };
}

/// Geometry of the Monte Carlo figures: `x_in = −5`, `y_in = −x_in² + 0.1`.
pub fn figure_base(scale: McScale, seed: u64) -> FlowConfig {
    FlowConfig { x_in: -5.0, y_in: -24.9, x_fin: 30.0, n_paths: scale.paths, dt: scale.dt, seed, ..FlowConfig::default() }
}

pub const FIG4_SIGMAS: [f64; 3] = [0.25, 0.5, 1.0];

/// The 20 noise levels `0.05, 0.10, …, 1.00`.
pub fn fig5_sigmas() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

pub const REFERENCE_RMSE_M_D: f64 = 0.0270897;
pub const REFERENCE_RMSE_M_V: f64 = 0.0576924;

#[derive(Debug, Clone, Serialize)]
pub struct Fig5Summary {
    /// Slope of `log₁₀ M_D` against `log₁₀ σ`.
    pub slope_m_d: f64,
    pub intercept_m_d: f64,
    pub rmse_m_d: f64,
    pub rmse_m_v: f64,
    pub reference_rmse_m_d: f64,
    pub reference_rmse_m_v: f64,
    /// Rows with `M_D ≤ 0` cannot enter the log–log fit.
    pub nonpositive_m_d: usize,
}

pub fn fig5_summary(rows: &[SweepRow]) -> Fig5Summary {
    let pos: Vec<&SweepRow> = rows.iter().filter(|r| r.m_d > 0.0).collect();
    let lx: Vec<f64> = pos.iter().map(|r| r.sigma.log10()).collect();
    let ly: Vec<f64> = pos.iter().map(|r| r.m_d.log10()).collect();
    let (intercept, slope) = linear_fit(&lx, &ly);
    let s2: Vec<f64> = rows.iter().map(|r| r.sigma * r.sigma).collect();
    let md: Vec<f64> = rows.iter().map(|r| r.m_d).collect();
    let mv: Vec<f64> = rows.iter().map(|r| r.m_v).collect();
    Fig5Summary {
        slope_m_d: slope,
        intercept_m_d: intercept,
        rmse_m_d: rmse(&md, &s2),
        rmse_m_v: rmse(&mv, &s2),
        reference_rmse_m_d: REFERENCE_RMSE_M_D,
        reference_rmse_m_v: REFERENCE_RMSE_M_V,
        nonpositive_m_d: rows.len() - pos.len(),
    }
}

/// Data files of one figure.
///
/// - fig2: `fig2_orbit.csv` and `fig2_reference.csv` (`t, x, y`) for the orbit
///   through (−3, −2) and the slow solution; `fig2_critical.csv` (`x, y`) for
///   `y = −x²`; `fig2_ystar.csv` (`y_star`).
/// - fig3: `fig3.csv` (`y_in, D_inf, V_inf`) on `[−6, y*]`, step 0.02.
/// - fig4: `fig4.csv` (sweep columns) for σ ∈ {0.25, 0.5, 1}, `x_fin = 5..30`;
///   `fig4_theory.csv` (`x_fin, D, V`) on a finer grid.
/// - fig5: `fig5.csv` (sweep columns) over the 20 noise levels at `x_fin = 30`;
///   `fig5_summary.json` with the log–log slope and the RMSEs.
pub fn figure(fig: Figure, scale: McScale, seed: u64, threads: usize) -> Result<Vec<Artifact>> {
    match fig {
        Figure::Fig2 => {
            let step = 0.01;
            let y_ref = -9.0;
            Ok(vec![
                det_trajectory("fig2_orbit.csv", -3.0, -2.0, 20.0, step)?,
                det_trajectory("fig2_reference.csv", slow_x(y_ref)?, y_ref, 20.0, step)?,
                csv_table("fig2_critical.csv", &["x", "y"], grid(-4.0, 0.0, 0.01)?.into_iter().map(|x| [x, -x * x]))?,
                csv_table("fig2_ystar.csv", &["y_star"], [[ystar()]])?,
            ])
        }
        Figure::Fig3 => {
            let ys: Vec<f64> = grid(-6.0, ystar(), 0.02)?;
            Ok(vec![dv_limit_curve("fig3.csv", &ys)?])
        }
        Figure::Fig4 => {
            let base = figure_base(scale, seed);
            let x_fins = grid(5.0, 30.0, 1.0)?;
            let rows = run_sweep(&base, &FIG4_SIGMAS, &x_fins, threads)?;
            let theory = grid(5.0, 30.0, 0.25)?
                .into_iter()
                .map(|xf| {
                    let r = dv_integral(base.y_in, xf)?;
                    Ok([xf, r.d, r.v])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![sweep_csv("fig4.csv", &rows)?, csv_table("fig4_theory.csv", &["x_fin", "D", "V"], theory)?])
        }
        Figure::Fig5 => {
            let base = figure_base(scale, seed);
            let rows = run_sweep(&base, &fig5_sigmas(), &[base.x_fin], threads)?;
            let summary = fig5_summary(&rows);
            Ok(vec![sweep_csv("fig5.csv", &rows)?, json_artifact("fig5_summary.json", &summary)?])
        }
    }
}

pub fn parse_figure(s: &str) -> Result<Figure> {
    Ok(match s {
        "fig2" => Figure::Fig2,
        "fig3" => Figure::Fig3,
        "fig4" => Figure::Fig4,
        "fig5" => Figure::Fig5,
        _ => bail!("unknown figure {s:?} (expected fig2, fig3, fig4 or fig5)"),
    })
}
