use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_foldnoise"));
    c.env_remove("FOLDNOISE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn help_lists_subcommands_and_flags() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    let h = stdout(&o);
    for sub in ["airy", "det", "dv", "mc", "fpt", "figures", "validate", "config"] {
        assert!(h.contains(sub), "{sub} missing from help");
    }
    let h = stdout(&run(&["mc", "run", "--help"]));
    for flag in ["--sigma", "--xin", "--yin", "--xfin", "--dt", "--paths", "--seed", "--threads", "--tube-h0", "--t-max", "--config", "--out"] {
        assert!(h.contains(flag), "{flag} missing from mc run help");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["airy", "table", "--step", "fast"]).status.code(), Some(2));
    // Domain errors are input errors too.
    let o = run(&["dv", "table", "--yin", "5", "--xfin-list", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("y*"));
}

#[test]
fn airy_table_to_stdout() {
    let o = run(&["airy", "table", "--zmin", "-1", "--zmax", "1", "--step", "0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("z,Ai,Bi,dAi,dBi,wronskian_residual"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], -1.0);
    assert!((first[1] - 0.535_560_883_292_352_1).abs() < 1e-14);
    assert_eq!(s.lines().count(), 6);
}

#[test]
fn det_and_dv_tables() {
    let s = stdout(&run(&["det", "trajectory", "--xin", "-3", "--yin", "-2", "--xfin", "5", "--step", "0.1"]));
    assert!(s.starts_with("t,x,y\n0e0,-3e0,-2e0\n"));
    let last: Vec<f64> = s.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[1] - 5.0).abs() < 1e-9);

    let s = stdout(&run(&["dv", "table", "--yin", "-25", "--xfin-list", "10,1000"]));
    assert!(s.starts_with("x_fin,D,V,D_limit,V_limit\n"));
    let row: Vec<f64> = s.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[3] - 0.75).abs() < 1e-6 && (row[4] - 1.169053705229883).abs() < 1e-6);

    let s = stdout(&run(&["dv", "limit-curve", "--yin-range", "-6:2:0.5"]));
    assert!(s.starts_with("y_in,D_inf,V_inf\n"));
    assert_eq!(s.lines().count(), 18);
}

#[test]
fn config_precedence_and_errors() {
    let d = scratch("config");
    let empty = d.join("empty.cfg");
    std::fs::write(&empty, "").unwrap();
    let s = stdout(&run(&["config", "--config", empty.to_str().unwrap(), "--threads", "2"]));
    assert_eq!(s, "x_in=-5\ny_in=-24.9\nx_fin=30\nsigma=0.25\ndt=0.0001\npaths=100000\nseed=1\nt_max=none\ntube_h0=none\nthreads=2\n");

    let f = d.join("s.cfg");
    std::fs::write(&f, "# noise\nsigma=0.25\n").unwrap();
    let s = stdout(&run(&["config", "--config", f.to_str().unwrap(), "--sigma", "0.5"]));
    assert!(s.contains("sigma=0.5\n"));

    let bad = d.join("bad.cfg");
    std::fs::write(&bad, "sigma=0.1\njunk line\n").unwrap();
    let o = run(&["config", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    std::fs::write(&bad, "colour=red\n").unwrap();
    let o = run(&["config", "--config", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("valid keys: x_in, y_in"));

    let o = bin().args(["config", "--threads", "2"]).env("FOLDNOISE_THREADS", "5").output().unwrap();
    assert!(stdout(&o).ends_with("threads=5\n"));
}

const SMALL: [&str; 8] = ["--paths", "2000", "--dt", "1e-3", "--sigma", "0.5", "--seed", "4"];

#[test]
fn mc_run_writes_manifest_and_reproduces() {
    let d = scratch("mc_run");
    let out = d.join("run.csv");
    let mut args = vec!["mc", "run", "--out", out.to_str().unwrap(), "--threads", "1"];
    args.extend(SMALL);
    assert!(run(&args).status.success());
    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with(
        "sigma,x_fin,n_hit,n_censored,mean_ytau,var_ytau,L_D,L_V,M_D,M_V,se_mean,se_var,D_theory,V_theory\n"
    ));
    assert_eq!(text.lines().count(), 2);

    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("run.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 4);
    assert_eq!(m["config"]["sigma"], 0.5);
    let sha = m["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(sha, foldnoise_cli::output::sha256_hex(&first));

    // A different thread count (through the environment) gives the same bytes.
    let mut c = bin();
    c.args(&args).env("FOLDNOISE_THREADS", "3");
    assert!(c.output().unwrap().status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn mc_sweep_rows() {
    let mut args = vec!["mc", "sweep", "--sigma-list", "0.25,1", "--xfin-list", "5,30"];
    args.extend(&SMALL[..4]);
    let s = stdout(&run(&args));
    let rows: Vec<Vec<f64>> =
        s.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0][0], rows[0][1]), (0.25, 5.0));
    assert_eq!((rows[3][0], rows[3][1]), (1.0, 30.0));
    assert!(rows.iter().all(|r| r[2] + r[3] == 2000.0));
}

#[test]
fn fpt_commands() {
    let s = stdout(&run(&["fpt", "density", "--delta", "0.1", "--sigma", "0.1", "--grid-n", "100"]));
    assert!(s.starts_with("t,phi,b0,b,psi\n"));
    assert_eq!(s.lines().count(), 101);

    let o = run(&["fpt", "validate", "--paths", "5000", "--dt", "1e-4", "--grid-n", "200", "--threads", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["quadrature_mean"].as_f64().unwrap() - 0.10005).abs() < 1e-4);
    assert!(v["ks_distance"].as_f64().unwrap() < 0.05);
}

#[test]
fn figure_presets() {
    let d = scratch("figures");
    let o = run(&["figures", "fig3", "--out-dir", d.to_str().unwrap()]);
    assert!(o.status.success());
    let s = std::fs::read_to_string(d.join("fig3.csv")).unwrap();
    assert!(s.starts_with("y_in,D_inf,V_inf\n-6e0,"));
    assert_eq!(s.lines().count(), 1 + 417);
    assert!(d.join("manifest.json").exists());

    assert!(run(&["figures", "fig2", "--out-dir", d.to_str().unwrap()]).status.success());
    for f in ["fig2_orbit.csv", "fig2_reference.csv", "fig2_critical.csv", "fig2_ystar.csv"] {
        assert!(d.join(f).exists(), "{f}");
    }

    let o = run(&["figures", "fig4", "--out-dir", d.to_str().unwrap(), "--paths", "500", "--dt", "1e-3"]);
    assert!(o.status.success());
    let s = std::fs::read_to_string(d.join("fig4.csv")).unwrap();
    assert_eq!(s.lines().count(), 1 + 3 * 26);
}
