//! `key=value` experiment files and their merge with command-line flags.
//!
//! Precedence, lowest first: built-in defaults, config file, flags. The
//! thread count additionally honours `FOLDNOISE_THREADS`, which overrides
//! everything else.

use std::fmt::Write as _;

use foldnoise::FlowConfig;
use thiserror::Error;

pub const THREADS_ENV: &str = "FOLDNOISE_THREADS";

/// Keys accepted in a config file, in print order.
pub const KEYS: [&str; 10] = ["x_in", "y_in", "x_fin", "sigma", "dt", "paths", "seed", "t_max", "tube_h0", "threads"];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key {key:?} (valid keys: {})", KEYS.join(", "))]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
    #[error("{0} must be a positive integer, got {1:?}")]
    BadThreads(&'static str, String),
}

/// Partial settings; `None` leaves the lower-precedence value in place.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub x_in: Option<f64>,
    pub y_in: Option<f64>,
    pub x_fin: Option<f64>,
    pub sigma: Option<f64>,
    pub dt: Option<f64>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub t_max: Option<f64>,
    pub tube_h0: Option<f64>,
    pub threads: Option<usize>,
}

impl Overrides {
    /// `other` wins wherever it is set.
    pub fn merged(self, other: Overrides) -> Overrides {
        Overrides {
            x_in: other.x_in.or(self.x_in),
            y_in: other.y_in.or(self.y_in),
            x_fin: other.x_fin.or(self.x_fin),
            sigma: other.sigma.or(self.sigma),
            dt: other.dt.or(self.dt),
            paths: other.paths.or(self.paths),
            seed: other.seed.or(self.seed),
            t_max: other.t_max.or(self.t_max),
            tube_h0: other.tube_h0.or(self.tube_h0),
            threads: other.threads.or(self.threads),
        }
    }
}

/// Parse a config file. Blank lines and `#` comments are ignored.
pub fn parse(text: &str) -> Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError::Malformed { line, text: raw.to_string() });
        };
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() {
            return Err(ConfigError::Malformed { line, text: raw.to_string() });
        }
        let bad = || ConfigError::BadValue { line, key: key.to_string(), value: value.to_string() };
        let real = || value.parse::<f64>().map_err(|_| bad());
        let int = || value.parse::<u64>().map_err(|_| bad());
        match key {
            "x_in" => o.x_in = Some(real()?),
            "y_in" => o.y_in = Some(real()?),
            "x_fin" => o.x_fin = Some(real()?),
            "sigma" => o.sigma = Some(real()?),
            "dt" => o.dt = Some(real()?),
            "paths" => o.paths = Some(int()?),
            "seed" => o.seed = Some(int()?),
            // `none` spells the built-in default of the optional settings.
            "t_max" | "tube_h0" if value == "none" => {}
            "t_max" => o.t_max = Some(real()?),
            "tube_h0" => o.tube_h0 = Some(real()?),
            "threads" => o.threads = Some(int()?.max(1) as usize),
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
    }
    Ok(o)
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub flow: FlowConfig,
    pub threads: usize,
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Merge defaults, file and flags; `env_threads` is the raw value of
/// `FOLDNOISE_THREADS`, if set.
pub fn resolve(file: Overrides, flags: Overrides, env_threads: Option<&str>) -> Result<Resolved, ConfigError> {
    let o = file.merged(flags);
    let d = FlowConfig::default();
    let flow = FlowConfig {
        x_in: o.x_in.unwrap_or(d.x_in),
        y_in: o.y_in.unwrap_or(d.y_in),
        x_fin: o.x_fin.unwrap_or(d.x_fin),
        sigma: o.sigma.unwrap_or(d.sigma),
        dt: o.dt.unwrap_or(d.dt),
        n_paths: o.paths.unwrap_or(d.n_paths),
        seed: o.seed.unwrap_or(d.seed),
        t_max: o.t_max.or(d.t_max),
        tube_h0: o.tube_h0.or(d.tube_h0),
    };
    let threads = match env_threads {
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(ConfigError::BadThreads(THREADS_ENV, v.to_string())),
        },
        None => o.threads.unwrap_or_else(default_threads),
    };
    Ok(Resolved { flow, threads })
}

/// Deterministic `key=value` rendering; parses back to the same settings.
pub fn render(r: &Resolved) -> String {
    let f = &r.flow;
    let mut s = String::new();
    let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
    let _ = writeln!(s, "x_in={}", f.x_in);
    let _ = writeln!(s, "y_in={}", f.y_in);
    let _ = writeln!(s, "x_fin={}", f.x_fin);
    let _ = writeln!(s, "sigma={}", f.sigma);
    let _ = writeln!(s, "dt={}", f.dt);
    let _ = writeln!(s, "paths={}", f.n_paths);
    let _ = writeln!(s, "seed={}", f.seed);
    let _ = writeln!(s, "t_max={}", opt(f.t_max));
    let _ = writeln!(s, "tube_h0={}", opt(f.tube_h0));
    let _ = writeln!(s, "threads={}", r.threads);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let r = resolve(parse("").unwrap(), Overrides::default(), None).unwrap();
        assert_eq!(r.flow, FlowConfig::default());
    }

    #[test]
    fn flags_beat_file() {
        let file = parse("sigma=0.25\n").unwrap();
        let flags = Overrides { sigma: Some(0.5), ..Default::default() };
        assert_eq!(resolve(file, flags, None).unwrap().flow.sigma, 0.5);
        assert_eq!(resolve(file, Overrides::default(), None).unwrap().flow.sigma, 0.25);
    }

    #[test]
    fn env_beats_thread_flag() {
        let flags = Overrides { threads: Some(2), ..Default::default() };
        assert_eq!(resolve(Overrides::default(), flags, Some("3")).unwrap().threads, 3);
        assert!(resolve(Overrides::default(), flags, Some("zero")).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse("# header\nsigma=0.1\nnonsense\n"),
            Err(ConfigError::Malformed { line: 3, text: "nonsense".into() })
        );
        let e = parse("sigma=0.1\ncolour=red").unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey { line: 2, key: "colour".into() });
        assert!(e.to_string().contains("x_in, y_in, x_fin"));
        assert!(matches!(parse("dt=fast"), Err(ConfigError::BadValue { line: 1, .. })));
    }

    #[test]
    fn render_round_trips() {
        let file = parse("sigma = 0.3  # comment\nseed=9\ntube_h0=1.5\nthreads=4").unwrap();
        let r = resolve(file, Overrides::default(), None).unwrap();
        let text = render(&r);
        let again = resolve(parse(&text).unwrap(), Overrides::default(), None).unwrap();
        assert_eq!(r, again);
    }
}
