//! Cartesian-product parameter sweeps.
//!
//! The configuration is a `key = value` file; `#` starts a comment and list
//! values are comma separated:
//!
//! ```text
//! scheme     = transport
//! nx         = 129
//! splits     = 2x2
//! cfl        = 0.45
//! t_end      = 0.5
//! alpha      = 0.9
//! beta       = 0.9
//! mode       = capped
//! thresholds = 0, 0.0025, 0.005, 0.01, 0.02, 0.04
//! levels     = 1, 2, 3, 4
//! codecs     = csr, lz:65536, lz:1048576
//! threads    = 1
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::codec::Codec;
use crate::threshold::{ThresholdMode, ThresholdSpec};

use super::config::{parse_splits, SimConfig};
use super::simulation::{run, RunOptions};
use super::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: SimConfig,
    pub mode: ThresholdMode,
    pub thresholds: Vec<f64>,
    pub levels: Vec<u32>,
    pub codecs: Vec<Codec>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, PipelineError> {
    v.trim()
        .parse()
        .map_err(|_| PipelineError::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, PipelineError> {
    let items: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(PipelineError::Config(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let mut base = SimConfig::transport();
        let mut mode = ThresholdMode::Capped;
        let mut thresholds = vec![0.0];
        let mut levels = vec![base.compression.levels];
        let mut codecs = vec![Codec::Csr];
        let mut alpha_set = false;
        let mut t_end_set = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().trim_matches('"');
            match key.as_str() {
                "scheme" => {
                    let scheme = value.parse()?;
                    base = SimConfig {
                        scheme,
                        ..match scheme {
                            super::Scheme::Transport => SimConfig::transport(),
                            super::Scheme::Swe => SimConfig::swe(),
                        }
                    }
                    .with_grid_of(&base, alpha_set, t_end_set);
                }
                "nx" => base.nx = parse_value(&key, value)?,
                "splits" => base.splits = parse_splits(value)?,
                "cfl" => base.cfl = parse_value(&key, value)?,
                "t_end" => {
                    base.t_end = parse_value(&key, value)?;
                    t_end_set = true;
                }
                "alpha" => {
                    base.alpha = parse_value(&key, value)?;
                    alpha_set = true;
                }
                "beta" => {
                    base.beta = parse_value(&key, value)?;
                    alpha_set = true;
                }
                "g" => base.g = parse_value(&key, value)?,
                "threads" => base.threads = Some(parse_value(&key, value)?),
                "mode" => mode = value.parse()?,
                "thresholds" | "threshold" => thresholds = parse_list(&key, value)?,
                "levels" | "level" => levels = parse_list(&key, value)?,
                "codecs" | "codec" => {
                    codecs = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.parse::<Codec>().map_err(|e| PipelineError::Config(e.to_string())))
                        .collect::<Result<_, _>>()?;
                }
                other => return Err(PipelineError::Config(format!("line {}: unknown key `{other}`", n + 1))),
            }
        }
        if codecs.is_empty() {
            return Err(PipelineError::Config("`codecs` needs at least one value".into()));
        }
        for &c in &thresholds {
            ThresholdSpec::new(mode, c)?;
        }
        base.validate()?;
        Ok(Self {
            base,
            mode,
            thresholds,
            levels,
            codecs,
        })
    }

    pub fn runs(&self) -> Result<Vec<SimConfig>, PipelineError> {
        let mut out = Vec::new();
        for &codec in &self.codecs {
            for &level in &self.levels {
                for &c in &self.thresholds {
                    let mut cfg = self.base.clone();
                    cfg.compression.enabled = true;
                    cfg.compression.codec = codec;
                    cfg.compression.levels = level;
                    cfg.compression.threshold = ThresholdSpec::new(self.mode, c)?;
                    out.push(cfg);
                }
            }
        }
        Ok(out)
    }
}

impl SimConfig {
    /// Keeps grid and explicitly set parameters from `prev` when switching
    /// scheme defaults.
    fn with_grid_of(mut self, prev: &SimConfig, keep_velocity: bool, keep_t_end: bool) -> SimConfig {
        self.nx = prev.nx;
        self.splits = prev.splits.clone();
        self.cfl = prev.cfl;
        self.g = prev.g;
        self.threads = prev.threads;
        if keep_velocity {
            self.alpha = prev.alpha;
            self.beta = prev.beta;
        }
        if keep_t_end {
            self.t_end = prev.t_end;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub codec: Codec,
    pub levels: u32,
    pub threshold: f64,
    pub steps: usize,
    pub average_ratio: f64,
    pub final_l2_error: Option<f64>,
    pub final_mass: f64,
    pub initial_mass: f64,
    pub metrics_file: String,
}

pub const SUMMARY_HEADER: &str = "scheme,codec,levels,mode,threshold,steps,average_ratio,final_l2_error,initial_mass,final_mass,metrics_file";

fn run_name(cfg: &SimConfig) -> String {
    let codec = cfg.compression.codec.to_string().replace(':', "-");
    format!("run_{}_{}_L{}_c{}.csv", cfg.scheme, codec, cfg.compression.levels, cfg.compression.threshold.c())
}

/// Runs every combination, writing one metrics CSV per run and
/// `summary.csv` into `out_dir`.
pub fn sweep(config: &SweepConfig, out_dir: &Path) -> Result<Vec<SweepRow>, PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    let mut summary = String::new();
    summary.push_str(SUMMARY_HEADER);
    summary.push('\n');
    for cfg in config.runs()? {
        let name = run_name(&cfg);
        let opts = RunOptions {
            metrics_path: Some(out_dir.join(&name)),
            ..Default::default()
        };
        let report = run(&cfg, &opts)?;
        let row = SweepRow {
            codec: cfg.compression.codec,
            levels: cfg.compression.levels,
            threshold: cfg.compression.threshold.c(),
            steps: report.metrics.steps.len(),
            average_ratio: report.metrics.average_ratio(),
            final_l2_error: report.metrics.final_l2_error(),
            final_mass: report.metrics.steps.last().map_or(report.initial_masses[0], |s| s.global_mass),
            initial_mass: report.initial_masses[0],
            metrics_file: name,
        };
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cfg.scheme,
            row.codec,
            row.levels,
            config.mode,
            row.threshold,
            row.steps,
            row.average_ratio,
            row.final_l2_error.map(|v| v.to_string()).unwrap_or_default(),
            row.initial_mass,
            row.final_mass,
            row.metrics_file
        );
        rows.push(row);
    }
    std::fs::write(out_dir.join("summary.csv"), summary)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_config() {
        let text = "# transport sweep\nscheme = transport\nnx = 65\nsplits = 2x2\ncfl=0.45\n\
                    t_end = 0.1\nmode = capped\nthresholds = 0, 0.01\nlevels = 1,2\n\
                    codecs = csr, lz:65536  # two codecs\n";
        let s = SweepConfig::parse(text).unwrap();
        assert_eq!(s.base.nx, 65);
        assert_eq!(s.thresholds, vec![0.0, 0.01]);
        assert_eq!(s.levels, vec![1, 2]);
        assert_eq!(s.codecs, vec![Codec::Csr, Codec::Lz { chunk_size: 65536 }]);
        assert_eq!(s.runs().unwrap().len(), 8);
    }

    #[test]
    fn scheme_switch_keeps_grid() {
        let s = SweepConfig::parse("nx = 33\nscheme = swe\n").unwrap();
        assert_eq!(s.base.nx, 33);
        assert_eq!(s.base.t_end, 1.0);
        let s = SweepConfig::parse("t_end = 0.2\nscheme = swe\n").unwrap();
        assert_eq!(s.base.t_end, 0.2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SweepConfig::parse("bogus = 1").is_err());
        assert!(SweepConfig::parse("nx").is_err());
        assert!(SweepConfig::parse("thresholds = -1").is_err());
        assert!(SweepConfig::parse("codecs = zip").is_err());
        assert!(SweepConfig::parse("cfl = 0").is_err());
        assert!(SweepConfig::parse("levels = ").is_err());
    }

    #[test]
    fn single_point_sweep_matches_run() {
        let dir = tempfile::tempdir().unwrap();
        let s = SweepConfig::parse("nx = 33\nt_end = 0.05\nlevels = 3\nthresholds = 0.01\nthreads = 1\n").unwrap();
        let rows = sweep(&s, dir.path()).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = run(&s.runs().unwrap()[0], &RunOptions::default()).unwrap();
        assert_eq!(rows[0].average_ratio, direct.metrics.average_ratio());
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 2);
        let per_run = std::fs::read_to_string(dir.path().join(&rows[0].metrics_file)).unwrap();
        let mut expected = Vec::new();
        direct.metrics.write_csv(&mut expected).unwrap();
        assert_eq!(per_run.as_bytes(), &expected[..]);
    }
}
