//! Flat key=value configuration with dotted section prefixes, e.g.
//! `noise.kind = fresh`. Unknown keys are rejected at parse time; semantic
//! problems are collected by [`PipelineConfig::validate`], which reports
//! every violation rather than the first.

use plc_lab_core::capacity::Mode;
use plc_lab_core::Real;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Fresh,
    Nassar,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Synthetic,
    File,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seed: u64,

    pub noise_kind: NoiseKind,
    pub noise_phases: usize,
    pub noise_branches: usize,
    pub noise_filter_len: usize,
    pub noise_decay: Real,
    pub noise_coupling: Real,
    /// Sequential-filter regions as (length, taps).
    pub noise_regions: Vec<(usize, Vec<Real>)>,
    pub noise_trace_path: Option<PathBuf>,

    pub sample_rate_hz: Real,
    pub samples_per_period: usize,
    pub n_periods: usize,

    pub channel_kind: ChannelKind,
    pub channel_path: Option<PathBuf>,
    pub channel_rx: usize,
    pub channel_tx: usize,
    pub channel_memory: usize,
    pub channel_decay: Real,

    pub n_fft: usize,
    pub n_cp: usize,

    pub th1: Real,
    pub th2: Real,
    pub phase: usize,
    pub analysis_n_period: usize,

    pub kld_threshold: Real,
    pub n_itr: usize,
    pub n_bins: usize,

    pub snr_grid_db: Vec<Real>,
    pub modes: Vec<Mode>,
    pub dump_correlation: bool,
    /// Periods for autocorrelation estimation; defaults to
    /// `analysis.n_period` when unset.
    pub whitening_n_period: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            noise_kind: NoiseKind::Fresh,
            noise_phases: 2,
            noise_branches: 19,
            noise_filter_len: 65,
            noise_decay: 0.9,
            noise_coupling: 0.5,
            noise_regions: Vec::new(),
            noise_trace_path: None,
            sample_rate_hz: 400e3,
            samples_per_period: 3200,
            n_periods: 20,
            channel_kind: ChannelKind::Synthetic,
            channel_path: None,
            channel_rx: 2,
            channel_tx: 2,
            channel_memory: 65,
            channel_decay: 0.9,
            n_fft: 256,
            n_cp: 64,
            th1: 0.05,
            th2: 0.2,
            phase: 0,
            analysis_n_period: 20,
            kld_threshold: 0.4,
            n_itr: 1000,
            n_bins: 64,
            snr_grid_db: (0..=8).map(|i| 5.0 * i as Real).collect(),
            modes: vec![Mode::NoCsit, Mode::Csit],
            dump_correlation: false,
            whitening_n_period: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// One validation finding.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_str_src(&text)
    }

    pub fn from_str_src(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: lineno,
                message: format!("expected key = value, got '{}'", line),
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|message| ConfigError::Syntax {
                    line: lineno,
                    message,
                })?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(value: &str, what: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value.parse().map_err(|e| format!("bad {}: {}", what, e))
        }
        match key {
            "seed" => self.seed = num(value, "seed")?,
            "noise.kind" => {
                self.noise_kind = match value {
                    "fresh" => NoiseKind::Fresh,
                    "nassar" => NoiseKind::Nassar,
                    "file" => NoiseKind::File,
                    other => return Err(format!("unknown noise.kind '{}'", other)),
                }
            }
            "noise.phases" => self.noise_phases = num(value, "noise.phases")?,
            "noise.branches" => self.noise_branches = num(value, "noise.branches")?,
            "noise.filter_len" => self.noise_filter_len = num(value, "noise.filter_len")?,
            "noise.decay" => self.noise_decay = num(value, "noise.decay")?,
            "noise.coupling" => self.noise_coupling = num(value, "noise.coupling")?,
            "noise.regions" => self.noise_regions = parse_regions(value)?,
            "noise.trace_path" => self.noise_trace_path = Some(PathBuf::from(value)),
            "trace.sample_rate_hz" => self.sample_rate_hz = num(value, "trace.sample_rate_hz")?,
            "trace.samples_per_period" => {
                self.samples_per_period = num(value, "trace.samples_per_period")?
            }
            "trace.n_periods" => self.n_periods = num(value, "trace.n_periods")?,
            "channel.kind" => {
                self.channel_kind = match value {
                    "synthetic" => ChannelKind::Synthetic,
                    "file" => ChannelKind::File,
                    other => return Err(format!("unknown channel.kind '{}'", other)),
                }
            }
            "channel.path" => self.channel_path = Some(PathBuf::from(value)),
            "channel.rx" => self.channel_rx = num(value, "channel.rx")?,
            "channel.tx" => self.channel_tx = num(value, "channel.tx")?,
            "channel.memory" => self.channel_memory = num(value, "channel.memory")?,
            "channel.decay" => self.channel_decay = num(value, "channel.decay")?,
            "ofdm.n_fft" => self.n_fft = num(value, "ofdm.n_fft")?,
            "ofdm.n_cp" => self.n_cp = num(value, "ofdm.n_cp")?,
            "classify.th1" => self.th1 = num(value, "classify.th1")?,
            "classify.th2" => self.th2 = num(value, "classify.th2")?,
            "classify.phase" => self.phase = num(value, "classify.phase")?,
            "analysis.n_period" => self.analysis_n_period = num(value, "analysis.n_period")?,
            "gauss.kld_threshold" => self.kld_threshold = num(value, "gauss.kld_threshold")?,
            "gauss.n_itr" => self.n_itr = num(value, "gauss.n_itr")?,
            "gauss.n_bins" => self.n_bins = num(value, "gauss.n_bins")?,
            "snr.grid_db" => self.snr_grid_db = parse_grid(value)?,
            "capacity.modes" => self.modes = parse_modes(value)?,
            "whitening.dump_correlation" => {
                self.dump_correlation = num(value, "whitening.dump_correlation")?
            }
            "whitening.n_period" => {
                self.whitening_n_period = Some(num(value, "whitening.n_period")?)
            }
            other => return Err(format!("unknown key '{}'", other)),
        }
        Ok(())
    }

    /// Collects every violation; an empty list means the config is
    /// runnable.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |key: &str, message: String| {
            out.push(Diagnostic {
                key: key.to_string(),
                message,
            });
        };

        match self.noise_kind {
            NoiseKind::Fresh => {
                if self.noise_phases == 0 {
                    push("noise.phases", "at least one phase required".into());
                }
                if self.noise_branches == 0 {
                    push("noise.branches", "at least one branch required".into());
                }
                if self.noise_filter_len == 0 {
                    push("noise.filter_len", "filter length must be positive".into());
                }
                if !(self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
                    push(
                        "noise.decay",
                        format!("must be in (0, 1], got {}", self.noise_decay),
                    );
                }
                if !(0.0..=1.0).contains(&self.noise_coupling) {
                    push(
                        "noise.coupling",
                        format!("must be in [0, 1], got {}", self.noise_coupling),
                    );
                }
            }
            NoiseKind::Nassar => {
                if self.noise_regions.is_empty() {
                    push("noise.regions", "at least one region required".into());
                } else {
                    let total: usize = self.noise_regions.iter().map(|(len, _)| len).sum();
                    if total != self.samples_per_period {
                        push(
                            "noise.regions",
                            format!(
                                "region lengths sum to {}, expected {} samples per period",
                                total, self.samples_per_period
                            ),
                        );
                    }
                }
            }
            NoiseKind::File => match &self.noise_trace_path {
                None => push("noise.trace_path", "required when noise.kind = file".into()),
                Some(p) if !p.exists() => push(
                    "noise.trace_path",
                    format!("path does not exist: {}", p.display()),
                ),
                _ => {}
            },
        }

        if self.sample_rate_hz <= 0.0 {
            push("trace.sample_rate_hz", "must be positive".into());
        }
        if self.samples_per_period == 0 {
            push("trace.samples_per_period", "must be positive".into());
        }
        if self.n_periods == 0 {
            push("trace.n_periods", "must be positive".into());
        }

        match self.channel_kind {
            ChannelKind::File => match &self.channel_path {
                None => push("channel.path", "required when channel.kind = file".into()),
                Some(p) if !p.exists() => push(
                    "channel.path",
                    format!("path does not exist: {}", p.display()),
                ),
                _ => {}
            },
            ChannelKind::Synthetic => {
                if self.channel_rx == 0 || self.channel_tx == 0 {
                    push("channel.rx", "antenna counts must be positive".into());
                }
                if self.channel_memory == 0 {
                    push("channel.memory", "memory length must be positive".into());
                }
                if !(self.channel_decay > 0.0 && self.channel_decay <= 1.0) {
                    push(
                        "channel.decay",
                        format!("must be in (0, 1], got {}", self.channel_decay),
                    );
                }
            }
        }

        if self.n_fft == 0 {
            push("ofdm.n_fft", "must be positive".into());
        }
        let slot = self.n_fft + self.n_cp;
        if slot > 0 && self.samples_per_period % slot != 0 {
            push(
                "ofdm.n_fft",
                format!(
                    "slot length {} does not divide {} samples per period (remainder {})",
                    slot,
                    self.samples_per_period,
                    self.samples_per_period % slot
                ),
            );
        }
        if self.channel_memory > 0 && self.n_cp + 1 < self.channel_memory {
            push(
                "ofdm.n_cp",
                format!(
                    "insufficient cyclic prefix: n_cp = {} but channel memory {} needs {}",
                    self.n_cp,
                    self.channel_memory,
                    self.channel_memory - 1
                ),
            );
        }

        if self.th1 >= self.th2 {
            push(
                "classify.th1",
                format!(
                    "classification thresholds misordered: th1 = {} must be below th2 = {}",
                    self.th1, self.th2
                ),
            );
        }
        if self.phase >= self.noise_phases && self.noise_kind == NoiseKind::Fresh {
            push(
                "classify.phase",
                format!("phase {} outside 0..{}", self.phase, self.noise_phases),
            );
        }
        if self.analysis_n_period == 0 || self.analysis_n_period > self.n_periods {
            push(
                "analysis.n_period",
                format!(
                    "must be in 1..={} (trace periods), got {}",
                    self.n_periods, self.analysis_n_period
                ),
            );
        }

        if !(self.kld_threshold > 0.0) {
            push("gauss.kld_threshold", "must be positive".into());
        }
        if self.n_itr == 0 {
            push("gauss.n_itr", "at least one iteration required".into());
        }
        if self.n_bins < 2 {
            push("gauss.n_bins", "at least two bins required".into());
        }

        if self.snr_grid_db.is_empty() || self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            push(
                "snr.grid_db",
                "grid must be non-empty and strictly ascending".into(),
            );
        }
        if self.modes.is_empty() {
            push("capacity.modes", "at least one mode required".into());
        }
        if let Some(n) = self.whitening_n_period {
            if n == 0 || n > self.n_periods {
                push(
                    "whitening.n_period",
                    format!(
                        "must be in 1..={} (trace periods), got {}",
                        self.n_periods, n
                    ),
                );
            }
        }
        out
    }

    /// Periods used for autocorrelation estimation.
    pub fn whitening_periods(&self) -> usize {
        self.whitening_n_period.unwrap_or(self.analysis_n_period)
    }
}

/// `start:step:stop` (inclusive) or a comma list.
fn parse_grid(value: &str) -> Result<Vec<Real>, String> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err("grid range must be start:step:stop".into());
        }
        let start: Real = parts[0]
            .trim()
            .parse()
            .map_err(|e| format!("bad start: {}", e))?;
        let step: Real = parts[1]
            .trim()
            .parse()
            .map_err(|e| format!("bad step: {}", e))?;
        let stop: Real = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("bad stop: {}", e))?;
        if step <= 0.0 {
            return Err("grid step must be positive".into());
        }
        let mut grid = Vec::new();
        let mut i = 0;
        loop {
            let v = start + step * i as Real;
            if v > stop + 1e-9 {
                break;
            }
            grid.push(v);
            i += 1;
        }
        Ok(grid)
    } else {
        value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| format!("bad grid value: {}", e))
            })
            .collect()
    }
}

fn parse_modes(value: &str) -> Result<Vec<Mode>, String> {
    value
        .split(',')
        .map(|s| match s.trim().to_ascii_lowercase().as_str() {
            "csit" => Ok(Mode::Csit),
            "nocsit" | "no-csit" => Ok(Mode::NoCsit),
            other => Err(format!("unknown mode '{}'", other)),
        })
        .collect()
}

/// `len:tap,tap;len:tap,...`
fn parse_regions(value: &str) -> Result<Vec<(usize, Vec<Real>)>, String> {
    value
        .split(';')
        .map(|region| {
            let (len, taps) = region
                .split_once(':')
                .ok_or_else(|| format!("region '{}' must be len:taps", region))?;
            let len: usize = len
                .trim()
                .parse()
                .map_err(|e| format!("bad region length: {}", e))?;
            let taps: Vec<Real> = taps
                .split(',')
                .map(|t| t.trim().parse().map_err(|e| format!("bad tap: {}", e)))
                .collect::<Result<_, String>>()?;
            Ok((len, taps))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let diags = PipelineConfig::default().validate();
        assert!(diags.is_empty(), "{:?}", diags);
    }

    #[test]
    fn misordered_thresholds_flagged() {
        let mut cfg = PipelineConfig::default();
        cfg.th1 = 1.0;
        cfg.th2 = 0.5;
        let diags = cfg.validate();
        assert!(diags.iter().any(|d| d.message.contains("misordered")));
    }

    #[test]
    fn short_cp_flagged() {
        let mut cfg = PipelineConfig::default();
        cfg.n_cp = 10; // memory 65 needs 64
        let diags = cfg.validate();
        assert!(diags
            .iter()
            .any(|d| d.message.contains("insufficient cyclic prefix")));
    }

    #[test]
    fn all_violations_reported_not_first_only() {
        let mut cfg = PipelineConfig::default();
        cfg.th1 = 1.0;
        cfg.th2 = 0.5;
        cfg.snr_grid_db = vec![];
        cfg.n_bins = 1;
        let diags = cfg.validate();
        assert!(diags.len() >= 3, "{:?}", diags);
    }

    #[test]
    fn parse_round_trip_of_keys() {
        let text = "\
# comment
seed = 7
noise.kind = nassar
noise.regions = 160:1.0;160:0.5,0.25
trace.samples_per_period = 320
trace.n_periods = 8
ofdm.n_fft = 256
ofdm.n_cp = 64
channel.memory = 65
snr.grid_db = 0:10:30
capacity.modes = csit
analysis.n_period = 8
";
        let cfg = PipelineConfig::from_str_src(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.noise_kind, NoiseKind::Nassar);
        assert_eq!(cfg.noise_regions.len(), 2);
        assert_eq!(cfg.noise_regions[1], (160, vec![0.5, 0.25]));
        assert_eq!(cfg.snr_grid_db, vec![0.0, 10.0, 20.0, 30.0]);
        assert_eq!(cfg.modes, vec![Mode::Csit]);
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
    }

    #[test]
    fn unknown_key_is_a_syntax_error() {
        let err = PipelineConfig::from_str_src("bogus.key = 1\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("unknown key"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn comma_grid_parses() {
        let cfg = PipelineConfig::from_str_src("snr.grid_db = 1.5, 3, 9\n").unwrap();
        assert_eq!(cfg.snr_grid_db, vec![1.5, 3.0, 9.0]);
    }
}
