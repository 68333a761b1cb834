use super::NoiseGenError;
use crate::Real;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Multi-phase sampled noise sequence with period metadata. Every phase has
/// exactly `n_periods * samples_per_period` samples.
#[derive(Debug, Clone)]
pub struct NoiseTrace {
    phases: Vec<Vec<Real>>,
    sample_rate_hz: Real,
    samples_per_period: usize,
    n_periods: usize,
}

impl NoiseTrace {
    pub fn new(
        phases: Vec<Vec<Real>>,
        sample_rate_hz: Real,
        samples_per_period: usize,
        n_periods: usize,
    ) -> Result<Self, NoiseGenError> {
        let invalid = |message: String| NoiseGenError::InvalidParameter {
            name: "trace",
            message,
        };
        if phases.is_empty() {
            return Err(invalid("at least one phase required".into()));
        }
        let expected = samples_per_period
            .checked_mul(n_periods)
            .ok_or_else(|| invalid("trace length overflows".into()))?;
        for (i, p) in phases.iter().enumerate() {
            if p.len() != expected {
                return Err(invalid(format!(
                    "phase {} has {} samples, expected {} ({} periods x {})",
                    i,
                    p.len(),
                    expected,
                    n_periods,
                    samples_per_period
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("phase {} contains non-finite samples", i)));
            }
        }
        Ok(NoiseTrace {
            phases,
            sample_rate_hz,
            samples_per_period,
            n_periods,
        })
    }

    /// Samples per period for mains-synchronous noise: the statistics repeat
    /// every half AC cycle, so `rate / (2 * ac_frequency)`.
    pub fn samples_per_period_from_mains(sample_rate_hz: Real, ac_frequency_hz: Real) -> usize {
        (sample_rate_hz / (2.0 * ac_frequency_hz)).round() as usize
    }

    pub fn n_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn phase(&self, r: usize) -> &[Real] {
        &self.phases[r]
    }

    pub fn sample_rate_hz(&self) -> Real {
        self.sample_rate_hz
    }

    pub fn samples_per_period(&self) -> usize {
        self.samples_per_period
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn len_per_phase(&self) -> usize {
        self.samples_per_period * self.n_periods
    }

    /// One period of one phase.
    pub fn period(&self, r: usize, period: usize) -> &[Real] {
        let start = period * self.samples_per_period;
        &self.phases[r][start..start + self.samples_per_period]
    }

    /// Reorders the phase sequences; lengths are unchanged.
    pub fn permute_phases(&self, order: &[usize]) -> Result<NoiseTrace, NoiseGenError> {
        if order.len() != self.n_phases() {
            return Err(NoiseGenError::InvalidParameter {
                name: "order",
                message: "permutation length mismatch".into(),
            });
        }
        let phases = order.iter().map(|&i| self.phases[i].clone()).collect();
        NoiseTrace::new(
            phases,
            self.sample_rate_hz,
            self.samples_per_period,
            self.n_periods,
        )
    }
}

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Writes `phase,index,value` rows plus a `.meta` sidecar with the trace
/// metadata as key=value lines.
pub fn write_trace_csv(trace: &NoiseTrace, path: &Path) -> Result<(), NoiseGenError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "phase,index,value")?;
    for (p, samples) in trace.phases.iter().enumerate() {
        for (i, v) in samples.iter().enumerate() {
            writeln!(w, "{},{},{}", p + 1, i, v)?;
        }
    }
    w.flush()?;

    let mut m = BufWriter::new(std::fs::File::create(meta_path(path))?);
    writeln!(m, "sample_rate_hz={}", trace.sample_rate_hz)?;
    writeln!(m, "samples_per_period={}", trace.samples_per_period)?;
    writeln!(m, "n_periods={}", trace.n_periods)?;
    writeln!(m, "n_phases={}", trace.n_phases())?;
    m.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<NoiseTrace, NoiseGenError> {
    let meta = std::fs::read_to_string(meta_path(path))?;
    let mut sample_rate_hz: Option<Real> = None;
    let mut samples_per_period: Option<usize> = None;
    let mut n_periods: Option<usize> = None;
    let mut n_phases: Option<usize> = None;
    for (idx, line) in meta.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| NoiseGenError::Parse {
            line: idx + 1,
            message: format!("metadata line without '=': {}", line),
        })?;
        let bad = |e: String| NoiseGenError::Parse {
            line: idx + 1,
            message: e,
        };
        match key.trim() {
            "sample_rate_hz" => {
                sample_rate_hz = Some(value.trim().parse().map_err(|e| bad(format!("{}", e)))?)
            }
            "samples_per_period" => {
                samples_per_period = Some(value.trim().parse().map_err(|e| bad(format!("{}", e)))?)
            }
            "n_periods" => {
                n_periods = Some(value.trim().parse().map_err(|e| bad(format!("{}", e)))?)
            }
            "n_phases" => n_phases = Some(value.trim().parse().map_err(|e| bad(format!("{}", e)))?),
            other => {
                return Err(bad(format!("unknown metadata key '{}'", other)));
            }
        }
    }
    let missing = |what: &str| NoiseGenError::Parse {
        line: 0,
        message: format!("metadata missing {}", what),
    };
    let sample_rate_hz = sample_rate_hz.ok_or_else(|| missing("sample_rate_hz"))?;
    let samples_per_period = samples_per_period.ok_or_else(|| missing("samples_per_period"))?;
    let n_periods = n_periods.ok_or_else(|| missing("n_periods"))?;
    let n_phases = n_phases.ok_or_else(|| missing("n_phases"))?;

    let expected = samples_per_period * n_periods;
    let mut phases = vec![Vec::with_capacity(expected); n_phases];
    let reader = BufReader::new(std::fs::File::open(path)?);
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut it = line.split(',');
        let phase: usize = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| NoiseGenError::Parse {
                line: lineno,
                message: "bad phase".into(),
            })?;
        let index: usize = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| NoiseGenError::Parse {
                line: lineno,
                message: "bad index".into(),
            })?;
        let value: Real = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| NoiseGenError::Parse {
                line: lineno,
                message: "bad value".into(),
            })?;
        if phase == 0 || phase > n_phases {
            return Err(NoiseGenError::Parse {
                line: lineno,
                message: format!("phase {} outside 1..={}", phase, n_phases),
            });
        }
        let seq = &mut phases[phase - 1];
        if index != seq.len() {
            return Err(NoiseGenError::Parse {
                line: lineno,
                message: format!(
                    "phase {} index {} out of order (expected {})",
                    phase,
                    index,
                    seq.len()
                ),
            });
        }
        seq.push(value);
    }
    NoiseTrace::new(phases, sample_rate_hz, samples_per_period, n_periods)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mains_metadata_gives_half_cycle_period() {
        assert_eq!(NoiseTrace::samples_per_period_from_mains(400e3, 62.5), 3200);
    }

    #[test]
    fn shape_validation() {
        let bad = NoiseTrace::new(vec![vec![0.0; 10]], 1.0, 4, 3);
        assert!(bad.is_err());
        let good = NoiseTrace::new(vec![vec![0.0; 12]], 1.0, 4, 3);
        assert!(good.is_ok());
    }

    #[test]
    fn csv_round_trip_preserves_samples() {
        let phases = vec![
            (0..24).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>(),
            (0..24).map(|i| (i as f64 * 0.11).cos()).collect::<Vec<_>>(),
        ];
        let trace = NoiseTrace::new(phases, 400e3, 8, 3).unwrap();
        let dir = std::env::temp_dir().join("plc_lab_trace_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trace.csv");
        write_trace_csv(&trace, &path).unwrap();
        let copy = read_trace_csv(&path).unwrap();
        assert_eq!(copy.n_phases(), 2);
        assert_eq!(copy.samples_per_period(), 8);
        assert_eq!(copy.n_periods(), 3);
        assert_eq!(copy.sample_rate_hz(), 400e3);
        for r in 0..2 {
            assert_eq!(trace.phase(r), copy.phase(r));
        }
    }
}
