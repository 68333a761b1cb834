//! Trace analysis: period/slot/portion slicing, variance-based slot
//! classification, empirical histograms, the Kullback-Leibler Gaussianity
//! statistic and the portion-length search.

mod gaussianity;
mod histogram;

pub use gaussianity::{
    gaussianity_search, portion_stats, write_gaussianity_csv, GaussianityParams, GaussianityResult,
    PortionKld, PortionPartition,
};
pub use histogram::{histogram, kld_vs_gaussian, EmpiricalPdf};

use crate::noisegen::NoiseTrace;
use crate::Real;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("{n_fft}+{n_cp} samples per slot do not divide {samples_per_period} samples per period (remainder {remainder})")]
    SlotsNotDivisible {
        n_fft: usize,
        n_cp: usize,
        samples_per_period: usize,
        remainder: usize,
    },
    #[error("classification thresholds misordered: th1 = {th1} must be below th2 = {th2}")]
    ThresholdsMisordered { th1: Real, th2: Real },
    #[error("requested {requested} periods but trace has {available}")]
    NotEnoughPeriods { requested: usize, available: usize },
    #[error("phase index {phase} out of range ({n_phases} phases)")]
    PhaseOutOfRange { phase: usize, n_phases: usize },
    #[error("portion index {index} out of range ({count} portions per period)")]
    PortionOutOfRange { index: usize, count: usize },
    #[error("zero-width support: samples carry fewer than two distinct values")]
    ZeroWidthSupport,
    #[error("histogram needs at least two bins, got {0}")]
    TooFewBins(usize),
    #[error("fitted variance must be positive, got {0}")]
    NonPositiveVariance(Real),
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("division factor {a} is not an admissible power of two (max {max})")]
    BadDivisionFactor { a: usize, max: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Slot layout of a trace: `n_s` contiguous slots of `n_fft + n_cp` samples
/// per period.
#[derive(Debug, Clone, Copy)]
pub struct SlotGrid {
    pub n_s: usize,
    pub n_fft: usize,
    pub n_cp: usize,
}

impl SlotGrid {
    pub fn slot_len(&self) -> usize {
        self.n_fft + self.n_cp
    }

    /// Sample range of a slot inside one period.
    pub fn slot_range(&self, slot: usize) -> std::ops::Range<usize> {
        let start = slot * self.slot_len();
        start..start + self.slot_len()
    }
}

/// Divides each period into slots of one OFDM-symbol length, erroring when
/// the slot length does not divide the period.
pub fn slice_slots(
    trace: &NoiseTrace,
    n_fft: usize,
    n_cp: usize,
) -> Result<SlotGrid, AnalysisError> {
    slice_slots_len(trace.samples_per_period(), n_fft, n_cp)
}

pub fn slice_slots_len(
    samples_per_period: usize,
    n_fft: usize,
    n_cp: usize,
) -> Result<SlotGrid, AnalysisError> {
    let slot_len = n_fft + n_cp;
    if slot_len == 0 {
        return Err(AnalysisError::InvalidParameter {
            name: "n_fft",
            message: "slot length must be positive".into(),
        });
    }
    let remainder = samples_per_period % slot_len;
    if remainder != 0 {
        return Err(AnalysisError::SlotsNotDivisible {
            n_fft,
            n_cp,
            samples_per_period,
            remainder,
        });
    }
    Ok(SlotGrid {
        n_s: samples_per_period / slot_len,
        n_fft,
        n_cp,
    })
}

/// Cyclostationary noise classes by increasing impulsiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseClass {
    Gaussian,
    ModerateImpulsive,
    StrongImpulsive,
}

impl NoiseClass {
    pub fn index(self) -> u8 {
        match self {
            NoiseClass::Gaussian => 1,
            NoiseClass::ModerateImpulsive => 2,
            NoiseClass::StrongImpulsive => 3,
        }
    }

    pub fn all() -> [NoiseClass; 3] {
        [
            NoiseClass::Gaussian,
            NoiseClass::ModerateImpulsive,
            NoiseClass::StrongImpulsive,
        ]
    }

    pub fn from_index(index: u8) -> Option<NoiseClass> {
        match index {
            1 => Some(NoiseClass::Gaussian),
            2 => Some(NoiseClass::ModerateImpulsive),
            3 => Some(NoiseClass::StrongImpulsive),
            _ => None,
        }
    }
}

/// Per-slot-position classification: sigma is the per-position standard
/// deviation averaged across periods, sigma_min the minimum over every slot
/// instance, and labels follow the two-threshold split of the deviation
/// `D^s = sigma^s - sigma_min`.
#[derive(Debug, Clone)]
pub struct SlotClassification {
    pub labels: Vec<NoiseClass>,
    pub sigma: Vec<Real>,
    pub deviation: Vec<Real>,
    pub sigma_min: Real,
    pub th1: Real,
    pub th2: Real,
}

impl SlotClassification {
    pub fn n_slots(&self) -> usize {
        self.labels.len()
    }

    /// Slot positions belonging to a class.
    pub fn members(&self, class: NoiseClass) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(s, &c)| (c == class).then_some(s))
            .collect()
    }
}

fn population_std(samples: &[Real]) -> Real {
    let n = samples.len() as Real;
    let mean = samples.iter().sum::<Real>() / n;
    (samples
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<Real>()
        / n)
        .sqrt()
}

/// Variance-based slot classification. The standard deviation of every slot
/// instance over `n_period` periods feeds two statistics: the global minimum
/// `sigma_min`, and the per-position average `sigma^s`, whose offset from
/// the minimum is split three ways by the thresholds.
pub fn classify_slots(
    trace: &NoiseTrace,
    phase: usize,
    n_fft: usize,
    n_cp: usize,
    th1: Real,
    th2: Real,
    n_period: usize,
) -> Result<SlotClassification, AnalysisError> {
    if th1 >= th2 {
        return Err(AnalysisError::ThresholdsMisordered { th1, th2 });
    }
    if phase >= trace.n_phases() {
        return Err(AnalysisError::PhaseOutOfRange {
            phase,
            n_phases: trace.n_phases(),
        });
    }
    if n_period == 0 || n_period > trace.n_periods() {
        return Err(AnalysisError::NotEnoughPeriods {
            requested: n_period,
            available: trace.n_periods(),
        });
    }
    let grid = slice_slots(trace, n_fft, n_cp)?;

    let mut sigma = vec![0.0; grid.n_s];
    let mut sigma_min = Real::INFINITY;
    for period in 0..n_period {
        let p = trace.period(phase, period);
        for s in 0..grid.n_s {
            let inst = population_std(&p[grid.slot_range(s)]);
            sigma[s] += inst;
            sigma_min = sigma_min.min(inst);
        }
    }
    for v in &mut sigma {
        *v /= n_period as Real;
    }

    let deviation: Vec<Real> = sigma.iter().map(|&s| s - sigma_min).collect();
    let labels = deviation
        .iter()
        .map(|&d| {
            if d <= th1 {
                NoiseClass::Gaussian
            } else if d <= th2 {
                NoiseClass::ModerateImpulsive
            } else {
                NoiseClass::StrongImpulsive
            }
        })
        .collect();

    Ok(SlotClassification {
        labels,
        sigma,
        deviation,
        sigma_min,
        th1,
        th2,
    })
}

/// Writes `slot,sigma,D,class` rows (slots 1-based).
pub fn write_classification_csv(
    classification: &SlotClassification,
    path: &Path,
) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "slot,sigma,D,class")?;
    for s in 0..classification.n_slots() {
        writeln!(
            w,
            "{},{},{},{}",
            s + 1,
            classification.sigma[s],
            classification.deviation[s],
            classification.labels[s].index()
        )?;
    }
    w.flush()?;
    Ok(())
}
