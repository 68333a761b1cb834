use super::{
    capacity_equal_power_from_eigs, channel_eigenvalues, per_class_report, waterfill, CapacityError,
};
use crate::analysis::{NoiseClass, PortionPartition, SlotClassification};
use crate::channel::{build_conv_matrix, ConvKind, MimoChannel};
use crate::noisegen::NoiseTrace;
use crate::whitening::{composite_channel, estimate_autocorr, make_whitener};
use crate::Real;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Waterfilling over eigenchannels.
    Csit,
    /// Equal power per time instant.
    NoCsit,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Csit => "csit",
            Mode::NoCsit => "nocsit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Portion,
    Slot,
    Class,
    Average,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Portion => "portion",
            Scope::Slot => "slot",
            Scope::Class => "class",
            Scope::Average => "average",
        }
    }
}

/// One line of the capacity report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub snr_db: Real,
    pub mode: Mode,
    pub domain: &'static str,
    pub scope: Scope,
    /// 1-based portion/slot/class id; 0 for the overall average.
    pub scope_id: usize,
    pub capacity_bits: Real,
    pub capacity_bits_per_sec: Real,
}

/// One waterfilling allocation entry.
#[derive(Debug, Clone)]
pub struct AllocationRow {
    pub snr_db: Real,
    pub portion: usize,
    pub eig_index: usize,
    pub eigenvalue: Real,
    pub power: Real,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub snr_grid_db: Vec<Real>,
    pub modes: Vec<Mode>,
    pub n_period: usize,
}

#[derive(Debug, Clone)]
pub struct SnrSweepOutput {
    pub rows: Vec<ReportRow>,
    pub allocations: Vec<AllocationRow>,
    /// Noise variance averaged over the full period (all phases).
    pub avg_noise_variance: Real,
    /// Mean channel power gain used by the SNR calibration.
    pub channel_gain: Real,
    /// Human-readable statement of the SNR calibration convention.
    pub calibration_note: String,
    /// Portions whose correlation estimate needed diagonal loading.
    pub loaded_portions: Vec<usize>,
}

/// Average received SNR convention: per-instant transmit power is set so
/// that (mean received signal power per sample) / (noise variance averaged
/// over the full period) equals the grid value. Per-slot SNRs then follow
/// from the per-slot noise variance through the whitener.
fn eps_for_snr(snr_db: Real, avg_noise_variance: Real, channel_gain: Real) -> Real {
    let lin = 10f64.powf(snr_db / 10.0);
    lin * avg_noise_variance / channel_gain
}

/// SNR-independent description of one portion: the eigenvalues of the
/// whitened composite channel.
#[derive(Debug, Clone)]
pub struct PortionSpectrum {
    pub eigenvalues: Vec<Real>,
    pub loaded: bool,
}

/// Per-portion whitened-channel spectra: estimate the noise autocorrelation
/// of each portion, factor it, whiten the circulant channel and
/// eigendecompose `H H†`. Portions run in parallel; the output order is
/// fixed by index so results are deterministic.
pub fn portion_spectra(
    trace: &NoiseTrace,
    chan: &MimoChannel,
    partition: &PortionPartition,
    n_period: usize,
) -> Result<Vec<PortionSpectrum>, CapacityError> {
    if partition.n_cp() + 1 < chan.memory() {
        return Err(CapacityError::Channel(
            crate::channel::ChannelError::InsufficientCp {
                n_cp: partition.n_cp(),
                required: chan.memory() - 1,
            },
        ));
    }
    if trace.n_phases() != chan.m_r() {
        return Err(CapacityError::InvalidParameter {
            name: "trace",
            message: format!(
                "{} noise phases for {} receivers",
                trace.n_phases(),
                chan.m_r()
            ),
        });
    }
    let circulant =
        build_conv_matrix(chan, ConvKind::Circulant, partition.n_p(), partition.n_cp())?;
    (0..partition.portions_per_period())
        .into_par_iter()
        .map(|portion| -> Result<PortionSpectrum, CapacityError> {
            let corr = estimate_autocorr(trace, partition, portion, n_period)?;
            let whitener = make_whitener(&corr)?;
            let composite = composite_channel(&whitener, &circulant)?;
            let eigenvalues = channel_eigenvalues(&composite)?;
            Ok(PortionSpectrum {
                eigenvalues,
                loaded: whitener.loaded,
            })
        })
        .collect()
}

/// Calibration constants the sweep works from.
#[derive(Debug, Clone, Copy)]
pub struct SweepCalibration {
    /// Noise variance averaged over the full period (all phases).
    pub avg_noise_variance: Real,
    /// Mean channel power gain.
    pub channel_gain: Real,
    /// Transmit stream count (power budget scaling).
    pub m_t: usize,
    pub sample_rate_hz: Real,
}

impl SweepCalibration {
    pub fn measure(trace: &NoiseTrace, chan: &MimoChannel) -> Self {
        SweepCalibration {
            avg_noise_variance: full_period_variance(trace),
            channel_gain: chan.mean_power_gain(),
            m_t: chan.m_t(),
            sample_rate_hz: trace.sample_rate_hz(),
        }
    }
}

/// Full sweep on a trace and channel; see [`sweep_from_spectra`].
pub fn snr_sweep(
    trace: &NoiseTrace,
    chan: &MimoChannel,
    partition: &PortionPartition,
    classification: &SlotClassification,
    cfg: &SweepConfig,
) -> Result<SnrSweepOutput, CapacityError> {
    let spectra = portion_spectra(trace, chan, partition, cfg.n_period)?;
    let calib = SweepCalibration::measure(trace, chan);
    sweep_from_spectra(&spectra, partition, classification, &calib, cfg)
}

/// Evaluates every SNR grid point on precomputed portion spectra in the
/// requested power modes and aggregates per portion, slot, class and
/// overall average.
pub fn sweep_from_spectra(
    spectra: &[PortionSpectrum],
    partition: &PortionPartition,
    classification: &SlotClassification,
    calib: &SweepCalibration,
    cfg: &SweepConfig,
) -> Result<SnrSweepOutput, CapacityError> {
    if cfg.snr_grid_db.is_empty() || cfg.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CapacityError::BadSnrGrid);
    }
    if cfg.modes.is_empty() {
        return Err(CapacityError::InvalidParameter {
            name: "modes",
            message: "at least one mode required".into(),
        });
    }
    if classification.n_slots() != partition.n_s() {
        return Err(CapacityError::SlotCountMismatch {
            slots: partition.n_s(),
            labels: classification.n_slots(),
        });
    }
    if spectra.len() != partition.portions_per_period() {
        return Err(CapacityError::InvalidParameter {
            name: "spectra",
            message: format!(
                "{} spectra for {} portions",
                spectra.len(),
                partition.portions_per_period()
            ),
        });
    }
    let avg_noise_variance = calib.avg_noise_variance;
    if !(avg_noise_variance > 0.0) {
        return Err(CapacityError::InvalidParameter {
            name: "trace",
            message: "zero noise variance".into(),
        });
    }
    let channel_gain = calib.channel_gain;
    let n_portions = spectra.len();

    let loaded_portions: Vec<usize> = spectra
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.loaded.then_some(i))
        .collect();

    let samples_per_portion = (partition.n_p() + partition.n_cp()) as Real;
    let portion_rate = calib.sample_rate_hz / samples_per_portion;
    let slot_rate = calib.sample_rate_hz / (samples_per_portion * partition.division() as Real);
    let p_budget_scale = calib.m_t as Real * samples_per_portion;

    let mut rows = Vec::new();
    let mut allocations = Vec::new();
    for &snr_db in &cfg.snr_grid_db {
        let eps = eps_for_snr(snr_db, avg_noise_variance, channel_gain);
        for &mode in &cfg.modes {
            let mut per_portion = Vec::with_capacity(n_portions);
            for (portion, spectrum) in spectra.iter().enumerate() {
                let bits = match mode {
                    Mode::NoCsit => capacity_equal_power_from_eigs(&spectrum.eigenvalues, eps),
                    Mode::Csit => {
                        let p_total = eps * p_budget_scale;
                        let (budget, bits) = waterfill(&spectrum.eigenvalues, p_total)?;
                        for (i, (&d, &p)) in spectrum
                            .eigenvalues
                            .iter()
                            .zip(&budget.allocations)
                            .enumerate()
                        {
                            allocations.push(AllocationRow {
                                snr_db,
                                portion: portion + 1,
                                eig_index: i + 1,
                                eigenvalue: d,
                                power: p,
                            });
                        }
                        bits
                    }
                };
                per_portion.push(bits);
                rows.push(ReportRow {
                    snr_db,
                    mode,
                    domain: "time",
                    scope: Scope::Portion,
                    scope_id: portion + 1,
                    capacity_bits: bits,
                    capacity_bits_per_sec: bits * portion_rate,
                });
            }

            let per_slot: Vec<Real> = (0..partition.n_s())
                .map(|slot| {
                    (0..partition.division())
                        .map(|j| per_portion[slot * partition.division() + j])
                        .sum()
                })
                .collect();
            for (slot, &bits) in per_slot.iter().enumerate() {
                rows.push(ReportRow {
                    snr_db,
                    mode,
                    domain: "time",
                    scope: Scope::Slot,
                    scope_id: slot + 1,
                    capacity_bits: bits,
                    capacity_bits_per_sec: bits * slot_rate,
                });
            }

            let class_report = per_class_report(&per_slot, classification)?;
            for (idx, class) in NoiseClass::all().into_iter().enumerate() {
                if let Some(mean) = class_report.class_means[idx] {
                    rows.push(ReportRow {
                        snr_db,
                        mode,
                        domain: "time",
                        scope: Scope::Class,
                        scope_id: class.index() as usize,
                        capacity_bits: mean,
                        capacity_bits_per_sec: mean * slot_rate,
                    });
                }
            }
            rows.push(ReportRow {
                snr_db,
                mode,
                domain: "time",
                scope: Scope::Average,
                scope_id: 0,
                capacity_bits: class_report.overall,
                capacity_bits_per_sec: class_report.overall * slot_rate,
            });
        }
    }

    Ok(SnrSweepOutput {
        rows,
        allocations,
        avg_noise_variance,
        channel_gain,
        calibration_note: format!(
            "average SNR convention: per-instant transmit power eps = snr_lin * sigma_avg^2 / gain, \
             with sigma_avg^2 = {} the noise variance averaged over the full period and gain = {} \
             the mean channel power gain; the per-portion budget is eps * M_t * (N_p + N_cp)",
            avg_noise_variance, channel_gain
        ),
        loaded_portions,
    })
}

/// Noise variance pooled over every phase and sample of the trace.
fn full_period_variance(trace: &NoiseTrace) -> Real {
    let mut mean = 0.0;
    let mut count = 0usize;
    for r in 0..trace.n_phases() {
        for &v in trace.phase(r) {
            mean += v;
            count += 1;
        }
    }
    mean /= count as Real;
    let mut var = 0.0;
    for r in 0..trace.n_phases() {
        for &v in trace.phase(r) {
            var += (v - mean) * (v - mean);
        }
    }
    var / count as Real
}
