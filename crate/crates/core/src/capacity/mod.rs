//! Capacity lower bounds per temporal portion: equal-power (no transmitter
//! knowledge), waterfilling over eigenchannels (with transmitter knowledge),
//! the frequency-domain forms, and per-slot/per-class aggregation over an
//! SNR grid.

mod sweep;
mod waterfill;

pub use sweep::{
    portion_spectra, snr_sweep, sweep_from_spectra, AllocationRow, Mode, PortionSpectrum,
    ReportRow, Scope, SnrSweepOutput, SweepCalibration, SweepConfig,
};
pub use waterfill::{waterfill, PowerBudget};

use crate::analysis::{AnalysisError, NoiseClass, SlotClassification};
use crate::channel::{block_dft_matrix, ChannelError};
use crate::numerics::{eigvals_hermitian, NumericsError};
use crate::whitening::WhiteningError;
use crate::{Mat, Real};

/// Eigenvalues below this fraction of the largest are treated as zero rank.
pub const RANK_CUTOFF_REL: Real = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CapacityError {
    #[error("zero-rank channel: no positive eigenvalues")]
    ZeroRankChannel,
    #[error("total power must be positive, got {0}")]
    NonPositivePower(Real),
    #[error("SNR grid must be non-empty and ascending")]
    BadSnrGrid,
    #[error("slot count {slots} does not match classification size {labels}")]
    SlotCountMismatch { slots: usize, labels: usize },
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Whitening(#[from] WhiteningError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Eigenvalues of `H H†` above the rank cutoff, descending.
pub fn channel_eigenvalues(h: &Mat) -> Result<Vec<Real>, CapacityError> {
    let gram = h.mul_self_hermitian();
    let eigs = eigvals_hermitian(&gram)?;
    Ok(retain_rank(&eigs))
}

/// Drops eigenvalues below `RANK_CUTOFF_REL` times the largest (and any
/// negative rounding residue).
pub fn retain_rank(eigs: &[Real]) -> Vec<Real> {
    let max = eigs.iter().fold(0.0f64, |a, &b| a.max(b));
    if max <= 0.0 {
        return Vec::new();
    }
    eigs.iter()
        .copied()
        .filter(|&v| v > RANK_CUTOFF_REL * max)
        .collect()
}

/// Equal-power capacity in bits per portion:
/// `sum_i log2(1 + eps delta_i)` over the eigenvalues of `H H†`.
pub fn capacity_equal_power(h: &Mat, eps: Real) -> Result<Real, CapacityError> {
    if eps < 0.0 {
        return Err(CapacityError::NonPositivePower(eps));
    }
    let eigs = channel_eigenvalues(h)?;
    Ok(capacity_equal_power_from_eigs(&eigs, eps))
}

pub fn capacity_equal_power_from_eigs(eigs: &[Real], eps: Real) -> Real {
    eigs.iter().map(|&d| (1.0 + eps * d).log2()).sum()
}

/// Frequency-domain capacity without whitening:
/// `sum_k log2 |I + eps H_k H_k†|` over the per-subcarrier matrices. The
/// determinants go through the Cholesky log-det, an algebraic route
/// independent of the eigenvalue form.
pub fn capacity_freq_nowhiten(spectra: &[Mat], eps: Real) -> Result<Real, CapacityError> {
    if eps < 0.0 {
        return Err(CapacityError::NonPositivePower(eps));
    }
    let ln2 = std::f64::consts::LN_2;
    let mut bits = 0.0;
    for h_k in spectra {
        let mut m = h_k.mul_self_hermitian().scale(eps);
        for i in 0..m.rows() {
            m[(i, i)] += crate::Cplx::new(1.0, 0.0);
        }
        bits += crate::numerics::logdet_psd(&m.symmetrize())? / ln2;
    }
    Ok(bits)
}

/// Capacity computed after applying the block-unitary DFT to the composite
/// channel: `log2 |I + eps (F H)(F H)†|`. Unitary invariance makes this
/// equal to the time-domain value on the same matrix.
pub fn capacity_postwhiten_fft(h: &Mat, phases: usize, eps: Real) -> Result<Real, CapacityError> {
    if h.rows() % phases != 0 {
        return Err(CapacityError::InvalidParameter {
            name: "phases",
            message: format!("{} rows not divisible by {} phases", h.rows(), phases),
        });
    }
    let f = block_dft_matrix(h.rows() / phases, phases);
    capacity_equal_power(&f.mul(h), eps)
}

/// Per-class aggregation of per-slot capacities.
#[derive(Debug, Clone)]
pub struct PerClassCapacity {
    /// Mean capacity per class, `None` when the class has no member slots.
    pub class_means: [Option<Real>; 3],
    /// Mean over all slots.
    pub overall: Real,
    /// One note per empty class.
    pub notes: Vec<String>,
}

/// Arithmetic mean of the member slots of each class, plus the overall
/// average. Empty classes are omitted with a note.
pub fn per_class_report(
    per_slot: &[Real],
    classification: &SlotClassification,
) -> Result<PerClassCapacity, CapacityError> {
    if per_slot.len() != classification.n_slots() {
        return Err(CapacityError::SlotCountMismatch {
            slots: per_slot.len(),
            labels: classification.n_slots(),
        });
    }
    let mut class_means = [None; 3];
    let mut notes = Vec::new();
    for (idx, class) in NoiseClass::all().into_iter().enumerate() {
        let members = classification.members(class);
        if members.is_empty() {
            notes.push(format!("class {} has no member slots", class.index()));
            continue;
        }
        let mean = members.iter().map(|&s| per_slot[s]).sum::<Real>() / members.len() as Real;
        class_means[idx] = Some(mean);
    }
    let overall = per_slot.iter().sum::<Real>() / per_slot.len().max(1) as Real;
    Ok(PerClassCapacity {
        class_means,
        overall,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify_slots, NoiseClass};
    use crate::channel::{
        build_conv_matrix, fft_diagonalize, synth_channel, ConvKind, MimoChannel,
    };
    use crate::noisegen::NoiseTrace;
    use crate::Cplx;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    #[test]
    fn zero_power_means_zero_bits() {
        let h = Mat::identity(3);
        assert_eq!(capacity_equal_power(&h, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn scalar_channel_log_form() {
        // C = log2(1 + eps |h|^2); h = 1, eps = 3 -> 2 bits
        let h = Mat::identity(1);
        let bits = capacity_equal_power(&h, 3.0).unwrap();
        assert!((bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_eigenchannel_determinant() {
        // H H† = diag(4, 1), eps = 1: |I + diag(4,1)| = 10 -> log2(10)
        let h = Mat::from_diag(&[2.0, 1.0]);
        let bits = capacity_equal_power(&h, 1.0).unwrap();
        assert!((bits - 10f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_power() {
        let h = Mat::from_fn(3, 3, |r, t| c((r + t) as f64 * 0.3 + 1.0, 0.2 * r as f64));
        let mut prev = -1.0;
        for i in 0..50 {
            let eps = i as f64 * 0.2;
            let bits = capacity_equal_power(&h, eps).unwrap();
            assert!(bits >= prev);
            prev = bits;
        }
    }

    #[test]
    fn freq_capacity_identity_channel() {
        let chan = MimoChannel::siso(&[c(1.0, 0.0)]).unwrap();
        let circ = build_conv_matrix(&chan, ConvKind::Circulant, 4, 0).unwrap();
        let spectra = fft_diagonalize(&circ).unwrap();
        let bits = capacity_freq_nowhiten(&spectra, 1.0).unwrap();
        assert!((bits - 4.0).abs() < 1e-12);
    }

    #[test]
    fn freq_capacity_two_tap_hand_value() {
        // |H_k|^2 = {4, 2, 0, 2}: log2(5) + log2(3) + 0 + log2(3) = log2(45)
        let chan = MimoChannel::siso(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let circ = build_conv_matrix(&chan, ConvKind::Circulant, 4, 1).unwrap();
        let spectra = fft_diagonalize(&circ).unwrap();
        let bits = capacity_freq_nowhiten(&spectra, 1.0).unwrap();
        assert!((bits - 45f64.log2()).abs() < 1e-10, "bits = {}", bits);
    }

    #[test]
    fn freq_equals_time_on_random_mimo() {
        for seed in [3u64, 4, 5] {
            let chan = synth_channel(seed, 2, 2, 3, 0.8).unwrap();
            let circ = build_conv_matrix(&chan, ConvKind::Circulant, 8, 2).unwrap();
            let spectra = fft_diagonalize(&circ).unwrap();
            let eps = 0.7;
            let freq = capacity_freq_nowhiten(&spectra, eps).unwrap();
            let time = capacity_equal_power(&circ.matrix, eps).unwrap();
            assert!(
                (freq - time).abs() <= 1e-8 * time.max(1.0),
                "{} vs {}",
                freq,
                time
            );
        }
    }

    #[test]
    fn post_fft_equals_time_domain() {
        let chan = synth_channel(9, 2, 2, 3, 0.8).unwrap();
        let circ = build_conv_matrix(&chan, ConvKind::Circulant, 8, 2).unwrap();
        // any square matrix with the right blocking works; use a skewed one
        let skew = circ.matrix.scale(0.5).add(&Mat::identity(16).scale(0.25));
        let eps = 1.3;
        let a = capacity_postwhiten_fft(&skew, 2, eps).unwrap();
        let b = capacity_equal_power(&skew, eps).unwrap();
        assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn post_fft_on_circulant_matches_freq_form() {
        let chan = synth_channel(11, 1, 1, 2, 0.9).unwrap();
        let circ = build_conv_matrix(&chan, ConvKind::Circulant, 8, 1).unwrap();
        let spectra = fft_diagonalize(&circ).unwrap();
        let eps = 0.9;
        let a = capacity_postwhiten_fft(&circ.matrix, 1, eps).unwrap();
        let b = capacity_freq_nowhiten(&spectra, eps).unwrap();
        assert!((a - b).abs() <= 1e-8 * b.max(1.0));
    }

    #[test]
    fn diagonal_whitener_scalar_reduction() {
        // SISO flat channel h = 1 whitened by diag(1/sigma):
        // C = N_p log2(1 + eps / sigma^2)
        let n_p = 4;
        let sigma = 3.0;
        let h_hat = Mat::identity(n_p).scale(1.0 / sigma);
        let eps = 2.0;
        let bits = capacity_postwhiten_fft(&h_hat, 1, eps).unwrap();
        let expect = n_p as f64 * (1.0 + eps / (sigma * sigma)).log2();
        assert!((bits - expect).abs() < 1e-10);
    }

    fn tiered_classification() -> SlotClassification {
        let mut phase = Vec::new();
        let sigmas = [1.0f64, 1.0, 3.0, 9.0];
        for _ in 0..4 {
            for &s in &sigmas {
                for i in 0..8 {
                    phase.push(if i % 2 == 0 { s } else { -s });
                }
            }
        }
        let trace = NoiseTrace::new(vec![phase], 1.0, 32, 4).unwrap();
        classify_slots(&trace, 0, 6, 2, 1.0, 5.0, 4).unwrap()
    }

    #[test]
    fn per_class_means() {
        let cls = tiered_classification();
        assert_eq!(
            cls.labels,
            vec![
                NoiseClass::Gaussian,
                NoiseClass::Gaussian,
                NoiseClass::ModerateImpulsive,
                NoiseClass::StrongImpulsive
            ]
        );
        let report = per_class_report(&[1.0, 2.0, 3.0, 4.0], &cls).unwrap();
        assert_eq!(report.class_means[0], Some(1.5));
        assert_eq!(report.class_means[1], Some(3.0));
        assert_eq!(report.class_means[2], Some(4.0));
        assert!((report.overall - 2.5).abs() < 1e-15);
        assert!(report.notes.is_empty());

        let flat = per_class_report(&[2.0, 2.0, 2.0, 2.0], &cls).unwrap();
        for mean in flat.class_means.iter().flatten() {
            assert_eq!(*mean, 2.0);
        }
    }

    #[test]
    fn empty_class_is_noted() {
        let mut cls = tiered_classification();
        // relabel the strong-impulsive slot away
        cls.labels[3] = NoiseClass::Gaussian;
        let report = per_class_report(&[1.0, 2.0, 3.0, 4.0], &cls).unwrap();
        assert_eq!(report.class_means[2], None);
        assert_eq!(report.notes.len(), 1);
    }

    #[test]
    fn slot_count_mismatch_rejected() {
        let cls = tiered_classification();
        assert!(matches!(
            per_class_report(&[1.0], &cls),
            Err(CapacityError::SlotCountMismatch { .. })
        ));
    }
}
