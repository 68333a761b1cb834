//! Cyclostationary noise synthesis.
//!
//! Three generators are provided: a SISO frequency-shift (FRESH) filter
//! bank, its MIMO generalization with cross filters coupling the phases, and
//! a sequential-LTI model that switches filters region by region inside each
//! period. All of them are driven by seedable white Gaussian excitation and
//! are deterministic functions of (seed, parameters).

mod bank;
mod nassar;
mod trace;

pub use bank::{read_bank_csv, synth_filter_bank, write_bank_csv, FreshFilterBank};
pub use nassar::{nassar_generate, NassarModel, NassarRegion, RegionStatePolicy};
pub use trace::{read_trace_csv, write_trace_csv, NoiseTrace};

use crate::{Cplx, Real};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, thiserror::Error)]
pub enum NoiseGenError {
    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(Real),
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("excitation stream count {got} does not match bank phase count {expected}")]
    StreamCountMismatch { expected: usize, got: usize },
    #[error("excitation length {len} shorter than filter length {min}")]
    ExcitationTooShort { len: usize, min: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Deterministic seed derivation for sub-streams (splitmix64 mix).
pub fn mix_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// White Gaussian excitation: i.i.d. zero-mean samples with the given
/// variance, deterministic for a fixed seed.
pub fn gen_awgn(seed: u64, n: usize, variance: Real) -> Result<Vec<Real>, NoiseGenError> {
    if variance < 0.0 {
        return Err(NoiseGenError::NegativeVariance(variance));
    }
    if variance == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let normal = Normal::new(0.0, variance.sqrt()).expect("finite std dev");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// SISO FRESH filtering: each branch k filters the input shifted by the
/// cyclic frequency k/K with an LTI filter, and the branch outputs sum.
/// Samples before index 0 are taken as zero, so the output has the length
/// of the input.
pub fn fresh_siso(bank: &FreshFilterBank, w: &[Cplx]) -> Result<Vec<Cplx>, NoiseGenError> {
    if bank.phases() != 1 {
        return Err(NoiseGenError::InvalidParameter {
            name: "bank",
            message: format!(
                "fresh_siso needs a single-phase bank, got {}",
                bank.phases()
            ),
        });
    }
    let out = fresh_mimo(bank, std::slice::from_ref(&w.to_vec()))?;
    Ok(out.into_iter().next().unwrap())
}

/// MIMO FRESH filtering. Output phase r accumulates, over every branch k and
/// every excitation stream t, the LTI filtering of the frequency-shifted
/// stream t by the (r, t) filter of branch k. The cross filters are what
/// induce spatial correlation between output phases.
pub fn fresh_mimo(
    bank: &FreshFilterBank,
    streams: &[Vec<Cplx>],
) -> Result<Vec<Vec<Cplx>>, NoiseGenError> {
    let m_r = bank.phases();
    if streams.len() != m_r {
        return Err(NoiseGenError::StreamCountMismatch {
            expected: m_r,
            got: streams.len(),
        });
    }
    let n = streams.first().map_or(0, Vec::len);
    if streams.iter().any(|s| s.len() != n) {
        return Err(NoiseGenError::InvalidParameter {
            name: "streams",
            message: "excitation streams must have equal length".into(),
        });
    }
    if n < bank.tap_len() {
        return Err(NoiseGenError::ExcitationTooShort {
            len: n,
            min: bank.tap_len(),
        });
    }

    let mut out = vec![vec![Cplx::new(0.0, 0.0); n]; m_r];
    let mut shifted = vec![vec![Cplx::new(0.0, 0.0); n]; m_r];
    for k in 0..bank.branches() {
        let alpha = bank.cyclic_frequency(k);
        let step = -2.0 * std::f64::consts::PI * alpha;
        for (t, stream) in streams.iter().enumerate() {
            for (l, (&w_l, s)) in stream.iter().zip(shifted[t].iter_mut()).enumerate() {
                let ang = step * l as Real;
                *s = w_l * Complex::new(ang.cos(), ang.sin());
            }
        }
        for r in 0..m_r {
            for t in 0..m_r {
                let taps = bank.taps(k, r, t);
                fir_accumulate(taps, &shifted[t], &mut out[r]);
            }
        }
    }
    Ok(out)
}

/// `out[n] += sum_l taps[l] * x[n - l]`, zero pre-history.
fn fir_accumulate(taps: &[Cplx], x: &[Cplx], out: &mut [Cplx]) {
    for (n, o) in out.iter_mut().enumerate() {
        let lmax = taps.len().min(n + 1);
        let mut acc = Cplx::new(0.0, 0.0);
        for (l, &g) in taps.iter().take(lmax).enumerate() {
            acc += g * x[n - l];
        }
        *o += acc;
    }
}

/// Drives [`fresh_mimo`] with independent per-phase white Gaussian
/// excitations and packages the real part of the outputs as a trace. One
/// extra period is generated first and discarded so the zero pre-history of
/// the filters never reaches the emitted samples.
pub fn generate_fresh(
    bank: &FreshFilterBank,
    seed: u64,
    sample_rate_hz: Real,
    samples_per_period: usize,
    n_periods: usize,
) -> Result<NoiseTrace, NoiseGenError> {
    if samples_per_period == 0 || n_periods == 0 {
        return Err(NoiseGenError::InvalidParameter {
            name: "trace",
            message: "samples_per_period and n_periods must be positive".into(),
        });
    }
    let total = samples_per_period * (n_periods + 1);
    let streams: Vec<Vec<Cplx>> = (0..bank.phases())
        .map(|t| {
            gen_awgn(mix_seed(seed, t as u64), total, 1.0)
                .map(|w| w.into_iter().map(|v| Cplx::new(v, 0.0)).collect())
        })
        .collect::<Result<_, _>>()?;
    let outputs = fresh_mimo(bank, &streams)?;
    let phases: Vec<Vec<Real>> = outputs
        .into_iter()
        .map(|z| z[samples_per_period..].iter().map(|v| v.re).collect())
        .collect();
    NoiseTrace::new(phases, sample_rate_hz, samples_per_period, n_periods)
}
