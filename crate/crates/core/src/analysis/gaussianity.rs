use super::{histogram, kld_vs_gaussian, slice_slots_len, AnalysisError};
use crate::noisegen::{mix_seed, NoiseTrace};
use crate::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Division of each period into `n_s * a` portions. Each slot of
/// `n_fft + n_cp` samples splits into `a` portions of
/// `n_p + n_cp = floor((n_fft + n_cp) / a)` samples; the first `n_cp`
/// samples of a portion align with the cyclic prefix of the transmitted
/// symbol and the remaining `n_p` are the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortionPartition {
    n_s: usize,
    n_fft: usize,
    n_cp: usize,
    a: usize,
    n_p: usize,
}

impl PortionPartition {
    pub fn new(
        samples_per_period: usize,
        n_fft: usize,
        n_cp: usize,
        a: usize,
    ) -> Result<Self, AnalysisError> {
        let grid = slice_slots_len(samples_per_period, n_fft, n_cp)?;
        let max = Self::max_division(n_fft, n_cp);
        if !a.is_power_of_two() || a > max {
            return Err(AnalysisError::BadDivisionFactor { a, max });
        }
        let n_p = (n_fft + n_cp) / a - n_cp;
        debug_assert!(n_p >= 1);
        Ok(PortionPartition {
            n_s: grid.n_s,
            n_fft,
            n_cp,
            a,
            n_p,
        })
    }

    /// Largest admissible division factor:
    /// `2^floor(log2((n_fft + n_cp) / (1 + n_cp)))`.
    pub fn max_division(n_fft: usize, n_cp: usize) -> usize {
        let ratio = (n_fft + n_cp) / (1 + n_cp);
        if ratio == 0 {
            1
        } else {
            let log = (ratio as f64).log2().floor() as u32;
            1usize << log
        }
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn n_cp(&self) -> usize {
        self.n_cp
    }

    pub fn division(&self) -> usize {
        self.a
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    /// Portion length including CP samples.
    pub fn portion_len(&self) -> usize {
        self.n_p + self.n_cp
    }

    pub fn portions_per_period(&self) -> usize {
        self.n_s * self.a
    }

    /// Slot this portion belongs to.
    pub fn slot_of(&self, portion: usize) -> usize {
        portion / self.a
    }

    /// Sample range of the portion (CP included) inside one period.
    pub fn portion_range(&self, portion: usize) -> std::ops::Range<usize> {
        let slot = portion / self.a;
        let sub = portion % self.a;
        let start = slot * (self.n_fft + self.n_cp) + sub * self.portion_len();
        start..start + self.portion_len()
    }

    /// Payload sample range of the portion (CP stripped) inside one period.
    pub fn payload_range(&self, portion: usize) -> std::ops::Range<usize> {
        let r = self.portion_range(portion);
        r.start + self.n_cp..r.end
    }
}

/// Mean and population variance of one portion position pooled over
/// `n_period` periods (CP samples included).
pub fn portion_stats(
    trace: &NoiseTrace,
    phase: usize,
    partition: &PortionPartition,
    portion: usize,
    n_period: usize,
) -> Result<(Real, Real), AnalysisError> {
    let samples = collect_portion(trace, phase, partition, portion, n_period)?;
    let n = (samples.len() * samples.first().map_or(0, Vec::len)) as Real;
    let mut mean = 0.0;
    for per in &samples {
        for &v in per {
            mean += v;
        }
    }
    mean /= n;
    let mut var = 0.0;
    for per in &samples {
        for &v in per {
            var += (v - mean) * (v - mean);
        }
    }
    Ok((mean, var / n))
}

/// Per-period sample vectors of one portion position.
fn collect_portion(
    trace: &NoiseTrace,
    phase: usize,
    partition: &PortionPartition,
    portion: usize,
    n_period: usize,
) -> Result<Vec<Vec<Real>>, AnalysisError> {
    if phase >= trace.n_phases() {
        return Err(AnalysisError::PhaseOutOfRange {
            phase,
            n_phases: trace.n_phases(),
        });
    }
    if portion >= partition.portions_per_period() {
        return Err(AnalysisError::PortionOutOfRange {
            index: portion,
            count: partition.portions_per_period(),
        });
    }
    if n_period == 0 || n_period > trace.n_periods() {
        return Err(AnalysisError::NotEnoughPeriods {
            requested: n_period,
            available: trace.n_periods(),
        });
    }
    let range = partition.portion_range(portion);
    Ok((0..n_period)
        .map(|p| trace.period(phase, p)[range.clone()].to_vec())
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct GaussianityParams {
    pub kld_threshold: Real,
    pub n_itr: usize,
    pub n_period: usize,
    pub n_bins: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PortionKld {
    pub a: usize,
    pub portion: usize,
    pub kld: Real,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GaussianityResult {
    pub partition: PortionPartition,
    /// False when even the maximal division leaves failing portions.
    pub all_pass: bool,
    /// One record per portion per division factor tried, in search order.
    pub records: Vec<PortionKld>,
}

/// Searches the division factors A = 1, 2, 4, ... (so portion lengths
/// descend) for the smallest A at which every portion's divergence from its
/// fitted Gaussian stays at or below the threshold. Each portion's statistic
/// averages `n_itr` bootstrap resamples (over periods) of the histogram
/// against the moments fitted on the full pool. When no factor passes, the
/// maximal-division partition is returned flagged `all_pass = false`.
pub fn gaussianity_search(
    trace: &NoiseTrace,
    phase: usize,
    n_fft: usize,
    n_cp: usize,
    params: &GaussianityParams,
) -> Result<GaussianityResult, AnalysisError> {
    if !(params.kld_threshold > 0.0) {
        return Err(AnalysisError::InvalidParameter {
            name: "kld_threshold",
            message: format!("must be positive, got {}", params.kld_threshold),
        });
    }
    if params.n_itr == 0 {
        return Err(AnalysisError::InvalidParameter {
            name: "n_itr",
            message: "at least one iteration required".into(),
        });
    }
    let max_a = PortionPartition::max_division(n_fft, n_cp);
    let mut records = Vec::new();
    let mut a = 1;
    loop {
        let partition = PortionPartition::new(trace.samples_per_period(), n_fft, n_cp, a)?;
        let mut all_pass = true;
        for portion in 0..partition.portions_per_period() {
            let kld = portion_mean_kld(trace, phase, &partition, portion, params)?;
            let pass = kld <= params.kld_threshold;
            all_pass &= pass;
            records.push(PortionKld {
                a,
                portion,
                kld,
                pass,
            });
        }
        if all_pass {
            return Ok(GaussianityResult {
                partition,
                all_pass: true,
                records,
            });
        }
        if a >= max_a {
            return Ok(GaussianityResult {
                partition,
                all_pass: false,
                records,
            });
        }
        a *= 2;
    }
}

/// Bootstrap-averaged divergence of one portion position. Moments come from
/// the full `n_period` pool; each iteration histograms a resample of the
/// period instances (with replacement). The RNG is seeded per portion so
/// portions can be evaluated in any order or in parallel.
fn portion_mean_kld(
    trace: &NoiseTrace,
    phase: usize,
    partition: &PortionPartition,
    portion: usize,
    params: &GaussianityParams,
) -> Result<Real, AnalysisError> {
    let per_period = collect_portion(trace, phase, partition, portion, params.n_period)?;
    let pooled: Vec<Real> = per_period.iter().flatten().copied().collect();
    let n = pooled.len() as Real;
    let mean = pooled.iter().sum::<Real>() / n;
    let var = pooled.iter().map(|v| (v - mean) * (v - mean)).sum::<Real>() / n;
    if !(var > 0.0) {
        // constant-valued portion: infinitely far from any Gaussian fit
        return Ok(Real::INFINITY);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(
        params.seed,
        (partition.division() as u64) << 32 | portion as u64,
    ));
    let mut acc = 0.0;
    let mut resample = Vec::with_capacity(pooled.len());
    for _ in 0..params.n_itr {
        resample.clear();
        for _ in 0..params.n_period {
            let pick = rng.gen_range(0..params.n_period);
            resample.extend_from_slice(&per_period[pick]);
        }
        let pdf = match histogram(&resample, params.n_bins) {
            Ok(pdf) => pdf,
            Err(AnalysisError::ZeroWidthSupport) => return Ok(Real::INFINITY),
            Err(e) => return Err(e),
        };
        acc += kld_vs_gaussian(&pdf, mean, var)?;
    }
    Ok(acc / params.n_itr as Real)
}

/// Writes `A,portion,kld,pass` rows (portions 1-based within their factor).
pub fn write_gaussianity_csv(records: &[PortionKld], path: &Path) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "A,portion,kld,pass")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.a, r.portion + 1, r.kld, r.pass)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noisegen::{gen_awgn, NoiseTrace};

    #[test]
    fn partition_arithmetic_at_full_scale() {
        let p = PortionPartition::new(3200, 256, 64, 1).unwrap();
        assert_eq!(p.n_s(), 10);
        assert_eq!(p.n_p(), 256);
        assert_eq!(p.portion_len(), 320);
        assert_eq!(p.portions_per_period(), 10);
        assert_eq!(PortionPartition::max_division(256, 64), 4);
        let p4 = PortionPartition::new(3200, 256, 64, 4).unwrap();
        assert_eq!(p4.n_p(), 16);
        assert_eq!(p4.portion_len(), 80);
        assert_eq!(p4.portions_per_period(), 40);
        assert_eq!(p4.portion_range(0), 0..80);
        assert_eq!(p4.portion_range(4), 320..400);
        assert_eq!(p4.payload_range(0), 64..80);
        assert!(PortionPartition::new(3200, 256, 64, 8).is_err());
        assert!(PortionPartition::new(3200, 256, 64, 3).is_err());
    }

    #[test]
    fn stats_of_constant_traces() {
        let zero = NoiseTrace::new(vec![vec![0.0; 320 * 4]], 1.0, 320, 4).unwrap();
        let p = PortionPartition::new(320, 256, 64, 1).unwrap();
        assert_eq!(portion_stats(&zero, 0, &p, 0, 4).unwrap(), (0.0, 0.0));
        let c = NoiseTrace::new(vec![vec![2.5; 320 * 4]], 1.0, 320, 4).unwrap();
        let (mu, var) = portion_stats(&c, 0, &p, 0, 4).unwrap();
        assert_eq!(mu, 2.5);
        assert_eq!(var, 0.0);
    }

    #[test]
    fn unit_variance_portion_concentrates() {
        // 20 periods x 320 samples = 6400 samples: variance within 5%
        let w = gen_awgn(31, 320 * 20, 1.0).unwrap();
        let trace = NoiseTrace::new(vec![w], 1.0, 320, 20).unwrap();
        let p = PortionPartition::new(320, 256, 64, 1).unwrap();
        let (_, var) = portion_stats(&trace, 0, &p, 0, 20).unwrap();
        assert!((0.95..=1.05).contains(&var), "variance {}", var);
    }

    #[test]
    fn out_of_range_portion_rejected() {
        let w = gen_awgn(1, 320 * 2, 1.0).unwrap();
        let trace = NoiseTrace::new(vec![w], 1.0, 320, 2).unwrap();
        let p = PortionPartition::new(320, 256, 64, 1).unwrap();
        assert!(matches!(
            portion_stats(&trace, 0, &p, 1, 2),
            Err(AnalysisError::PortionOutOfRange { .. })
        ));
        assert!(matches!(
            portion_stats(&trace, 0, &p, 0, 3),
            Err(AnalysisError::NotEnoughPeriods { .. })
        ));
    }

    fn awgn_trace(seed: u64, spp: usize, periods: usize) -> NoiseTrace {
        let w = gen_awgn(seed, spp * periods, 1.0).unwrap();
        NoiseTrace::new(vec![w], 1.0, spp, periods).unwrap()
    }

    #[test]
    fn awgn_passes_at_full_symbol_length() {
        let trace = awgn_trace(5, 640, 20);
        let params = GaussianityParams {
            kld_threshold: 0.4,
            n_itr: 50,
            n_period: 20,
            n_bins: 64,
            seed: 9,
        };
        let res = gaussianity_search(&trace, 0, 256, 64, &params).unwrap();
        assert!(res.all_pass);
        assert_eq!(res.partition.division(), 1);
        assert_eq!(res.partition.n_p(), 256);
    }

    #[test]
    fn huge_threshold_always_keeps_full_length() {
        let trace = awgn_trace(6, 320, 8);
        let params = GaussianityParams {
            kld_threshold: 1e9,
            n_itr: 5,
            n_period: 8,
            n_bins: 32,
            seed: 1,
        };
        let res = gaussianity_search(&trace, 0, 256, 64, &params).unwrap();
        assert_eq!(res.partition.division(), 1);
        assert!(res.all_pass);
    }

    #[test]
    fn impulsive_mixture_forces_a_above_one() {
        // one slot carries a 5% mixture of 20-sigma impulses
        let spp = 640;
        let periods = 20;
        let mut w = gen_awgn(7, spp * periods, 1.0).unwrap();
        let spikes = gen_awgn(8, spp * periods, 1.0).unwrap();
        for period in 0..periods {
            for i in 0..320 {
                let idx = period * spp + i;
                if spikes[idx].abs() > 1.96 {
                    w[idx] *= 20.0;
                }
            }
        }
        let trace = NoiseTrace::new(vec![w], 1.0, spp, periods).unwrap();
        let params = GaussianityParams {
            kld_threshold: 0.01,
            n_itr: 30,
            n_period: periods,
            n_bins: 64,
            seed: 3,
        };
        let res = gaussianity_search(&trace, 0, 256, 64, &params).unwrap();
        assert!(
            res.partition.division() > 1,
            "selected A = {}",
            res.partition.division()
        );
        // records must cover every factor tried
        assert!(res.records.iter().any(|r| r.a == 1 && !r.pass));
    }

    #[test]
    fn variance_burst_passes_once_isolated() {
        // first half of slot 0 at 8x the variance of everything else:
        // non-Gaussian pooled at A = 1, pure Gaussian portions at A = 2
        let spp = 320;
        let periods = 40;
        let mut w = gen_awgn(17, spp * periods, 1.0).unwrap();
        for period in 0..periods {
            for i in 0..160 {
                w[period * spp + i] *= 8.0;
            }
        }
        let trace = NoiseTrace::new(vec![w], 1.0, spp, periods).unwrap();
        let params = GaussianityParams {
            kld_threshold: 0.05,
            n_itr: 40,
            n_period: periods,
            n_bins: 64,
            seed: 5,
        };
        let res = gaussianity_search(&trace, 0, 256, 64, &params).unwrap();
        assert!(res.all_pass);
        assert_eq!(
            res.partition.division(),
            2,
            "selected A = {}",
            res.partition.division()
        );
    }
}
