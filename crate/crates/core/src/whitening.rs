//! Per-portion spatio-temporal noise statistics: autocorrelation estimation
//! over an ensemble of periods, Cholesky factorization into a whitening
//! operator, and the composite (whitened) channel.

use crate::analysis::PortionPartition;
use crate::channel::BlockConvMatrix;
use crate::noisegen::NoiseTrace;
use crate::numerics::{cholesky_with, CholeskyFactor, NumericsError, Tolerances};
use crate::{Cplx, Mat, Real};

#[derive(Debug, thiserror::Error)]
pub enum WhiteningError {
    #[error("requested {requested} periods but trace has {available}")]
    NotEnoughPeriods { requested: usize, available: usize },
    #[error("portion index {index} out of range ({count} portions per period)")]
    PortionOutOfRange { index: usize, count: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Estimated autocorrelation of one portion position, dimension
/// `M_r * N_p` with time-major, phase-minor stacking.
#[derive(Debug, Clone)]
pub struct PortionCorrelation {
    pub portion: usize,
    pub r: Mat,
    pub n_periods: usize,
    /// Fewer period instances than the matrix dimension: the estimate is
    /// rank-deficient and diagonal loading is mandatory.
    pub rank_warning: bool,
}

/// Whitening operator. Application is a forward substitution against the
/// lower Cholesky factor; the inverse is never formed.
#[derive(Debug, Clone)]
pub struct Whitener {
    factor: CholeskyFactor<Real>,
    /// Diagonal loading was applied while factoring.
    pub loaded: bool,
}

impl Whitener {
    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn factor(&self) -> &CholeskyFactor<Real> {
        &self.factor
    }
}

/// Stacked payload vectors of one portion position, one per period:
/// `[z^1[n], ..., z^{M_r}[n], z^1[n+1], ...]` over the `N_p` payload
/// samples (the CP-aligned samples are discarded by the receiver).
pub fn stack_portion_vectors(
    trace: &NoiseTrace,
    partition: &PortionPartition,
    portion: usize,
    n_period: usize,
) -> Result<Vec<Vec<Cplx>>, WhiteningError> {
    if portion >= partition.portions_per_period() {
        return Err(WhiteningError::PortionOutOfRange {
            index: portion,
            count: partition.portions_per_period(),
        });
    }
    if n_period == 0 || n_period > trace.n_periods() {
        return Err(WhiteningError::NotEnoughPeriods {
            requested: n_period,
            available: trace.n_periods(),
        });
    }
    let payload = partition.payload_range(portion);
    let m_r = trace.n_phases();
    Ok((0..n_period)
        .map(|p| {
            let mut v = Vec::with_capacity(m_r * partition.n_p());
            for n in payload.clone() {
                for r in 0..m_r {
                    v.push(Cplx::new(trace.period(r, p)[n], 0.0));
                }
            }
            v
        })
        .collect())
}

/// Sample covariance of an ensemble of equal-length vectors,
/// `1/N sum (v - mean)(v - mean)†`, Hermitian-symmetrized.
pub fn empirical_covariance(vectors: &[Vec<Cplx>], subtract_mean: bool) -> Mat {
    let n = vectors.len();
    let dim = vectors.first().map_or(0, Vec::len);
    let mut mean = vec![Cplx::new(0.0, 0.0); dim];
    if subtract_mean {
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m = m.unscale(n as Real);
        }
    }
    let mut r = Mat::zeros(dim, dim);
    let mut centered = vec![Cplx::new(0.0, 0.0); dim];
    for v in vectors {
        for ((c, x), m) in centered.iter_mut().zip(v).zip(&mean) {
            *c = x - m;
        }
        for i in 0..dim {
            let ci = centered[i];
            for j in i..dim {
                r[(i, j)] += ci * centered[j].conj();
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            r[(i, j)] = r[(i, j)].unscale(n as Real);
            if i != j {
                r[(j, i)] = r[(i, j)].conj();
            }
        }
    }
    r.symmetrize()
}

/// Ensemble autocorrelation of one portion position across periods. The
/// sample mean is subtracted before the outer products.
pub fn estimate_autocorr(
    trace: &NoiseTrace,
    partition: &PortionPartition,
    portion: usize,
    n_period: usize,
) -> Result<PortionCorrelation, WhiteningError> {
    let vectors = stack_portion_vectors(trace, partition, portion, n_period)?;
    let dim = vectors[0].len();
    let r = empirical_covariance(&vectors, true);
    Ok(PortionCorrelation {
        portion,
        r,
        n_periods: n_period,
        rank_warning: n_period < dim,
    })
}

/// Factors the correlation into a whitening operator. Rank-deficient
/// estimates are loaded up front; otherwise loading only happens if a pivot
/// fails.
pub fn make_whitener(corr: &PortionCorrelation) -> Result<Whitener, WhiteningError> {
    let tol = Tolerances::default();
    let input = if corr.rank_warning {
        let n = corr.r.rows();
        let loading = tol.load_rel * corr.r.trace().re / n as Real;
        let mut m = corr.r.clone();
        for i in 0..n {
            m[(i, i)] += Cplx::new(loading, 0.0);
        }
        m
    } else {
        corr.r.clone()
    };
    let factor = cholesky_with(&input, &tol)?;
    let loaded = corr.rank_warning || factor.loaded;
    Ok(Whitener { factor, loaded })
}

/// Applies the whitener to a stacked vector: solves `L w = z`.
pub fn whiten_block(w: &Whitener, block: &[Cplx]) -> Result<Vec<Cplx>, WhiteningError> {
    Ok(w.factor.forward_solve(block)?)
}

/// Composite channel after whitening: `L^{-1} H`, one triangular solve per
/// column. The circulant structure of `H` does not survive this in general.
pub fn composite_channel(w: &Whitener, h: &BlockConvMatrix) -> Result<Mat, WhiteningError> {
    composite_channel_matrix(w, &h.matrix)
}

pub fn composite_channel_matrix(w: &Whitener, h: &Mat) -> Result<Mat, WhiteningError> {
    if h.rows() != w.dim() {
        return Err(WhiteningError::DimensionMismatch {
            context: format!(
                "channel has {} rows, whitener dimension {}",
                h.rows(),
                w.dim()
            ),
        });
    }
    Ok(w.factor.solve_matrix(h)?)
}

/// Writes a correlation matrix as `portion,row,col,re,im` rows (row/col
/// 1-based).
pub fn write_correlation_csv(
    corr: &PortionCorrelation,
    path: &std::path::Path,
) -> Result<(), std::io::Error> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "portion,row,col,re,im")?;
    for row in 0..corr.r.rows() {
        for col in 0..corr.r.cols() {
            let z = corr.r[(row, col)];
            writeln!(
                w,
                "{},{},{},{},{}",
                corr.portion + 1,
                row + 1,
                col + 1,
                z.re,
                z.im
            )?;
        }
    }
    w.flush()
}
