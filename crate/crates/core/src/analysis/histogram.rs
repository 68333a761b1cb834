use super::AnalysisError;
use crate::Real;

/// Empirical distribution over equal-width bins spanning the sample range.
#[derive(Debug, Clone)]
pub struct EmpiricalPdf {
    edges: Vec<Real>,
    probs: Vec<Real>,
    n_samples: usize,
}

impl EmpiricalPdf {
    /// Builds a pdf from explicit bin edges and probabilities (used by tests
    /// and resampling); probabilities must be non-negative and sum to one.
    pub fn from_parts(
        edges: Vec<Real>,
        probs: Vec<Real>,
        n_samples: usize,
    ) -> Result<Self, AnalysisError> {
        let invalid = |message: String| AnalysisError::InvalidParameter {
            name: "pdf",
            message,
        };
        if edges.len() != probs.len() + 1 {
            return Err(invalid("edge count must be bin count + 1".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("edges must be strictly increasing".into()));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(invalid("negative probability".into()));
        }
        let total: Real = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("probabilities sum to {}", total)));
        }
        Ok(EmpiricalPdf {
            edges,
            probs,
            n_samples,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.probs.len()
    }

    pub fn edges(&self) -> &[Real] {
        &self.edges
    }

    pub fn probs(&self) -> &[Real] {
        &self.probs
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
}

/// Histogram over `n_bins` equal-width bins spanning `[min, max]`; the top
/// edge is inclusive. Degenerate all-equal samples are an error.
pub fn histogram(samples: &[Real], n_bins: usize) -> Result<EmpiricalPdf, AnalysisError> {
    if n_bins < 2 {
        return Err(AnalysisError::TooFewBins(n_bins));
    }
    let mut min = Real::INFINITY;
    let mut max = Real::NEG_INFINITY;
    for &v in samples {
        min = min.min(v);
        max = max.max(v);
    }
    if samples.len() < 2 || !(max > min) {
        return Err(AnalysisError::ZeroWidthSupport);
    }
    let width = (max - min) / n_bins as Real;
    let mut counts = vec![0usize; n_bins];
    for &v in samples {
        let idx = (((v - min) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let total = samples.len() as Real;
    let probs = counts.iter().map(|&c| c as Real / total).collect();
    let edges = (0..=n_bins).map(|i| min + width * i as Real).collect();
    Ok(EmpiricalPdf {
        edges,
        probs,
        n_samples: samples.len(),
    })
}

fn normal_cdf(x: Real, mu: Real, sigma: Real) -> Real {
    0.5 * (1.0 + libm::erf((x - mu) / (sigma * std::f64::consts::SQRT_2)))
}

/// Mass the fitted normal assigns to each bin of the pdf, by exact CDF
/// differences at the bin edges; floored so a zero never reaches the
/// divergence denominator.
pub fn gaussian_bin_masses(pdf: &EmpiricalPdf, mu: Real, sigma2: Real) -> Vec<Real> {
    let sigma = sigma2.sqrt();
    let edges = pdf.edges();
    (0..pdf.n_bins())
        .map(|i| {
            let mass = normal_cdf(edges[i + 1], mu, sigma) - normal_cdf(edges[i], mu, sigma);
            mass.max(1e-300)
        })
        .collect()
}

/// Kullback-Leibler divergence (nats) between the empirical pdf and the
/// Gaussian with the given moments: `sum q_i ln(q_i / g_i)` with `g_i` the
/// integrated bin mass. Empty bins contribute nothing; the result can dip a
/// hair below zero only through rounding.
pub fn kld_vs_gaussian(pdf: &EmpiricalPdf, mu: Real, sigma2: Real) -> Result<Real, AnalysisError> {
    if !(sigma2 > 0.0) {
        return Err(AnalysisError::NonPositiveVariance(sigma2));
    }
    let g = gaussian_bin_masses(pdf, mu, sigma2);
    let mut d = 0.0;
    for (&q, &g) in pdf.probs().iter().zip(&g) {
        if q > 0.0 {
            d += q * (q / g).ln();
        }
    }
    Ok(d)
}
