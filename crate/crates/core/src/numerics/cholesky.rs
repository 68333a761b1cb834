use super::{complex_from_re, ComplexMatrix, NumericsError, Scalar, Tolerances};
use num_complex::Complex;

/// Lower-triangular Cholesky factor `L` with `L L† = R` (possibly after
/// diagonal loading, in which case `loaded` is set and `loading` holds the
/// value added to every diagonal entry).
#[derive(Debug, Clone)]
pub struct CholeskyFactor<T> {
    pub l: ComplexMatrix<T>,
    pub loaded: bool,
    pub loading: T,
}

/// Cholesky factorization of a Hermitian positive semi-definite matrix.
///
/// A pivot falling below `pivot_rel * trace/n` triggers one retry with
/// `load_rel * trace/n` added to the diagonal; failure after loading is an
/// error.
pub fn cholesky<T: Scalar>(r: &ComplexMatrix<T>) -> Result<CholeskyFactor<T>, NumericsError> {
    cholesky_with(r, &Tolerances::default())
}

pub fn cholesky_with<T: Scalar>(
    r: &ComplexMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<CholeskyFactor<T>, NumericsError> {
    r.require_hermitian(tol.herm_rel)?;
    let n = r.rows();
    let trace_over_n = r.trace().re / T::from_usize(n).unwrap();
    let floor = tol.pivot_rel * trace_over_n;

    match factor(r, floor) {
        Ok(l) => Ok(CholeskyFactor {
            l,
            loaded: false,
            loading: T::zero(),
        }),
        Err(_) => {
            let loading = tol.load_rel * trace_over_n;
            let mut loaded = r.clone();
            for i in 0..n {
                loaded[(i, i)] += complex_from_re(loading);
            }
            let l = factor(&loaded, floor)?;
            Ok(CholeskyFactor {
                l,
                loaded: true,
                loading,
            })
        }
    }
}

fn factor<T: Scalar>(r: &ComplexMatrix<T>, floor: T) -> Result<ComplexMatrix<T>, NumericsError> {
    let n = r.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = r[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= floor || !d.is_finite() {
            return Err(NumericsError::NotPositiveDefinite {
                index: j,
                pivot: d.to_f64().unwrap_or(f64::NAN),
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = complex_from_re(djj);
        for i in j + 1..n {
            let mut s = r[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s.scale(T::one() / djj);
        }
    }
    Ok(l)
}

impl<T: Scalar> CholeskyFactor<T> {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn forward_solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>, NumericsError> {
        let n = self.dim();
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch {
                context: format!("vector length {} vs factor dimension {}", b.len(), n),
            });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s.scale(T::one() / self.l[(i, i)].re);
        }
        Ok(y)
    }

    /// Solves `L X = M` column by column.
    pub fn solve_matrix(&self, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>, NumericsError> {
        let n = self.dim();
        if m.rows() != n {
            return Err(NumericsError::DimensionMismatch {
                context: format!("matrix rows {} vs factor dimension {}", m.rows(), n),
            });
        }
        let mut out = m.clone();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                for c in 0..m.cols() {
                    let sub = lik * out[(k, c)];
                    out[(i, c)] -= sub;
                }
            }
            let inv = T::one() / self.l[(i, i)].re;
            for c in 0..m.cols() {
                out[(i, c)] = out[(i, c)].scale(inv);
            }
        }
        Ok(out)
    }

    /// `ln det(R) = 2 sum ln L_ii` for the factored matrix.
    pub fn logdet(&self) -> T {
        let two = T::from_f64_const(2.0);
        (0..self.dim()).map(|i| self.l[(i, i)].re.ln()).sum::<T>() * two
    }
}

/// Log-determinant of a Hermitian positive-definite matrix, computed from
/// the Cholesky diagonal. Singular (or indefinite) input is an error; no
/// diagonal loading is applied here since it would bias the result.
pub fn logdet_psd<T: Scalar>(a: &ComplexMatrix<T>) -> Result<T, NumericsError> {
    logdet_psd_with(a, &Tolerances::default())
}

pub fn logdet_psd_with<T: Scalar>(
    a: &ComplexMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<T, NumericsError> {
    a.require_hermitian(tol.herm_rel)?;
    let n = a.rows();
    let floor = tol.pivot_rel * a.trace().re / T::from_usize(n).unwrap();
    let l = factor(a, floor).map_err(|_| NumericsError::Singular)?;
    Ok(CholeskyFactor {
        l,
        loaded: false,
        loading: T::zero(),
    }
    .logdet())
}
