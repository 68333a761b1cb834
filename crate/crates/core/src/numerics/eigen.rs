use super::{ComplexMatrix, NumericsError, Scalar, Tolerances};
use num_complex::Complex;

/// Eigendecomposition of a Hermitian matrix: real eigenvalues sorted
/// descending, eigenvectors as the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Each rotation annihilates one off-diagonal pair through a complex plane
/// rotation; sweeps repeat until the off-diagonal Frobenius mass drops below
/// `off_diag_rel * ||A||_F`. Eigenvalues in `(-eig_clamp_rel * ||A||_F, 0)`
/// are clamped to zero so PSD inputs stay PSD.
pub fn eig_hermitian<T: Scalar>(a: &ComplexMatrix<T>) -> Result<EigenResult<T>, NumericsError> {
    eig_hermitian_with(a, &Tolerances::default())
}

pub fn eig_hermitian_with<T: Scalar>(
    a: &ComplexMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<EigenResult<T>, NumericsError> {
    let (values, vt) = jacobi(a, tol, true)?;
    let n = a.rows();
    let vt = vt.expect("vectors requested");
    // rows of vt are the eigenvectors; emit them as columns
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vt[(c, r)]);
    Ok(EigenResult { values, vectors })
}

/// Eigenvalues only; skips the eigenvector accumulation.
pub fn eigvals_hermitian<T: Scalar>(a: &ComplexMatrix<T>) -> Result<Vec<T>, NumericsError> {
    let (values, _) = jacobi(a, &Tolerances::default(), false)?;
    Ok(values)
}

const MAX_SWEEPS: usize = 64;

fn jacobi<T: Scalar>(
    input: &ComplexMatrix<T>,
    tol: &Tolerances<T>,
    want_vectors: bool,
) -> Result<(Vec<T>, Option<ComplexMatrix<T>>), NumericsError> {
    input.require_hermitian(tol.herm_rel)?;
    let n = input.rows();
    let norm = input.frobenius_norm();
    let mut a = input.symmetrize();
    let mut vt = want_vectors.then(|| ComplexMatrix::<T>::identity(n));

    if n > 0 && norm > T::zero() {
        let off_tol = tol.off_diag_rel * norm;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_mass(&a) <= off_tol {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, vt.as_mut(), p, q);
                }
            }
        }
        if !converged && off_mass(&a) > off_tol {
            return Err(NumericsError::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let clamp = tol.eig_clamp_rel * norm;
    let mut pairs: Vec<(T, usize)> = (0..n)
        .map(|i| {
            let mut v = a[(i, i)].re;
            if v < T::zero() && v > -clamp {
                v = T::zero();
            }
            (v, i)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let values = pairs.iter().map(|&(v, _)| v).collect();
    let vt_sorted = vt.map(|vt| ComplexMatrix::from_fn(n, n, |r, c| vt[(pairs[r].1, c)]));
    Ok((values, vt_sorted))
}

fn off_mass<T: Scalar>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            acc += a[(i, j)].norm_sqr();
        }
    }
    (acc + acc).sqrt()
}

/// One complex Jacobi rotation zeroing `a[p][q]` (p < q), updating rows p
/// and q in place and mirroring them back into the columns.
fn rotate<T: Scalar>(
    a: &mut ComplexMatrix<T>,
    vt: Option<&mut ComplexMatrix<T>>,
    p: usize,
    q: usize,
) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    let u = apq.unscale(r); // e^{i alpha}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let tau = (aqq - app) / (r + r);
    let t = if tau == T::zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let n = a.cols();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let old_pk = a[(p, k)];
        let old_qk = a[(q, k)];
        a[(p, k)] = old_pk.scale(c) - u * old_qk.scale(s);
        a[(q, k)] = u.conj() * old_pk.scale(s) + old_qk.scale(c);
        a[(k, p)] = a[(p, k)].conj();
        a[(k, q)] = a[(q, k)].conj();
    }
    let two_rcs = (r + r) * c * s;
    a[(p, p)] = Complex::new(app * c * c - two_rcs + aqq * s * s, T::zero());
    a[(q, q)] = Complex::new(app * s * s + two_rcs + aqq * c * c, T::zero());
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());

    if let Some(vt) = vt {
        for k in 0..n {
            let old_pk = vt[(p, k)];
            let old_qk = vt[(q, k)];
            vt[(p, k)] = old_pk.scale(c) - u.conj() * old_qk.scale(s);
            vt[(q, k)] = u * old_pk.scale(s) + old_qk.scale(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reconstruct(e: &EigenResult<f64>) -> ComplexMatrix<f64> {
        let lam = ComplexMatrix::from_diag(&e.values);
        e.vectors.mul(&lam).mul(&e.vectors.hermitian())
    }

    #[test]
    fn identity_eigenvalues() {
        let e = eig_hermitian(&ComplexMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_passthrough_sorted() {
        let a = ComplexMatrix::from_diag(&[2.0, 5.0, 0.0]);
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.values, vec![5.0, 2.0, 0.0]);
        assert!(reconstruct(&e).sub(&a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // [[2,1],[1,2]]: lambda^2 - 4 lambda + 3 = 0 -> {3, 1}
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0)],
        ]);
        let e = eig_hermitian(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian_reconstruction_and_unitarity() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(4.0, 0.0), c(1.0, -2.0), c(0.5, 0.5)],
            vec![c(1.0, 2.0), c(6.0, 0.0), c(-1.0, 1.0)],
            vec![c(0.5, -0.5), c(-1.0, -1.0), c(5.0, 0.0)],
        ]);
        let e = eig_hermitian(&a).unwrap();
        let rel = reconstruct(&e).sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(rel < 1e-13, "reconstruction {}", rel);
        let qtq = e.vectors.hermitian().mul(&e.vectors);
        assert!(qtq.sub(&ComplexMatrix::identity(3)).frobenius_norm() < 1e-13);
        // A v_i = lambda_i v_i
        for i in 0..3 {
            let v: Vec<Complex64> = (0..3).map(|r| e.vectors[(r, i)]).collect();
            let av = a.mul_vec(&v);
            for r in 0..3 {
                assert!((av[r] - v[r].scale(e.values[i])).norm() < 1e-12 * a.frobenius_norm());
            }
        }
    }

    #[test]
    fn indefinite_matrix_keeps_negative_eigenvalues() {
        let a = ComplexMatrix::from_diag(&[1.0, -2.0]);
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.values, vec![1.0, -2.0]);
    }

    #[test]
    fn tiny_negative_from_psd_is_clamped() {
        let eps = -1e-16;
        let a = ComplexMatrix::from_diag(&[1.0, eps]);
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.values[1], 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(matches!(
            eig_hermitian(&a),
            Err(NumericsError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigvals_match_full_solver() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let vals = eigvals_hermitian(&a).unwrap();
        let full = eig_hermitian(&a).unwrap();
        for (x, y) in vals.iter().zip(&full.values) {
            assert!((x - y).abs() < 1e-12);
        }
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }
}
