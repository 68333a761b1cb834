//! Property suite for the numeric kernels: Parseval, factorization
//! round-trips, eigenvalue/trace/determinant identities.

use num_complex::Complex64;
use plc_lab_core::numerics::{cholesky, dft, eig_hermitian, logdet_psd, ComplexMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_vec(rng: &mut ChaCha12Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Random Hermitian PSD matrix `B B† + eps I`.
fn random_psd(rng: &mut ChaCha12Rng, n: usize, eps: f64) -> ComplexMatrix<f64> {
    let b = ComplexMatrix::from_fn(n, n, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let mut m = b.mul_self_hermitian();
    for i in 0..n {
        m[(i, i)] += c(eps, 0.0);
    }
    m.symmetrize()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_holds(seed in 0u64..1000, exp in 0u32..11) {
        let n = 1usize << exp; // up to 1024
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let x = random_vec(&mut rng, n);
        let y = dft(&x, false).unwrap();
        let ex: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(((ex.sqrt() - ey.sqrt()).abs()) <= 1e-12 * ex.sqrt().max(1e-300));
    }

    #[test]
    fn dft_round_trip(seed in 0u64..1000, n in 1usize..40) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let x = random_vec(&mut rng, n);
        let y = dft(&dft(&x, false).unwrap(), true).unwrap();
        let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(num <= 1e-10 * den.max(1e-12));
    }

    #[test]
    fn cholesky_round_trip_small(seed in 0u64..1000, n in 1usize..24) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let r = random_psd(&mut rng, n, 1e-3);
        let f = cholesky(&r).unwrap();
        let rel = f.l.mul(&f.l.hermitian()).sub(&r).frobenius_norm() / r.frobenius_norm();
        prop_assert!(rel <= 1e-9, "relative error {}", rel);
    }

    #[test]
    fn eig_trace_and_determinant(seed in 0u64..1000, n in 1usize..16) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = random_psd(&mut rng, n, 0.1);
        let e = eig_hermitian(&a).unwrap();
        let tr = a.trace().re;
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - tr).abs() <= 1e-9 * tr.abs().max(1.0));

        // product of eigenvalues against the Cholesky determinant
        let ld_chol = logdet_psd(&a).unwrap();
        let ld_eig: f64 = e.values.iter().map(|v| v.ln()).sum();
        prop_assert!((ld_chol - ld_eig).abs() <= 1e-7 * ld_chol.abs().max(1.0));
    }

    #[test]
    fn eig_reconstruction(seed in 0u64..1000, n in 1usize..12) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = random_psd(&mut rng, n, 0.0);
        let e = eig_hermitian(&a).unwrap();
        let lam = ComplexMatrix::from_diag(&e.values);
        let back = e.vectors.mul(&lam).mul(&e.vectors.hermitian());
        let rel = back.sub(&a).frobenius_norm() / a.frobenius_norm().max(1e-12);
        prop_assert!(rel <= 1e-8);
        let unit = e.vectors.hermitian().mul(&e.vectors)
            .sub(&ComplexMatrix::identity(n))
            .frobenius_norm();
        prop_assert!(unit <= 1e-9 * (n as f64).sqrt());
    }
}

#[test]
fn cholesky_round_trip_640() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let n = 640;
    let r = random_psd(&mut rng, n, 1.0);
    let f = cholesky(&r).unwrap();
    let rel = f.l.mul(&f.l.hermitian()).sub(&r).frobenius_norm() / r.frobenius_norm();
    assert!(rel <= 1e-9, "relative error {}", rel);
}

#[test]
fn logdet_matches_eigenvalue_sum_128() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let n = 128;
    let a = random_psd(&mut rng, n, 0.5);
    let ld = logdet_psd(&a).unwrap();
    let e = eig_hermitian(&a).unwrap();
    let sum: f64 = e.values.iter().map(|v| v.ln()).sum();
    assert!(
        (ld - sum).abs() <= 1e-8 * ld.abs().max(1.0),
        "{} vs {}",
        ld,
        sum
    );
}
