//! Statistical behavior of the whitening chain: concentration of the
//! autocorrelation estimate, exact population whitening, the 1/sqrt(N)
//! error rate of estimated whiteners, and structural effects on the
//! composite channel.

use num_complex::Complex64;
use plc_lab_core::analysis::PortionPartition;
use plc_lab_core::channel::{build_conv_matrix, synth_channel, ConvKind};
use plc_lab_core::noisegen::{gen_awgn, NoiseTrace};
use plc_lab_core::numerics::cholesky;
use plc_lab_core::whitening::{
    composite_channel, composite_channel_matrix, empirical_covariance, estimate_autocorr,
    make_whitener, whiten_block, PortionCorrelation, Whitener,
};
use plc_lab_core::{Cplx, Mat, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn c(re: f64, im: f64) -> Cplx {
    Complex64::new(re, im)
}

/// Random real symmetric positive-definite matrix.
fn random_spd(rng: &mut ChaCha12Rng, n: usize) -> Mat {
    let b = Mat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
    let mut m = b.mul_self_hermitian();
    for i in 0..n {
        m[(i, i)] += c(0.5, 0.0);
    }
    m.symmetrize()
}

fn whitener_from(r: &Mat) -> Whitener {
    make_whitener(&PortionCorrelation {
        portion: 0,
        r: r.clone(),
        n_periods: usize::MAX,
        rank_warning: false,
    })
    .unwrap()
}

/// Draws one vector with covariance `L L†` from seeded white samples.
fn draw_correlated(l: &Mat, rng: &mut ChaCha12Rng) -> Vec<Cplx> {
    use rand_distr::{Distribution, StandardNormal};
    let g: Vec<Cplx> = (0..l.cols())
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            c(v, 0.0)
        })
        .collect();
    l.mul_vec(&g)
}

#[test]
fn white_noise_estimate_concentrates_to_identity() {
    // dimension 16 (2 phases x 8 payload samples), 10x periods: the RMS
    // entry error of the estimate stays below 10% of the unit diagonal
    let dim = 16;
    let n_period = 10 * dim;
    let spp = 40;
    let a = gen_awgn(41, spp * n_period, 1.0).unwrap();
    let b = gen_awgn(42, spp * n_period, 1.0).unwrap();
    let trace = NoiseTrace::new(vec![a, b], 1.0, spp, n_period).unwrap();
    let partition = PortionPartition::new(spp, 8, 2, 1).unwrap();
    let corr = estimate_autocorr(&trace, &partition, 0, n_period).unwrap();
    assert!(!corr.rank_warning);
    let rms = corr.r.sub(&Mat::identity(dim)).frobenius_norm() / dim as Real;
    assert!(rms < 0.10, "RMS entry error {}", rms);
}

#[test]
fn population_whitener_yields_identity_covariance() {
    // whitener built from the true covariance; 1e6 fresh draws
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let dim = 8;
    let r0 = random_spd(&mut rng, dim);
    let l0 = cholesky(&r0).unwrap().l;
    let w = whitener_from(&r0);

    let n = 1_000_000;
    let mut outer = Mat::zeros(dim, dim);
    for _ in 0..n {
        let z = draw_correlated(&l0, &mut rng);
        let wz = whiten_block(&w, &z).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                outer[(i, j)] += wz[i] * wz[j].conj();
            }
        }
    }
    let rww = outer.scale(1.0 / n as Real);
    let dev = rww.sub(&Mat::identity(dim)).frobenius_norm() / (dim as Real).sqrt();
    assert!(dev < 0.02, "normalized deviation {}", dev);
}

#[test]
fn whitening_the_estimation_ensemble_gives_identity() {
    // covariance estimated from the same ensemble it whitens: the sample
    // covariance of the whitened vectors is the identity up to rounding
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let dim = 16;
    let n_period = 20 * dim;
    let r0 = random_spd(&mut rng, dim);
    let l0 = cholesky(&r0).unwrap().l;
    let ensemble: Vec<Vec<Cplx>> = (0..n_period)
        .map(|_| draw_correlated(&l0, &mut rng))
        .collect();

    let r_hat = empirical_covariance(&ensemble, true);
    let w = whitener_from(&r_hat);
    let mean: Vec<Cplx> = (0..dim)
        .map(|i| {
            ensemble
                .iter()
                .map(|v| v[i])
                .sum::<Cplx>()
                .unscale(n_period as Real)
        })
        .collect();
    let whitened: Vec<Vec<Cplx>> = ensemble
        .iter()
        .map(|v| {
            let centered: Vec<Cplx> = v.iter().zip(&mean).map(|(a, m)| a - m).collect();
            whiten_block(&w, &centered).unwrap()
        })
        .collect();
    let rww = empirical_covariance(&whitened, false);
    let dev = rww.sub(&Mat::identity(dim)).frobenius_norm() / (dim as Real).sqrt();
    assert!(dev <= 0.15, "normalized deviation {}", dev);
    assert!(dev < 1e-10, "should be identity to rounding, got {}", dev);
}

#[test]
fn estimated_whitener_error_decays_like_inverse_sqrt() {
    // whiteners from N-period estimates applied to the *true* covariance:
    // || L_hat^{-1} R0 L_hat^{-dagger} - I || ~ 1/sqrt(N)
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let dim = 8;
    let r0 = random_spd(&mut rng, dim);
    let l0 = cholesky(&r0).unwrap().l;

    let mut errors = Vec::new();
    for &n in &[80usize, 320, 1280] {
        let mut acc = 0.0;
        let reps = 5;
        for _ in 0..reps {
            let ensemble: Vec<Vec<Cplx>> = (0..n).map(|_| draw_correlated(&l0, &mut rng)).collect();
            let r_hat = empirical_covariance(&ensemble, true);
            let w = whitener_from(&r_hat);
            // population covariance of the whitened process, exactly
            let half = w.factor().solve_matrix(&r0).unwrap();
            let rww = w
                .factor()
                .solve_matrix(&half.hermitian())
                .unwrap()
                .hermitian();
            acc += rww.sub(&Mat::identity(dim)).frobenius_norm();
        }
        errors.push(acc / reps as Real);
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not decreasing: {:?}",
        errors
    );
    let ratio = errors[0] / errors[2];
    // 1/sqrt(N) over a 16x span of N predicts a factor of 4
    assert!(
        (2.0..=8.0).contains(&ratio),
        "rate ratio {} (errors {:?})",
        ratio,
        errors
    );
}

#[test]
fn triangular_solve_matches_explicit_inverse() {
    // Gauss-Jordan inverse as an independent route, dims up to 64
    fn invert(m: &Mat) -> Mat {
        let n = m.rows();
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = m[(i, j)];
            }
            aug[(i, n + i)] = c(1.0, 0.0);
        }
        for col in 0..n {
            let mut pivot = col;
            for row in col + 1..n {
                if aug[(row, col)].norm() > aug[(pivot, col)].norm() {
                    pivot = row;
                }
            }
            for k in 0..2 * n {
                let tmp = aug[(col, k)];
                aug[(col, k)] = aug[(pivot, k)];
                aug[(pivot, k)] = tmp;
            }
            let inv = c(1.0, 0.0) / aug[(col, col)];
            for k in 0..2 * n {
                aug[(col, k)] *= inv;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = aug[(row, col)];
                for k in 0..2 * n {
                    let sub = f * aug[(col, k)];
                    aug[(row, k)] -= sub;
                }
            }
        }
        Mat::from_fn(n, n, |i, j| aug[(i, n + j)])
    }

    let mut rng = ChaCha12Rng::seed_from_u64(31);
    for &dim in &[2usize, 8, 64] {
        let r = random_spd(&mut rng, dim);
        let w = whitener_from(&r);
        let l_inv = invert(&w.factor().l);
        let z: Vec<Cplx> = (0..dim)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let via_solve = whiten_block(&w, &z).unwrap();
        let via_inverse = l_inv.mul_vec(&z);
        for (a, b) in via_solve.iter().zip(&via_inverse) {
            assert!((a - b).norm() < 1e-10, "dim {}: {} vs {}", dim, a, b);
        }
    }
}

#[test]
fn whitening_breaks_circulant_structure() {
    let chan = synth_channel(13, 1, 1, 3, 0.9).unwrap();
    let n_p = 8;
    let circ = build_conv_matrix(&chan, ConvKind::Circulant, n_p, 2).unwrap();

    fn circulant_deviation(m: &Mat) -> Real {
        let n = m.rows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (m[(i, j)] - m[((i + 1) % n, (j + 1) % n)]).norm();
                dev = dev.max(d);
            }
        }
        dev
    }
    assert!(circulant_deviation(&circ.matrix) < 1e-12);

    // non-diagonal covariance: tridiagonal correlation along time
    let mut r = Mat::identity(n_p);
    for i in 0..n_p - 1 {
        r[(i, i + 1)] = c(0.45, 0.0);
        r[(i + 1, i)] = c(0.45, 0.0);
    }
    let w = whitener_from(&r);
    let composite = composite_channel(&w, &circ).unwrap();
    assert!(
        circulant_deviation(&composite) > 1e-3,
        "composite unexpectedly circulant"
    );

    // sanity: identity covariance keeps the structure
    let ident = whitener_from(&Mat::identity(n_p));
    let same = composite_channel_matrix(&ident, &circ.matrix).unwrap();
    assert!(circulant_deviation(&same) < 1e-12);
}
