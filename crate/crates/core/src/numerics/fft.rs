use super::{NumericsError, Scalar};
use num_complex::Complex;

/// Unitary discrete Fourier transform: `1/sqrt(N)` scaling in both
/// directions, so `dft(dft(x), true) == x` and the transform matrix is
/// unitary. Uses an in-place radix-2 pass when the length is a power of two
/// and the direct summation otherwise.
pub fn dft<T: Scalar>(x: &[Complex<T>], inverse: bool) -> Result<Vec<Complex<T>>, NumericsError> {
    let mut out = dft_unscaled(x, inverse)?;
    let scale = T::one() / T::from_usize(x.len()).unwrap().sqrt();
    for z in &mut out {
        *z = z.scale(scale);
    }
    Ok(out)
}

/// DFT without any scaling: `X_k = sum_n x_n e^{-+j 2 pi k n / N}`.
pub fn dft_unscaled<T: Scalar>(
    x: &[Complex<T>],
    inverse: bool,
) -> Result<Vec<Complex<T>>, NumericsError> {
    let n = x.len();
    if n == 0 {
        return Err(NumericsError::EmptySequence);
    }
    if n.is_power_of_two() {
        let mut buf = x.to_vec();
        radix2_in_place(&mut buf, inverse);
        Ok(buf)
    } else {
        Ok(direct(x, inverse))
    }
}

fn direct<T: Scalar>(x: &[Complex<T>], inverse: bool) -> Vec<Complex<T>> {
    let n = x.len();
    let sign = if inverse { T::one() } else { -T::one() };
    let step = sign * (T::PI() + T::PI()) / T::from_usize(n).unwrap();
    (0..n)
        .map(|k| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, &xi) in x.iter().enumerate() {
                let ang = step * T::from_usize(k * i % n).unwrap();
                acc += xi * Complex::new(ang.cos(), ang.sin());
            }
            acc
        })
        .collect()
}

fn radix2_in_place<T: Scalar>(buf: &mut [Complex<T>], inverse: bool) {
    let n = buf.len();
    if n == 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { T::one() } else { -T::one() };
    let mut len = 2;
    while len <= n {
        let ang = sign * (T::PI() + T::PI()) / T::from_usize(len).unwrap();
        let wlen = Complex::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex::new(T::one(), T::zero());
            for i in 0..len / 2 {
                let a = buf[start + i];
                let b = buf[start + i + len / 2] * w;
                buf[start + i] = a + b;
                buf[start + i + len / 2] = a - b;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: &[Complex64], b: &[Complex64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).norm() < tol, "index {}: {} vs {}", i, x, y);
        }
    }

    #[test]
    fn impulse_gives_flat_unitary_spectrum() {
        let x = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let y = dft(&x, false).unwrap();
        assert_close(&y, &[c(0.5, 0.0); 4], 1e-15);
    }

    #[test]
    fn four_point_hand_oracle() {
        // direct sum for x = [1,1,0,0]: X = [2, 1-j, 0, 1+j], unitary /2
        let x = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let y = dft(&x, false).unwrap();
        let expected = [c(1.0, 0.0), c(0.5, -0.5), c(0.0, 0.0), c(0.5, 0.5)];
        assert_close(&y, &expected, 1e-14);
    }

    #[test]
    fn round_trip_length_8() {
        let x: Vec<Complex64> = (0..8)
            .map(|i| c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let y = dft(&dft(&x, false).unwrap(), true).unwrap();
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).sum();
        let norm: f64 = x.iter().map(|a| a.norm()).sum();
        assert!(err / norm < 1e-10);
    }

    #[test]
    fn non_power_of_two_matches_direct_definition() {
        let x: Vec<Complex64> = (0..6).map(|i| c(i as f64, -(i as f64) * 0.5)).collect();
        let y = dft(&x, false).unwrap();
        let z = dft(&y, true).unwrap();
        assert_close(&x, &z, 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        let x: [Complex64; 0] = [];
        assert!(matches!(dft(&x, false), Err(NumericsError::EmptySequence)));
    }

    #[test]
    fn radix2_agrees_with_direct_sum() {
        let x: Vec<Complex64> = (0..16)
            .map(|i| c((i as f64).cos(), (2.0 * i as f64).sin()))
            .collect();
        let fast = dft_unscaled(&x, false).unwrap();
        let slow = direct(&x, false);
        assert_close(&fast, &slow, 1e-11);
    }

    #[test]
    fn works_in_f32() {
        let x = [
            Complex::<f32>::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let y = dft(&x, false).unwrap();
        for z in y {
            assert!((z.re - 0.5).abs() < 1e-6 && z.im.abs() < 1e-6);
        }
    }
}
