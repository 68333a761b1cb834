use super::{ChannelError, MimoChannel};
use crate::numerics::dft_unscaled;
use crate::{Cplx, Mat};

/// Which block convolution matrix to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    /// Full linear convolution over the CP-extended block:
    /// `(M_r (N_p+N_cp)) x (M_t (N_p+N_cp))`, block-lower-banded.
    LinearFull,
    /// Linear convolution with the ISI rows dropped:
    /// `(M_r N_p) x (M_t (N_p+N_cp))`.
    LinearTruncated,
    /// Block-circulant over the payload: `(M_r N_p) x (M_t N_p)`.
    Circulant,
}

/// Dense block convolution matrix. Stacked vectors are time-major and
/// phase-minor: index `n * M + phase`.
#[derive(Debug, Clone)]
pub struct BlockConvMatrix {
    pub kind: ConvKind,
    pub matrix: Mat,
    pub n_p: usize,
    pub n_cp: usize,
    pub m_r: usize,
    pub m_t: usize,
}

/// Builds the requested convolution-matrix view of the channel.
pub fn build_conv_matrix(
    chan: &MimoChannel,
    kind: ConvKind,
    n_p: usize,
    n_cp: usize,
) -> Result<BlockConvMatrix, ChannelError> {
    if n_p == 0 {
        return Err(ChannelError::InvalidParameter {
            name: "n_p",
            message: "payload length must be positive".into(),
        });
    }
    let l = chan.memory();
    let (m_r, m_t) = (chan.m_r(), chan.m_t());
    let matrix = match kind {
        ConvKind::LinearFull => {
            let n = n_p + n_cp;
            let mut m = Mat::zeros(m_r * n, m_t * n);
            for u in 0..n {
                for lag in 0..l.min(u + 1) {
                    let v = u - lag;
                    place_block(&mut m, chan.tap(lag), u, v, m_r, m_t);
                }
            }
            m
        }
        ConvKind::LinearTruncated => {
            // output time u corresponds to absolute time u + n_cp over the
            // CP-extended inputs, so block (u, v) = H[(u + n_cp) - v]
            let cols = n_p + n_cp;
            let mut m = Mat::zeros(m_r * n_p, m_t * cols);
            for u in 0..n_p {
                let abs = u + n_cp;
                for lag in 0..l.min(abs + 1) {
                    let v = abs - lag;
                    place_block(&mut m, chan.tap(lag), u, v, m_r, m_t);
                }
            }
            m
        }
        ConvKind::Circulant => {
            let mut m = Mat::zeros(m_r * n_p, m_t * n_p);
            for v in 0..n_p {
                for lag in 0..l {
                    let u = (v + lag) % n_p;
                    accumulate_block(&mut m, chan.tap(lag), u, v, m_r, m_t);
                }
            }
            m
        }
    };
    Ok(BlockConvMatrix {
        kind,
        matrix,
        n_p,
        n_cp,
        m_r,
        m_t,
    })
}

fn place_block(m: &mut Mat, tap: &Mat, u: usize, v: usize, m_r: usize, m_t: usize) {
    for r in 0..m_r {
        for t in 0..m_t {
            m[(u * m_r + r, v * m_t + t)] = tap[(r, t)];
        }
    }
}

fn accumulate_block(m: &mut Mat, tap: &Mat, u: usize, v: usize, m_r: usize, m_t: usize) {
    for r in 0..m_r {
        for t in 0..m_t {
            m[(u * m_r + r, v * m_t + t)] += tap[(r, t)];
        }
    }
}

/// Per-subcarrier channel matrices of a circulant view: `H_k[r][t]` is the
/// plain DFT sum of the (r, t) tap sequence at bin k. The block DFT
/// conjugation of the circulant equals `blockdiag(H_k)`.
pub fn fft_diagonalize(circ: &BlockConvMatrix) -> Result<Vec<Mat>, ChannelError> {
    if circ.kind != ConvKind::Circulant {
        return Err(ChannelError::NotCirculant(circ.kind));
    }
    let (n_p, m_r, m_t) = (circ.n_p, circ.m_r, circ.m_t);
    let mut spectra = vec![Mat::zeros(m_r, m_t); n_p];
    for r in 0..m_r {
        for t in 0..m_t {
            // first block column carries the wrapped tap sequence
            let seq: Vec<Cplx> = (0..n_p).map(|l| circ.matrix[(l * m_r + r, t)]).collect();
            let bins = dft_unscaled(&seq, false).expect("non-empty sequence");
            for (k, b) in bins.into_iter().enumerate() {
                spectra[k][(r, t)] = b;
            }
        }
    }
    Ok(spectra)
}

/// Block-structured unitary DFT operator over `n` time indices and `phases`
/// interleaved phases: entry ((k, r), (u, r')) = delta_{r r'} e^{-j2pi ku/n} / sqrt(n).
pub fn block_dft_matrix(n: usize, phases: usize) -> Mat {
    let scale = 1.0 / (n as f64).sqrt();
    Mat::from_fn(n * phases, n * phases, |row, col| {
        let (k, r) = (row / phases, row % phases);
        let (u, r2) = (col / phases, col % phases);
        if r != r2 {
            return Cplx::new(0.0, 0.0);
        }
        let ang = -2.0 * std::f64::consts::PI * (k * u % n) as f64 / n as f64;
        Cplx::new(ang.cos() * scale, ang.sin() * scale)
    })
}
