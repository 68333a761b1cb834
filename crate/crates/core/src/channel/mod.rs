//! MIMO FIR channel: tap storage and CSV interchange, cyclic-prefix
//! insertion/removal, block passage through the channel, and the linear /
//! truncated / circulant convolution-matrix views with their per-subcarrier
//! diagonalization.

mod convmat;

pub use convmat::{
    block_dft_matrix, build_conv_matrix, fft_diagonalize, BlockConvMatrix, ConvKind,
};

use crate::{Cplx, Mat, Real};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("insufficient cyclic prefix: n_cp = {n_cp} but channel memory needs {required}")]
    InsufficientCp { n_cp: usize, required: usize },
    #[error("cyclic prefix {n_cp} must be shorter than the payload {n_p}")]
    CpTooLong { n_cp: usize, n_p: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("expected a circulant convolution matrix, got {0:?}")]
    NotCirculant(ConvKind),
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
}

/// `M_r x M_t` FIR channel of memory L: taps `H[0..L]`, each an M_r x M_t
/// gain matrix. Downstream use requires `n_cp >= L - 1`.
#[derive(Debug, Clone)]
pub struct MimoChannel {
    m_r: usize,
    m_t: usize,
    taps: Vec<Mat>,
}

impl MimoChannel {
    pub fn new(m_r: usize, m_t: usize, taps: Vec<Mat>) -> Result<Self, ChannelError> {
        let invalid = |message: String| ChannelError::InvalidParameter {
            name: "taps",
            message,
        };
        if m_r == 0 || m_t == 0 {
            return Err(invalid("antenna counts must be positive".into()));
        }
        if taps.is_empty() {
            return Err(invalid("memory length must be at least 1".into()));
        }
        for (l, tap) in taps.iter().enumerate() {
            if tap.rows() != m_r || tap.cols() != m_t {
                return Err(invalid(format!(
                    "tap {} is {}x{}, expected {}x{}",
                    l,
                    tap.rows(),
                    tap.cols(),
                    m_r,
                    m_t
                )));
            }
            if !tap.is_finite() {
                return Err(invalid(format!("tap {} has non-finite entries", l)));
            }
        }
        Ok(MimoChannel { m_r, m_t, taps })
    }

    /// SISO channel from a scalar tap sequence.
    pub fn siso(taps: &[Cplx]) -> Result<Self, ChannelError> {
        let mats = taps.iter().map(|&h| Mat::from_fn(1, 1, |_, _| h)).collect();
        MimoChannel::new(1, 1, mats)
    }

    pub fn m_r(&self) -> usize {
        self.m_r
    }

    pub fn m_t(&self) -> usize {
        self.m_t
    }

    pub fn memory(&self) -> usize {
        self.taps.len()
    }

    pub fn tap(&self, l: usize) -> &Mat {
        &self.taps[l]
    }

    /// Scalar tap sequence of one (receive, transmit) pair.
    pub fn impulse_response(&self, r: usize, t: usize) -> Vec<Cplx> {
        self.taps.iter().map(|m| m[(r, t)]).collect()
    }

    /// Mean received power gain per receive antenna for unit-power inputs:
    /// `(1/M_r) sum_{r,t,l} |h^{(r,t)}[l]|^2`.
    pub fn mean_power_gain(&self) -> Real {
        let total: Real = self
            .taps
            .iter()
            .map(|m| m.data().iter().map(|z| z.norm_sqr()).sum::<Real>())
            .sum();
        total / self.m_r as Real
    }
}

/// Loads a channel from CSV rows `rx,tx,lag,re,im` (rx/tx 1-based, lag
/// 0-based). Missing lags default to zero. When `declared_memory` is given,
/// rows at or beyond that lag are rejected.
pub fn load_channel(
    path: &Path,
    declared_memory: Option<usize>,
) -> Result<MimoChannel, ChannelError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut entries: Vec<(usize, usize, usize, Cplx)> = Vec::new();
    let mut m_r = 0usize;
    let mut m_t = 0usize;
    let mut memory = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let row = idx + 1;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(ChannelError::Parse {
                row,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| {
            s.trim().parse::<usize>().map_err(|e| ChannelError::Parse {
                row,
                message: format!("bad {}: {}", what, e),
            })
        };
        let parse_real = |s: &str, what: &str| {
            s.trim().parse::<Real>().map_err(|e| ChannelError::Parse {
                row,
                message: format!("bad {}: {}", what, e),
            })
        };
        let rx = parse_usize(fields[0], "rx")?;
        let tx = parse_usize(fields[1], "tx")?;
        let lag = parse_usize(fields[2], "lag")?;
        let re = parse_real(fields[3], "re")?;
        let im = parse_real(fields[4], "im")?;
        if rx == 0 || tx == 0 {
            return Err(ChannelError::Parse {
                row,
                message: "rx/tx are 1-based".into(),
            });
        }
        if let Some(limit) = declared_memory {
            if lag >= limit {
                return Err(ChannelError::Parse {
                    row,
                    message: format!("lag {} outside declared memory {}", lag, limit),
                });
            }
        }
        m_r = m_r.max(rx);
        m_t = m_t.max(tx);
        memory = memory.max(lag + 1);
        entries.push((rx - 1, tx - 1, lag, Cplx::new(re, im)));
    }
    if entries.is_empty() {
        return Err(ChannelError::Parse {
            row: 0,
            message: "no tap rows".into(),
        });
    }
    let memory = declared_memory.unwrap_or(memory);
    let mut taps = vec![Mat::zeros(m_r, m_t); memory];
    for (r, t, l, z) in entries {
        taps[l][(r, t)] = z;
    }
    MimoChannel::new(m_r, m_t, taps)
}

/// Writes the `rx,tx,lag,re,im` CSV form.
pub fn save_channel(chan: &MimoChannel, path: &Path) -> Result<(), ChannelError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "rx,tx,lag,re,im")?;
    for l in 0..chan.memory() {
        for r in 0..chan.m_r() {
            for t in 0..chan.m_t() {
                let z = chan.tap(l)[(r, t)];
                writeln!(w, "{},{},{},{},{}", r + 1, t + 1, l, z.re, z.im)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Deterministic synthetic channel with geometrically decaying random taps.
pub fn synth_channel(
    seed: u64,
    m_r: usize,
    m_t: usize,
    memory: usize,
    decay: Real,
) -> Result<MimoChannel, ChannelError> {
    use rand::{Rng, SeedableRng};
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(ChannelError::InvalidParameter {
            name: "decay",
            message: "decay must be in (0, 1]".into(),
        });
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let taps = (0..memory)
        .map(|l| {
            let scale = decay.powi(l as i32);
            Mat::from_fn(m_r, m_t, |_, _| {
                Cplx::new(
                    rng.gen_range(-1.0..1.0) * scale,
                    rng.gen_range(-1.0..1.0) * scale,
                )
            })
        })
        .collect();
    MimoChannel::new(m_r, m_t, taps)
}

/// Writes the per-subcarrier frequency response as
/// `rx,tx,subcarrier,mag_db,phase_rad` over `n_points` bins.
pub fn write_frequency_response_csv(
    chan: &MimoChannel,
    n_points: usize,
    path: &Path,
) -> Result<(), ChannelError> {
    use crate::numerics::dft_unscaled;
    if n_points < chan.memory() {
        return Err(ChannelError::InvalidParameter {
            name: "n_points",
            message: format!(
                "need at least {} bins for {} taps",
                chan.memory(),
                chan.memory()
            ),
        });
    }
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "rx,tx,subcarrier,mag_db,phase_rad")?;
    for r in 0..chan.m_r() {
        for t in 0..chan.m_t() {
            let mut taps = chan.impulse_response(r, t);
            taps.resize(n_points, Cplx::new(0.0, 0.0));
            let bins = dft_unscaled(&taps, false).expect("non-empty taps");
            for (k, b) in bins.iter().enumerate() {
                let mag_db = 20.0 * b.norm().max(1e-300).log10();
                writeln!(w, "{},{},{},{},{}", r + 1, t + 1, k, mag_db, b.arg())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Prepends the last `n_cp` samples of each stream: `[x[N_p-N_cp..], x]`.
pub fn add_cp(block: &[Vec<Cplx>], n_cp: usize) -> Result<Vec<Vec<Cplx>>, ChannelError> {
    let n_p = block.first().map_or(0, Vec::len);
    if block.iter().any(|s| s.len() != n_p) {
        return Err(ChannelError::DimensionMismatch {
            context: "streams must have equal length".into(),
        });
    }
    if n_cp >= n_p {
        return Err(ChannelError::CpTooLong { n_cp, n_p });
    }
    Ok(block
        .iter()
        .map(|s| {
            let mut out = Vec::with_capacity(n_p + n_cp);
            out.extend_from_slice(&s[n_p - n_cp..]);
            out.extend_from_slice(s);
            out
        })
        .collect())
}

/// Drops the first `n_cp` samples of each stream.
pub fn remove_cp(block: &[Vec<Cplx>], n_cp: usize) -> Result<Vec<Vec<Cplx>>, ChannelError> {
    if block.iter().any(|s| s.len() <= n_cp) {
        return Err(ChannelError::DimensionMismatch {
            context: format!("streams shorter than cyclic prefix {}", n_cp),
        });
    }
    Ok(block.iter().map(|s| s[n_cp..].to_vec()).collect())
}

/// Passes a CP-extended block through the channel and discards the prefix
/// interval: linear convolution with zero pre-history, keeping outputs over
/// the payload samples only, plus the noise block. With `n_cp >= L - 1` this
/// equals the circulant product on the payload.
pub fn pass_through(
    chan: &MimoChannel,
    x_cp: &[Vec<Cplx>],
    noise: &[Vec<Cplx>],
) -> Result<Vec<Vec<Cplx>>, ChannelError> {
    let l = chan.memory();
    if x_cp.len() != chan.m_t() {
        return Err(ChannelError::DimensionMismatch {
            context: format!(
                "{} input streams for {} transmitters",
                x_cp.len(),
                chan.m_t()
            ),
        });
    }
    if noise.len() != chan.m_r() {
        return Err(ChannelError::DimensionMismatch {
            context: format!("{} noise streams for {} receivers", noise.len(), chan.m_r()),
        });
    }
    let total = x_cp.first().map_or(0, Vec::len);
    let n_p = noise.first().map_or(0, Vec::len);
    if x_cp.iter().any(|s| s.len() != total) || noise.iter().any(|s| s.len() != n_p) {
        return Err(ChannelError::DimensionMismatch {
            context: "ragged input or noise streams".into(),
        });
    }
    if total < n_p {
        return Err(ChannelError::DimensionMismatch {
            context: format!("input length {} below payload length {}", total, n_p),
        });
    }
    let n_cp = total - n_p;
    if n_cp + 1 < l {
        return Err(ChannelError::InsufficientCp {
            n_cp,
            required: l - 1,
        });
    }

    let mut out = vec![vec![Cplx::new(0.0, 0.0); n_p]; chan.m_r()];
    for (r, out_r) in out.iter_mut().enumerate() {
        for (j, y) in out_r.iter_mut().enumerate() {
            let n = n_cp + j;
            let mut acc = noise[r][j];
            for lag in 0..l.min(n + 1) {
                let h = chan.tap(lag);
                for (t, x_t) in x_cp.iter().enumerate() {
                    acc += h[(r, t)] * x_t[n - lag];
                }
            }
            *y = acc;
        }
    }
    Ok(out)
}
