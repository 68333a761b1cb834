use super::NoiseGenError;
use crate::{Cplx, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// FRESH filter bank: K branches of M_r x M_r FIR filter matrices. Branch k
/// operates on the input shifted by the cyclic frequency `alpha_k = k / K`,
/// so the output statistics repeat with period K samples.
#[derive(Debug, Clone)]
pub struct FreshFilterBank {
    m_r: usize,
    tap_len: usize,
    /// `filters[k][r * m_r + t]` is the FIR tap vector mapping excitation
    /// stream t to output phase r in branch k.
    filters: Vec<Vec<Vec<Cplx>>>,
}

impl FreshFilterBank {
    pub fn new(m_r: usize, filters: Vec<Vec<Vec<Cplx>>>) -> Result<Self, NoiseGenError> {
        let invalid = |message: String| NoiseGenError::InvalidParameter {
            name: "filters",
            message,
        };
        if m_r == 0 {
            return Err(invalid("phase count must be positive".into()));
        }
        if filters.is_empty() {
            return Err(invalid("at least one branch required".into()));
        }
        let tap_len = filters.first().and_then(|b| b.first()).map_or(0, Vec::len);
        if tap_len == 0 {
            return Err(invalid("filters must have at least one tap".into()));
        }
        for (k, branch) in filters.iter().enumerate() {
            if branch.len() != m_r * m_r {
                return Err(invalid(format!(
                    "branch {} has {} filters, expected {}",
                    k,
                    branch.len(),
                    m_r * m_r
                )));
            }
            for taps in branch {
                if taps.len() != tap_len {
                    return Err(invalid(format!("branch {} has ragged tap lengths", k)));
                }
                if taps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(invalid(format!("branch {} has non-finite taps", k)));
                }
            }
        }
        Ok(FreshFilterBank {
            m_r,
            tap_len,
            filters,
        })
    }

    /// Number of branches K.
    pub fn branches(&self) -> usize {
        self.filters.len()
    }

    /// Samples per statistical cycle of the generated noise (equal to K).
    pub fn period_samples(&self) -> usize {
        self.branches()
    }

    pub fn phases(&self) -> usize {
        self.m_r
    }

    pub fn tap_len(&self) -> usize {
        self.tap_len
    }

    /// Cyclic frequency of branch k, `k / K`, strictly increasing in [0, 1).
    pub fn cyclic_frequency(&self, k: usize) -> Real {
        k as Real / self.branches() as Real
    }

    pub fn cyclic_frequencies(&self) -> Vec<Real> {
        (0..self.branches())
            .map(|k| self.cyclic_frequency(k))
            .collect()
    }

    pub fn taps(&self, k: usize, r: usize, t: usize) -> &[Cplx] {
        &self.filters[k][r * self.m_r + t]
    }

    /// Single-phase bank made of the (phase, phase) diagonal filters.
    pub fn extract_siso(&self, phase: usize) -> Result<FreshFilterBank, NoiseGenError> {
        let filters = (0..self.branches())
            .map(|k| vec![self.taps(k, phase, phase).to_vec()])
            .collect();
        FreshFilterBank::new(1, filters)
    }
}

/// Deterministic synthetic bank. Tap magnitudes decay geometrically at rate
/// `decay`, off-diagonal (cross) filters are scaled by `coupling` relative
/// to the diagonal, and branch energy decays with the branch index so the
/// low cyclic frequencies dominate.
pub fn synth_filter_bank(
    seed: u64,
    k: usize,
    l_f: usize,
    m_r: usize,
    decay: Real,
    coupling: Real,
) -> Result<FreshFilterBank, NoiseGenError> {
    let bad = |name: &'static str, message: &str| NoiseGenError::InvalidParameter {
        name,
        message: message.into(),
    };
    if k == 0 {
        return Err(bad("k", "branch count must be positive"));
    }
    if l_f == 0 {
        return Err(bad("l_f", "filter length must be positive"));
    }
    if m_r == 0 {
        return Err(bad("m_r", "phase count must be positive"));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(bad("decay", "decay must be in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&coupling) {
        return Err(bad("coupling", "coupling must be in [0, 1]"));
    }

    const BRANCH_DECAY: Real = 0.75;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut filters = Vec::with_capacity(k);
    for branch in 0..k {
        let branch_scale = BRANCH_DECAY.powi(branch as i32);
        let mut mats = Vec::with_capacity(m_r * m_r);
        for r in 0..m_r {
            for t in 0..m_r {
                let cross = if r == t { 1.0 } else { coupling };
                let raw: Vec<Real> = (0..l_f)
                    .map(|i| {
                        let g: Real = rng.gen_range(-1.0..1.0);
                        g * decay.powi(i as i32)
                    })
                    .collect();
                // normalize to unit energy so branch/coupling scales are exact
                let norm = raw.iter().map(|v| v * v).sum::<Real>().sqrt().max(1e-300);
                let taps = raw
                    .into_iter()
                    .map(|v| Cplx::new(v / norm * branch_scale * cross, 0.0))
                    .collect();
                mats.push(taps);
            }
        }
        filters.push(mats);
    }
    FreshFilterBank::new(m_r, filters)
}

/// Writes a bank as CSV rows `branch,row,col,tap_index,re,im` (row/col are
/// 1-based phase indices, branch and tap_index 0-based).
pub fn write_bank_csv(bank: &FreshFilterBank, path: &Path) -> Result<(), NoiseGenError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "branch,row,col,tap_index,re,im")?;
    for k in 0..bank.branches() {
        for r in 0..bank.phases() {
            for t in 0..bank.phases() {
                for (i, z) in bank.taps(k, r, t).iter().enumerate() {
                    writeln!(w, "{},{},{},{},{},{}", k, r + 1, t + 1, i, z.re, z.im)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_bank_csv(path: &Path) -> Result<FreshFilterBank, NoiseGenError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut entries: Vec<(usize, usize, usize, usize, Cplx)> = Vec::new();
    let mut max_branch = 0usize;
    let mut max_phase = 0usize;
    let mut max_tap = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(NoiseGenError::Parse {
                line: lineno,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| {
            s.trim().parse::<usize>().map_err(|e| NoiseGenError::Parse {
                line: lineno,
                message: format!("bad {}: {}", what, e),
            })
        };
        let parse_real = |s: &str, what: &str| {
            s.trim().parse::<Real>().map_err(|e| NoiseGenError::Parse {
                line: lineno,
                message: format!("bad {}: {}", what, e),
            })
        };
        let branch = parse_usize(fields[0], "branch")?;
        let row = parse_usize(fields[1], "row")?;
        let col = parse_usize(fields[2], "col")?;
        if row == 0 || col == 0 {
            return Err(NoiseGenError::Parse {
                line: lineno,
                message: "row/col are 1-based".into(),
            });
        }
        let tap = parse_usize(fields[3], "tap_index")?;
        let re = parse_real(fields[4], "re")?;
        let im = parse_real(fields[5], "im")?;
        max_branch = max_branch.max(branch);
        max_phase = max_phase.max(row.max(col));
        max_tap = max_tap.max(tap);
        entries.push((branch, row - 1, col - 1, tap, Cplx::new(re, im)));
    }
    if entries.is_empty() {
        return Err(NoiseGenError::Parse {
            line: 0,
            message: "no tap rows".into(),
        });
    }
    let (k, m_r, l_f) = (max_branch + 1, max_phase, max_tap + 1);
    let mut filters = vec![vec![vec![Cplx::new(0.0, 0.0); l_f]; m_r * m_r]; k];
    for (branch, r, t, tap, z) in entries {
        filters[branch][r * m_r + t][tap] = z;
    }
    FreshFilterBank::new(m_r, filters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_is_deterministic() {
        let a = synth_filter_bank(11, 3, 5, 2, 0.8, 0.4).unwrap();
        let b = synth_filter_bank(11, 3, 5, 2, 0.8, 0.4).unwrap();
        for k in 0..3 {
            for r in 0..2 {
                for t in 0..2 {
                    assert_eq!(a.taps(k, r, t), b.taps(k, r, t));
                }
            }
        }
    }

    #[test]
    fn zero_coupling_zeroes_cross_filters() {
        let bank = synth_filter_bank(11, 3, 5, 2, 0.8, 0.0).unwrap();
        for k in 0..3 {
            assert!(bank.taps(k, 0, 1).iter().all(|z| z.norm() == 0.0));
            assert!(bank.taps(k, 1, 0).iter().all(|z| z.norm() == 0.0));
            assert!(bank.taps(k, 0, 0).iter().any(|z| z.norm() > 0.0));
        }
    }

    #[test]
    fn full_scale_bank_shape() {
        let bank = synth_filter_bank(1, 19, 65, 2, 0.9, 0.5).unwrap();
        assert_eq!(bank.branches(), 19);
        assert_eq!(bank.tap_len(), 65);
        assert_eq!(bank.phases(), 2);
        // 19 branches x 4 FIR vectors of length 65
        let mut count = 0;
        for k in 0..19 {
            for r in 0..2 {
                for t in 0..2 {
                    assert_eq!(bank.taps(k, r, t).len(), 65);
                    count += 1;
                }
            }
        }
        assert_eq!(count, 76);
        let alphas = bank.cyclic_frequencies();
        assert!(alphas.windows(2).all(|w| w[0] < w[1]));
        assert!(alphas.iter().all(|&a| (0.0..1.0).contains(&a)));
    }

    #[test]
    fn branch_energy_decays() {
        let bank = synth_filter_bank(2, 6, 8, 1, 0.9, 0.0).unwrap();
        let energy = |k: usize| -> f64 { bank.taps(k, 0, 0).iter().map(|z| z.norm_sqr()).sum() };
        for k in 1..6 {
            assert!(energy(k) < energy(k - 1) * 1.05, "branch {} energy grew", k);
        }
    }

    #[test]
    fn csv_round_trip() {
        let bank = synth_filter_bank(4, 3, 5, 2, 0.8, 0.6).unwrap();
        let dir = std::env::temp_dir().join("plc_lab_bank_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bank.csv");
        write_bank_csv(&bank, &path).unwrap();
        let copy = read_bank_csv(&path).unwrap();
        assert_eq!(copy.branches(), bank.branches());
        assert_eq!(copy.phases(), bank.phases());
        for k in 0..bank.branches() {
            for r in 0..2 {
                for t in 0..2 {
                    for (a, b) in bank.taps(k, r, t).iter().zip(copy.taps(k, r, t)) {
                        assert!((a - b).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
