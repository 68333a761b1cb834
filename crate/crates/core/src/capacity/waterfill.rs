use super::{retain_rank, CapacityError};
use crate::Real;

/// Power allocation over eigenchannels under a total-power constraint.
#[derive(Debug, Clone)]
pub struct PowerBudget {
    /// Total power distributed over the active eigenchannels.
    pub total: Real,
    /// Water level mu.
    pub level: Real,
    /// Per-eigenchannel allocations, aligned with the input eigenvalues.
    pub allocations: Vec<Real>,
}

/// Waterfilling: `eps_i = max(0, mu - 1/delta_i)` with the level `mu` fixed
/// by `sum eps_i = p_total`. Solved exactly by the active-set recursion over
/// the descending eigenvalues. Returns the budget and the resulting capacity
/// `sum log2(1 + eps_i delta_i)` in bits.
pub fn waterfill(eigs: &[Real], p_total: Real) -> Result<(PowerBudget, Real), CapacityError> {
    if !(p_total > 0.0) {
        return Err(CapacityError::NonPositivePower(p_total));
    }
    // work on the positive spectrum, descending, remembering positions
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&a, &b| eigs[b].partial_cmp(&eigs[a]).unwrap());
    let positive = retain_rank(eigs);
    let k = positive.len();
    if k == 0 {
        return Err(CapacityError::ZeroRankChannel);
    }
    let sorted: Vec<Real> = {
        let mut s: Vec<Real> = order.iter().map(|&i| eigs[i]).collect();
        s.truncate(k);
        s
    };

    // largest active count m whose water level keeps the weakest active
    // channel non-negative
    let mut inv_prefix = 0.0;
    let mut inv_sums = Vec::with_capacity(k);
    for &d in &sorted {
        inv_prefix += 1.0 / d;
        inv_sums.push(inv_prefix);
    }
    let mut active = 1;
    let mut level = p_total + inv_sums[0];
    for m in (1..=k).rev() {
        let mu = (p_total + inv_sums[m - 1]) / m as Real;
        if mu - 1.0 / sorted[m - 1] >= 0.0 {
            active = m;
            level = mu;
            break;
        }
    }

    let mut allocations = vec![0.0; eigs.len()];
    let mut bits = 0.0;
    for (rank, &pos) in order.iter().take(active).enumerate() {
        let eps = level - 1.0 / sorted[rank];
        allocations[pos] = eps;
        bits += (level * sorted[rank]).log2();
    }
    Ok((
        PowerBudget {
            total: p_total,
            level,
            allocations,
        },
        bits,
    ))
}
