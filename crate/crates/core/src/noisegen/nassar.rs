use super::{NoiseGenError, NoiseTrace};
use crate::Real;

/// Sequential-filter noise model: inside each period, an ordered list of
/// regions selects which LTI filter shapes the white excitation.
#[derive(Debug, Clone)]
pub struct NassarModel {
    regions: Vec<NassarRegion>,
}

#[derive(Debug, Clone)]
pub struct NassarRegion {
    pub taps: Vec<Real>,
    pub len: usize,
}

/// What happens to the filter history at a region boundary. `Reset` matches
/// the sequential-switch picture (each region starts from zero history);
/// `Carry` keeps feeding the previous input samples through the new filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionStatePolicy {
    #[default]
    Reset,
    Carry,
}

impl NassarModel {
    pub fn new(regions: Vec<NassarRegion>) -> Result<Self, NoiseGenError> {
        let invalid = |message: String| NoiseGenError::InvalidParameter {
            name: "regions",
            message,
        };
        if regions.is_empty() {
            return Err(invalid("at least one region required".into()));
        }
        for (i, region) in regions.iter().enumerate() {
            if region.len == 0 {
                return Err(invalid(format!("region {} has zero length", i)));
            }
            if region.taps.is_empty() {
                return Err(invalid(format!("region {} has no filter taps", i)));
            }
            if region.taps.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("region {} has non-finite taps", i)));
            }
        }
        Ok(NassarModel { regions })
    }

    pub fn regions(&self) -> &[NassarRegion] {
        &self.regions
    }

    /// Total region length; one period of the generated noise.
    pub fn samples_per_period(&self) -> usize {
        self.regions.iter().map(|r| r.len).sum()
    }
}

/// Generates a single-phase trace by sequentially filtering the excitation
/// `w` with the region filters. `w` must hold at least
/// `n_periods * samples_per_period` samples.
pub fn nassar_generate(
    model: &NassarModel,
    w: &[Real],
    n_periods: usize,
    sample_rate_hz: Real,
    policy: RegionStatePolicy,
) -> Result<NoiseTrace, NoiseGenError> {
    let spp = model.samples_per_period();
    let total = spp * n_periods;
    if w.len() < total {
        return Err(NoiseGenError::ExcitationTooShort {
            len: w.len(),
            min: total,
        });
    }

    let mut out = Vec::with_capacity(total);
    for period in 0..n_periods {
        let mut offset = period * spp;
        for region in &model.regions {
            let history_floor = match policy {
                RegionStatePolicy::Reset => offset,
                RegionStatePolicy::Carry => 0,
            };
            for n in offset..offset + region.len {
                let mut acc = 0.0;
                for (l, &g) in region.taps.iter().enumerate() {
                    if n < l || n - l < history_floor {
                        break;
                    }
                    acc += g * w[n - l];
                }
                out.push(acc);
            }
            offset += region.len;
        }
    }
    NoiseTrace::new(vec![out], sample_rate_hz, spp, n_periods)
}
