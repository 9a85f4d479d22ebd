use serde::Serialize;

use super::Setup;
use crate::error::Result;
use crate::sampling::{distribution_for, DistributionChoice};
use crate::spectral::TimeGrid;

/// `sum_t nu(t)^2` for one `(k, T)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub k: usize,
    pub steps: usize,
    pub distribution: DistributionChoice,
    pub nu_sq_sum: f64,
}

/// Total squared coherence over a grid of bandwidths and regular time grids.
pub fn coherence_heatmap(
    setup: &Setup,
    k_values: &[usize],
    t_values: &[usize],
    choice: DistributionChoice,
) -> Result<Vec<HeatmapCell>> {
    let mut cells = Vec::with_capacity(k_values.len() * t_values.len());
    for &k in k_values {
        for &steps in t_values {
            let s = setup.rebuild(k, &TimeGrid::regular(steps)?)?;
            let (_, nu) = distribution_for(&s.dict, choice)?;
            cells.push(HeatmapCell {
                k,
                steps,
                distribution: choice,
                nu_sq_sum: nu.nu_sq_sum(),
            });
        }
    }
    Ok(cells)
}

/// `nu(t)^2` for every step of the setup's own dictionary.
pub fn coherence_profile(setup: &Setup, choice: DistributionChoice) -> Result<Vec<f64>> {
    Ok(distribution_for(&setup.dict, choice)?.1.nu_sq())
}
