use serde::Serialize;

use super::Setup;
use crate::error::Result;
use crate::sampling::{
    appendix_bound_expectation, appendix_bound_tail, distribution_for, rip_sample_bound_value,
    DistributionChoice,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundParams {
    pub s: usize,
    pub delta: f64,
    pub c: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub beta: f64,
}

/// Sample-count bounds for one time step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: usize,
    pub nu_sq: f64,
    pub rip_bound: f64,
    pub tail_bound: f64,
    pub expectation_bound: f64,
    /// Fraction of a total budget assigned to this step (`nu^2 / sum nu^2`).
    pub budget_share: f64,
}

pub fn bound_report(
    setup: &Setup,
    choice: DistributionChoice,
    params: &BoundParams,
) -> Result<Vec<BoundRow>> {
    let (_, nu) = distribution_for(&setup.dict, choice)?;
    let sq = nu.nu_sq();
    let total: f64 = sq.iter().sum();
    let (n, k, steps) = (setup.dict.n(), setup.dict.k(), setup.dict.steps());
    sq.iter()
        .enumerate()
        .map(|(t, &v)| {
            Ok(BoundRow {
                t,
                nu_sq: v,
                rip_bound: rip_sample_bound_value(v, params.s, k, n, steps, params.delta, params.c)?,
                tail_bound: appendix_bound_tail(v, params.s, params.beta, params.epsilon)?,
                expectation_bound: appendix_bound_expectation(v, params.s, k, n, steps, params.eta)?,
                budget_share: if total > 0.0 { v / total } else { 1.0 / steps as f64 },
            })
        })
        .collect()
}
