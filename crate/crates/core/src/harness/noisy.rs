use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_trial, trimmed_mean, PhaseGridSpec, Setup};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::rng::derive_seed;
use crate::sampling::{allocate_budget, distribution_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisySweepSpec {
    pub grid: PhaseGridSpec,
    /// Noise is i.i.d. uniform on `[-sigma, sigma]` per space-time coordinate.
    pub sigma: f64,
    /// Central fraction of trials averaged by the trimmed means.
    pub keep: f64,
}

impl NoisySweepSpec {
    pub fn new(grid: PhaseGridSpec, sigma: f64) -> Self {
        NoisySweepSpec {
            grid,
            sigma,
            keep: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.keep > 0.0 && self.keep <= 1.0) {
            return Err(Error::invalid("trim fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Per-trial metrics and their trimmed summaries for one `(s, m)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyCell {
    pub s: usize,
    pub m: usize,
    pub relative_errors: Vec<f64>,
    pub psi_e_norms: Vec<f64>,
    pub error_ratios: Vec<f64>,
    pub trimmed_error_ratio: f64,
    pub trimmed_relative_error: f64,
    pub mean_psi_e_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisySweepResult {
    pub spec: NoisySweepSpec,
    pub cells: Vec<NoisyCell>,
    pub complete: bool,
}

impl NoisySweepResult {
    pub fn cell(&self, s: usize, m: usize) -> Option<&NoisyCell> {
        self.cells.iter().find(|c| c.s == s && c.m == m)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "s",
            "m",
            "trimmed_error_ratio",
            "trimmed_relative_error",
            "mean_psi_e_norm",
            "trials",
        ]);
        for c in &self.cells {
            t.push(vec![
                c.s.to_string(),
                c.m.to_string(),
                c.trimmed_error_ratio.to_string(),
                c.trimmed_relative_error.to_string(),
                c.mean_psi_e_norm.to_string(),
                c.relative_errors.len().to_string(),
            ]);
        }
        t
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "spec": self.spec, "complete": self.complete })
    }
}

pub fn noisy_sweep(spec: &NoisySweepSpec) -> Result<NoisySweepResult> {
    let setup = spec.grid.setup()?;
    noisy_sweep_with_cancel(&setup, spec, None)
}

pub fn noisy_sweep_with_cancel(
    setup: &Setup,
    spec: &NoisySweepSpec,
    cancel: Option<&AtomicBool>,
) -> Result<NoisySweepResult> {
    spec.validate()?;
    let g = &spec.grid;
    if setup.dict.k() != g.k || setup.dict.steps() != g.steps {
        return Err(Error::DimensionMismatch("setup does not match sweep spec".into()));
    }
    let (p, nu) = distribution_for(&setup.dict, g.distribution)?;
    let mut cells = Vec::new();
    let mut complete = true;
    for &s in &g.s_values {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            complete = false;
            break;
        }
        for &m in &g.m_values {
            let budgets = allocate_budget(&nu, m)?;
            let outcomes = (0..g.trials)
                .into_par_iter()
                .map(|tr| {
                    let seed = derive_seed(g.master_seed, "noisy", &[s as u64, m as u64, tr as u64]);
                    run_trial(setup, &p, &budgets, s, Some(spec.sigma), seed)
                })
                .collect::<Result<Vec<_>>>()?;
            let relative_errors: Vec<f64> = outcomes.iter().map(|o| o.relative_error).collect();
            let psi_e_norms: Vec<f64> = outcomes.iter().map(|o| o.psi_e_norm).collect();
            let error_ratios: Vec<f64> = outcomes
                .iter()
                .map(|o| o.error_ratio.unwrap_or(f64::NAN))
                .collect();
            cells.push(NoisyCell {
                s,
                m,
                trimmed_error_ratio: trimmed_mean(&error_ratios, spec.keep),
                trimmed_relative_error: trimmed_mean(&relative_errors, spec.keep),
                mean_psi_e_norm: psi_e_norms.iter().sum::<f64>() / psi_e_norms.len() as f64,
                relative_errors,
                psi_e_norms,
                error_ratios,
            });
        }
    }
    Ok(NoisySweepResult {
        spec: spec.clone(),
        cells,
        complete,
    })
}
