use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_ascending, least_squares_slope, run_trial, GraphSpec, Setup};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::rng::derive_seed;
use crate::sampling::{allocate_budget, distribution_for, DistributionChoice};
use crate::spectral::{DiffusionModel, TimeGrid};

/// A grid of (sparsity, budget) cells, each estimated from `trials`
/// independent sample-and-recover runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGridSpec {
    pub graph: GraphSpec,
    /// Heat time step; `A = exp(-dt L)`.
    pub dt: f64,
    pub k: usize,
    pub steps: usize,
    pub s_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub distribution: DistributionChoice,
    /// A trial succeeds when its relative error is at most this.
    pub threshold: f64,
    pub master_seed: u64,
}

impl PhaseGridSpec {
    pub fn validate(&self) -> Result<()> {
        check_ascending("s_values", &self.s_values)?;
        check_ascending("m_values", &self.m_values)?;
        if self.s_values[0] == 0 || *self.s_values.last().unwrap() > self.k {
            return Err(Error::invalid(format!("sparsities must lie in 1..={}", self.k)));
        }
        if self.m_values[0] == 0 {
            return Err(Error::invalid("budgets must be positive"));
        }
        if self.trials == 0 || self.steps == 0 || self.k == 0 {
            return Err(Error::invalid("trials, steps and k must be positive"));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::invalid("success threshold must be positive"));
        }
        Ok(())
    }

    pub fn setup(&self) -> Result<Setup> {
        self.validate()?;
        Setup::new(
            self.graph.build()?,
            DiffusionModel::heat(self.dt)?,
            self.k,
            &TimeGrid::regular(self.steps)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGridResult {
    pub spec: PhaseGridSpec,
    /// `success_rate[s_index][m_index]`.
    pub success_rate: Vec<Vec<f64>>,
    /// Rows finished before a cancellation; equals `s_values.len()` when complete.
    pub completed_rows: usize,
}

impl PhaseGridResult {
    pub fn is_complete(&self) -> bool {
        self.completed_rows == self.spec.s_values.len()
    }

    /// Smallest budget whose success rate reaches `level`, per sparsity.
    pub fn threshold_budget(&self, level: f64) -> Vec<Option<usize>> {
        self.success_rate
            .iter()
            .map(|row| {
                row.iter()
                    .position(|&r| r >= level)
                    .map(|j| self.spec.m_values[j])
            })
            .collect()
    }

    /// Budget where the success rate first crosses `level`, linearly
    /// interpolated between neighbouring grid budgets.
    pub fn contour(&self, level: f64) -> Vec<Option<f64>> {
        let m = &self.spec.m_values;
        self.success_rate
            .iter()
            .map(|row| {
                let j = row.iter().position(|&r| r >= level)?;
                if j == 0 || row[j] == row[j - 1] {
                    return Some(m[j] as f64);
                }
                let frac = (level - row[j - 1]) / (row[j] - row[j - 1]);
                Some(m[j - 1] as f64 + frac * (m[j] - m[j - 1]) as f64)
            })
            .collect()
    }

    /// Least-squares slope of the `level` contour against `s`, over the
    /// sparsities whose contour lies inside the grid.
    pub fn contour_slope(&self, level: f64) -> Option<f64> {
        let (s, m): (Vec<f64>, Vec<f64>) = self
            .spec
            .s_values
            .iter()
            .zip(self.contour(level))
            .filter_map(|(&s, c)| c.map(|c| (s as f64, c)))
            .unzip();
        (s.len() >= 2).then(|| least_squares_slope(&s, &m))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["s", "m", "success_rate", "trials"]);
        for (si, row) in self.success_rate.iter().enumerate() {
            for (mi, r) in row.iter().enumerate() {
                t.push(vec![
                    self.spec.s_values[si].to_string(),
                    self.spec.m_values[mi].to_string(),
                    r.to_string(),
                    self.spec.trials.to_string(),
                ]);
            }
        }
        t
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "completed_rows": self.completed_rows,
            "complete": self.is_complete(),
            "contour_50": self.contour(0.5),
            "contour_50_slope": self.contour_slope(0.5),
        })
    }
}

pub fn phase_transition(spec: &PhaseGridSpec) -> Result<PhaseGridResult> {
    let setup = spec.setup()?;
    phase_transition_with_cancel(&setup, spec, None)
}

/// Runs the grid on a prepared setup. When `cancel` becomes set, the rows
/// finished so far are returned.
pub fn phase_transition_with_cancel(
    setup: &Setup,
    spec: &PhaseGridSpec,
    cancel: Option<&AtomicBool>,
) -> Result<PhaseGridResult> {
    spec.validate()?;
    if setup.dict.k() != spec.k || setup.dict.steps() != spec.steps {
        return Err(Error::DimensionMismatch("setup does not match grid spec".into()));
    }
    let (p, nu) = distribution_for(&setup.dict, spec.distribution)?;
    let budgets: Vec<Vec<usize>> = spec
        .m_values
        .iter()
        .map(|&m| allocate_budget(&nu, m))
        .collect::<Result<_>>()?;

    let mut success_rate = Vec::with_capacity(spec.s_values.len());
    for &s in &spec.s_values {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            break;
        }
        let tasks: Vec<(usize, usize)> = (0..spec.m_values.len())
            .flat_map(|mi| (0..spec.trials).map(move |tr| (mi, tr)))
            .collect();
        let outcomes: Vec<bool> = tasks
            .par_iter()
            .map(|&(mi, tr)| {
                let m = spec.m_values[mi];
                let seed = derive_seed(spec.master_seed, "phase", &[s as u64, m as u64, tr as u64]);
                let out = run_trial(setup, &p, &budgets[mi], s, None, seed)?;
                Ok(out.relative_error <= spec.threshold)
            })
            .collect::<Result<_>>()?;
        let row = outcomes
            .chunks(spec.trials)
            .map(|c| c.iter().filter(|&&ok| ok).count() as f64 / spec.trials as f64)
            .collect();
        success_rate.push(row);
    }
    Ok(PhaseGridResult {
        spec: spec.clone(),
        completed_rows: success_rate.len(),
        success_rate,
    })
}
