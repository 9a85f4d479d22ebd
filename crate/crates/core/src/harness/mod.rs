//! Experiment drivers: coherence tables, phase-transition grids, noisy
//! sweeps, Gram-identity Monte Carlo, restricted isometry estimates and
//! sample-bound reports.
//!
//! Every randomized experiment derives one seed per trial from the master
//! seed, a purpose tag and the cell coordinates, so results do not depend on
//! how trials are scheduled across threads.

mod bounds;
mod coherence;
mod noisy;
mod phase;
mod rip;
mod stats;

use std::path::PathBuf;

use nalgebra::DVector;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use bounds::{bound_report, BoundParams, BoundRow};
pub use coherence::{coherence_heatmap, coherence_profile, HeatmapCell};
pub use noisy::{noisy_sweep, noisy_sweep_with_cancel, NoisyCell, NoisySweepResult, NoisySweepSpec};
pub use phase::{phase_transition, phase_transition_with_cancel, PhaseGridResult, PhaseGridSpec};
pub use rip::{estimate_rip, estimate_rip_with_budget, gram_identity_check, GramStats, RipEstimate, DEFAULT_RIP_BUDGET};
pub use stats::{isotonic_nondecreasing, least_squares_slope, monotone_violations, trimmed_mean};

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, gen_community, gen_cycle, load_graph, Graph};
use crate::recovery::{error_ratio, recover_signal, relative_error, RecoveryConfig, Samples};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampling::{apply_sampling, draw_samples, SamplingDistribution};
use crate::spectral::{
    build_dictionary, eigendecompose, embed, synth_signal, Connectivity, DiffusionModel,
    SpaceTimeDictionary, SparseSpectralCode, SpectralBasis, TimeGrid,
};

/// Where an experiment's graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSpec {
    Cycle {
        n: usize,
    },
    Community {
        sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Cycle { n } => gen_cycle(*n),
            GraphSpec::Community {
                sizes,
                p_in,
                p_out,
                seed,
            } => gen_community(sizes, *p_in, *p_out, *seed),
            GraphSpec::File { path } => load_graph(path),
        }
    }
}

/// A graph with its eigenbasis, evolution model and space-time dictionary.
#[derive(Debug, Clone)]
pub struct Setup {
    pub graph: Graph,
    pub model: DiffusionModel,
    pub basis: SpectralBasis,
    pub dict: SpaceTimeDictionary,
}

impl Setup {
    pub fn new(graph: Graph, model: DiffusionModel, k: usize, grid: &TimeGrid) -> Result<Self> {
        let basis = eigendecompose(&build_laplacian(&graph), Connectivity::Require)?;
        Self::from_basis(graph, basis, model, k, grid)
    }

    pub fn from_basis(
        graph: Graph,
        basis: SpectralBasis,
        model: DiffusionModel,
        k: usize,
        grid: &TimeGrid,
    ) -> Result<Self> {
        let dict = build_dictionary(&basis, &model, k, grid)?;
        Ok(Setup {
            graph,
            model,
            basis,
            dict,
        })
    }

    /// Same graph and basis with a different bandwidth or grid.
    pub fn rebuild(&self, k: usize, grid: &TimeGrid) -> Result<Self> {
        Self::from_basis(
            self.graph.clone(),
            self.basis.clone(),
            self.model.clone(),
            k,
            grid,
        )
    }
}

/// Result of one sample-and-recover trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub relative_error: f64,
    /// `||Psi e||_2` of the sampled, reweighted noise (0 without noise).
    pub psi_e_norm: f64,
    /// Present for noisy trials.
    pub error_ratio: Option<f64>,
}

/// Synthesizes a unit-norm `s`-sparse signal, diffuses it, samples it
/// (optionally with uniform noise of half-width `sigma`) and recovers it.
pub fn run_trial(
    setup: &Setup,
    p: &SamplingDistribution,
    budgets: &[usize],
    s: usize,
    noise_sigma: Option<f64>,
    seed: u64,
) -> Result<TrialOutcome> {
    let k = setup.dict.k();
    let mut rng = rng_from_seed(derive_seed(seed, "signal", &[]));
    let code = SparseSpectralCode::random(k, s, &mut rng)?;
    let support = code.support();
    let vals: Vec<f64> = support.iter().map(|&i| code.coeffs()[i]).collect();
    let (x, _) = synth_signal(&setup.basis, k, &support, &vals, true)?;

    let mut spacetime = embed(&x, &setup.basis, &setup.model, setup.dict.grid())?;
    let plan = draw_samples(p, budgets, derive_seed(seed, "plan", &[]))?;
    let mut psi_e_norm = 0.0;
    if let Some(sigma) = noise_sigma {
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("noise level must be positive, got {sigma}")));
        }
        let mut nrng = rng_from_seed(derive_seed(seed, "noise", &[]));
        let e = DVector::from_fn(spacetime.len(), |_, _| nrng.random_range(-sigma..=sigma));
        psi_e_norm = apply_sampling(&e, &plan)?.1.norm();
        spacetime += e;
    }
    let (_, y_tilde) = apply_sampling(&spacetime, &plan)?;
    let result = recover_signal(
        Samples::Reweighted(&y_tilde),
        &plan,
        &setup.dict,
        &setup.basis,
        &RecoveryConfig::new(s),
    )?;
    Ok(TrialOutcome {
        relative_error: relative_error(&x, &result.x_hat)?,
        psi_e_norm,
        error_ratio: match noise_sigma {
            Some(_) => Some(error_ratio(&x, &result.x_hat, psi_e_norm)?),
            None => None,
        },
    })
}

fn check_ascending(name: &str, v: &[usize]) -> Result<()> {
    if v.is_empty() || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{name} must be nonempty and strictly ascending")));
    }
    Ok(())
}
