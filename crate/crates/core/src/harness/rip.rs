use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sampling::{build_measurement, draw_samples, MeasurementOperator, SamplingDistribution};
use crate::spectral::SpaceTimeDictionary;

/// Maximum number of supports [`estimate_rip`] will enumerate.
pub const DEFAULT_RIP_BUDGET: u128 = 200_000;

/// Exhaustively computed restricted isometry constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RipEstimate {
    pub s: usize,
    pub delta: f64,
    /// Support attaining the maximum (0-based, ascending).
    pub support: Vec<usize>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Spectral norm of a symmetric matrix.
pub(crate) fn sym_spectral_norm(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.amax()
}

/// `delta_s = max_{|S| = s} ||Phi_S^T Phi_S - I||_2` over all column subsets.
pub fn estimate_rip(phi: &MeasurementOperator, s: usize) -> Result<RipEstimate> {
    estimate_rip_with_budget(phi, s, DEFAULT_RIP_BUDGET)
}

pub fn estimate_rip_with_budget(
    phi: &MeasurementOperator,
    s: usize,
    budget: u128,
) -> Result<RipEstimate> {
    let k = phi.cols();
    if s == 0 || s > k {
        return Err(Error::invalid(format!("s must lie in 1..={k}, got {s}")));
    }
    let needed = binomial(k, s);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let gram = phi.matrix().tr_mul(phi.matrix());
    let mut idx: Vec<usize> = (0..s).collect();
    let mut best = RipEstimate {
        s,
        delta: -1.0,
        support: idx.clone(),
    };
    loop {
        let mut sub = DMatrix::from_fn(s, s, |a, b| gram[(idx[a], idx[b])]);
        for d in 0..s {
            sub[(d, d)] -= 1.0;
        }
        let delta = sym_spectral_norm(sub);
        if delta > best.delta {
            best.delta = delta;
            best.support.clone_from(&idx);
        }
        // next combination in lexicographic order
        let mut pos = s;
        while pos > 0 && idx[pos - 1] == k - s + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for q in pos..s {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(best)
}

/// Spectral-norm deviations of `Phi^T Phi` from the identity over repeated
/// independent plans.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramStats {
    /// `||mean(Phi^T Phi) - I||_2`.
    pub mean_deviation: f64,
    pub mean_single_deviation: f64,
    pub max_single_deviation: f64,
    pub draws: usize,
}

/// Monte Carlo check that reweighted sampling is unbiased:
/// `E[Phi^T Phi] = I` when every step draws `m_t` samples from `p`.
pub fn gram_identity_check(
    dict: &SpaceTimeDictionary,
    p: &SamplingDistribution,
    m_t: usize,
    n_draws: usize,
    seed: u64,
) -> Result<GramStats> {
    if m_t == 0 || n_draws == 0 {
        return Err(Error::invalid("m_t and n_draws must be positive"));
    }
    let budgets = vec![m_t; dict.steps()];
    let k = dict.k();
    let grams = (0..n_draws)
        .into_par_iter()
        .map(|d| {
            let plan = draw_samples(p, &budgets, derive_seed(seed, "gram", &[d as u64]))?;
            let phi = build_measurement(dict, &plan)?;
            Ok(phi.matrix().tr_mul(phi.matrix()))
        })
        .collect::<Result<Vec<DMatrix<f64>>>>()?;

    let identity = DMatrix::<f64>::identity(k, k);
    let mut sum = DMatrix::<f64>::zeros(k, k);
    let mut single_sum = 0.0;
    let mut single_max: f64 = 0.0;
    for g in &grams {
        sum += g;
        let dev = sym_spectral_norm(g - &identity);
        single_sum += dev;
        single_max = single_max.max(dev);
    }
    let mean = sum / n_draws as f64;
    Ok(GramStats {
        mean_deviation: sym_spectral_norm(mean - identity),
        mean_single_deviation: single_sum / n_draws as f64,
        max_single_deviation: single_max,
        draws: n_draws,
    })
}
