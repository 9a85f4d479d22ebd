//! Greedy sparse recovery (CoSaMP) and error metrics.

use nalgebra::{DMatrix, DVector, SVD};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{build_measurement, reweight, MeasurementOperator, SamplingPlan};
use crate::spectral::{code_to_vertex, GraphSignal, SparseSpectralCode, SpaceTimeDictionary, SpectralBasis};

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub sparsity: usize,
    pub max_iter: usize,
    pub residual_tol: f64,
    /// Singular values below `ls_tol * sigma_max` are dropped in the
    /// support least-squares step.
    pub ls_tol: f64,
}

impl RecoveryConfig {
    pub fn new(sparsity: usize) -> Self {
        RecoveryConfig {
            sparsity,
            max_iter: 20,
            residual_tol: 1e-10,
            ls_tol: 1e-10,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.sparsity == 0 || self.sparsity > k {
            return Err(Error::invalid(format!(
                "sparsity {} must lie in 1..={k}",
                self.sparsity
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if !(self.residual_tol >= 0.0) || !(self.ls_tol >= 0.0) {
            return Err(Error::invalid("tolerances must be nonnegative"));
        }
        Ok(())
    }
}

/// Output of [`cosamp`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub code: SparseSpectralCode,
    /// `||y - Phi c^n||_2` after each iteration.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub code: SparseSpectralCode,
    pub x_hat: GraphSignal,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Serialize)]
struct RecoveryJson<'a> {
    /// `[index, value]` pairs, 1-based indices.
    code: Vec<(usize, f64)>,
    x_hat: &'a [f64],
    residuals: &'a [f64],
    iterations: usize,
    converged: bool,
}

impl RecoveryResult {
    pub fn to_json(&self) -> serde_json::Value {
        let c = self.code.coeffs();
        let json = RecoveryJson {
            code: self.code.support().into_iter().map(|i| (i + 1, c[i])).collect(),
            x_hat: self.x_hat.values().as_slice(),
            residuals: &self.residuals,
            iterations: self.iterations,
            converged: self.converged,
        };
        serde_json::to_value(json).expect("recovery result serializes")
    }
}

/// Indices of `v` ordered by decreasing magnitude, ties by index.
fn magnitude_order(v: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    idx
}

/// Keeps the `s` largest-magnitude entries (ties to the smaller index).
pub fn hard_threshold(v: &DVector<f64>, s: usize) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for i in magnitude_order(v).into_iter().take(s) {
        out[i] = v[i];
    }
    out
}

/// Sorted indices of the `r` largest-magnitude entries.
pub fn top_index_set(v: &DVector<f64>, r: usize) -> Vec<usize> {
    let mut set: Vec<usize> = magnitude_order(v).into_iter().take(r).collect();
    set.sort_unstable();
    set
}

/// Minimizer of `||y - Phi_V z||_2` supported on `support`, zero elsewhere.
/// Rank-deficient column sets yield the minimum-norm minimizer.
pub fn support_least_squares(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    support: &[usize],
    ls_tol: f64,
) -> Result<DVector<f64>> {
    if y.len() != phi.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurements for an operator with {} rows",
            y.len(),
            phi.nrows()
        )));
    }
    let k = phi.ncols();
    let mut z = DVector::zeros(k);
    if support.is_empty() || phi.nrows() == 0 {
        return Ok(z);
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= k) {
        return Err(Error::invalid(format!("support index {bad} outside 0..{k}")));
    }
    let sub = phi.select_columns(support);
    let svd = SVD::new(sub, true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok(z);
    }
    let zv = svd
        .solve(y, ls_tol * smax)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    for (&j, v) in support.iter().zip(zv.iter()) {
        z[j] = *v;
    }
    Ok(z)
}

/// Compressive sampling matching pursuit for `Phi c = y`.
///
/// Starting from `c = 0`, each iteration merges the current support with
/// the `2s` largest entries of `Phi^T (y - Phi c)`, solves least squares on
/// the merged support and keeps the `s` largest coefficients. Stops when the
/// residual drops to `residual_tol` or after `max_iter` iterations.
pub fn cosamp(
    phi: &MeasurementOperator,
    y: &DVector<f64>,
    config: &RecoveryConfig,
) -> Result<SparseSolution> {
    let a = phi.matrix();
    let k = a.ncols();
    config.validate(k)?;
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurements for an operator with {} rows",
            y.len(),
            a.nrows()
        )));
    }
    let s = config.sparsity;
    let proxy_size = (2 * s).min(k);
    let mut c = DVector::zeros(k);
    let mut residual = y.clone();
    let mut residuals = Vec::with_capacity(config.max_iter);
    let mut converged = false;

    for _ in 0..config.max_iter {
        let proxy = a.tr_mul(&residual);
        let mut support: Vec<usize> = (0..k).filter(|&i| c[i] != 0.0).collect();
        support.extend(top_index_set(&proxy, proxy_size));
        support.sort_unstable();
        support.dedup();

        let v = support_least_squares(a, y, &support, config.ls_tol)?;
        c = hard_threshold(&v, s);
        residual = y - a * &c;
        let r = residual.norm();
        residuals.push(r);
        if r <= config.residual_tol {
            converged = true;
            break;
        }
    }
    Ok(SparseSolution {
        code: SparseSpectralCode::from_dense(c),
        iterations: residuals.len(),
        residuals,
        converged,
    })
}

/// Samples handed to [`recover_signal`].
#[derive(Debug, Clone, Copy)]
pub enum Samples<'a> {
    /// Raw samples `y`; reweighting is applied internally.
    Raw(&'a DVector<f64>),
    /// Already reweighted samples `Psi y`.
    Reweighted(&'a DVector<f64>),
}

/// Full recovery: reweight if needed, run CoSaMP against `Psi S Utilde`,
/// and map the code back to the initial vertex signal.
pub fn recover_signal(
    samples: Samples<'_>,
    plan: &SamplingPlan,
    dict: &SpaceTimeDictionary,
    basis: &SpectralBasis,
    config: &RecoveryConfig,
) -> Result<RecoveryResult> {
    let phi = build_measurement(dict, plan)?;
    recover_with_operator(samples, plan, &phi, dict, basis, config)
}

/// As [`recover_signal`] with a prebuilt measurement operator for `plan`.
pub fn recover_with_operator(
    samples: Samples<'_>,
    plan: &SamplingPlan,
    phi: &MeasurementOperator,
    dict: &SpaceTimeDictionary,
    basis: &SpectralBasis,
    config: &RecoveryConfig,
) -> Result<RecoveryResult> {
    let owned;
    let y_tilde = match samples {
        Samples::Raw(y) => {
            owned = reweight(y, plan)?;
            &owned
        }
        Samples::Reweighted(y) => y,
    };
    let sol = cosamp(phi, y_tilde, config)?;
    let x_hat = code_to_vertex(&sol.code, dict, basis)?;
    Ok(RecoveryResult {
        code: sol.code,
        x_hat,
        residuals: sol.residuals,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// `||x - x_hat||_2 / ||x||_2`.
pub fn relative_error(x: &GraphSignal, x_hat: &GraphSignal) -> Result<f64> {
    check_same_len(x, x_hat)?;
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::UndefinedMetric("ground truth signal is zero".into()));
    }
    Ok((x.values() - x_hat.values()).norm() / nx)
}

/// `||x - x_hat||_2 / (||Psi e||_2 ||x||_2)`.
pub fn error_ratio(x: &GraphSignal, x_hat: &GraphSignal, psi_e_norm: f64) -> Result<f64> {
    check_same_len(x, x_hat)?;
    let denom = psi_e_norm * x.norm();
    if !(denom > 0.0) {
        return Err(Error::UndefinedMetric(
            "error ratio needs nonzero noise and ground truth".into(),
        ));
    }
    Ok((x.values() - x_hat.values()).norm() / denom)
}

fn check_same_len(x: &GraphSignal, x_hat: &GraphSignal) -> Result<()> {
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "signals have lengths {} and {}",
            x.len(),
            x_hat.len()
        )));
    }
    Ok(())
}
