//! Laplacian eigendecomposition, diffusion filters and the normalized
//! space-time dictionary.
//!
//! For a bandwidth `k` and a time grid with exponents `e_0 = 0 < e_1 < ...`,
//! the dictionary stacks the diffused eigenvectors block by block:
//!
//! ```text
//! Utilde[t*n + j, i] = lambda_i^{e_t} * u_i[j] / f(lambda_i)
//! f(lambda)          = sqrt(sum_t lambda^{2 e_t})
//! ```
//!
//! so its columns are orthonormal whenever the eigenvectors are.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DVector, SymmetricEigen};
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::SymmetricMatrix;
use crate::rng::Rng;

/// Time step of the fast heat regime, `A = exp(-4 L)`.
pub const FAST_HEAT_DT: f64 = 4.0;
/// Time step of the slow heat regime, `A = exp(-0.5 L)`.
pub const SLOW_HEAT_DT: f64 = 0.5;

/// Eigenvalues closer than this are treated as one degenerate cluster.
const CLUSTER_GAP: f64 = 1e-8;
/// Eigenvalues below this count towards the multiplicity of 0.
const ZERO_EIGENVALUE: f64 = 1e-8;

/// Whether [`eigendecompose`] accepts Laplacians of disconnected graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Require,
    AllowDisconnected,
}

/// Ascending Laplacian eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    sigma: DVector<f64>,
    u: DMatrix<f64>,
}

impl SpectralBasis {
    /// A caller-chosen eigenbasis, e.g. a specific basis of a degenerate
    /// eigenspace. Eigenvalues must ascend and `u` must be orthonormal.
    pub fn from_parts(sigma: DVector<f64>, u: DMatrix<f64>) -> Result<Self> {
        let n = sigma.len();
        if n == 0 || u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} eigenvalues with a {}x{} eigenvector matrix",
                u.nrows(),
                u.ncols()
            )));
        }
        if sigma.iter().any(|s| !s.is_finite()) || sigma.as_slice().windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("eigenvalues must be finite and ascending"));
        }
        let dev = gram_deviation(&u);
        if dev > 1e-10 {
            return Err(Error::invalid(format!("eigenvectors are not orthonormal (max deviation {dev:e})")));
        }
        Ok(SpectralBasis { sigma, u })
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// First `k` eigenvectors as an `n x k` view.
    pub fn leading(&self, k: usize) -> DMatrixView<'_, f64> {
        self.u.columns(0, k)
    }

    /// `max |U^T U - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        gram_deviation(&self.u)
    }

    /// Largest absolute entry of every eigenvector.
    pub fn column_inf_norms(&self) -> Vec<f64> {
        self.u.column_iter().map(|c| c.amax()).collect()
    }
}

pub(crate) fn gram_deviation(m: &DMatrix<f64>) -> f64 {
    let mut g = m.tr_mul(m);
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    g.amax()
}

/// Full symmetric eigendecomposition of a graph Laplacian.
///
/// Output is deterministic: eigenpairs are sorted by ascending eigenvalue,
/// degenerate clusters are re-orthonormalized in index order, and every
/// column is signed so that its first entry of largest magnitude is positive.
pub fn eigendecompose(l: &SymmetricMatrix, connectivity: Connectivity) -> Result<SpectralBasis> {
    let m = l.as_matrix();
    let n = m.nrows();
    let lmax = m.amax();
    let eig = SymmetricEigen::new(m.clone());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut sigma = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut u = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let psd_tol = 1e-10 * lmax.max(1.0);
    if sigma[0] < -psd_tol {
        return Err(Error::Numerical(format!(
            "Laplacian has negative eigenvalue {}",
            sigma[0]
        )));
    }
    for s in sigma.iter_mut() {
        if *s < 0.0 {
            *s = 0.0;
        }
    }

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sigma[end] - sigma[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            orthonormalize_columns(&mut u, start, end)?;
        }
        start = end;
    }
    for c in 0..n {
        fix_sign(&mut u, c);
    }

    let zero_mult = sigma.iter().filter(|&&s| s < ZERO_EIGENVALUE).count();
    if zero_mult > 1 && connectivity == Connectivity::Require {
        return Err(Error::Disconnected {
            multiplicity: zero_mult,
        });
    }

    let recon = &u * DMatrix::from_diagonal(&sigma) * u.transpose();
    let err = (recon - m).amax();
    if err > 1e-8 * lmax {
        return Err(Error::Numerical(format!(
            "eigendecomposition reconstruction error {err:e} exceeds tolerance"
        )));
    }
    Ok(SpectralBasis { sigma, u })
}

fn orthonormalize_columns(u: &mut DMatrix<f64>, start: usize, end: usize) -> Result<()> {
    for c in start..end {
        for p in start..c {
            let proj = u.column(p).dot(&u.column(c));
            let prev = u.column(p).clone_owned();
            u.column_mut(c).axpy(-proj, &prev, 1.0);
        }
        let norm = u.column(c).norm();
        if norm < 1e-6 {
            return Err(Error::Numerical("degenerate eigenvector cluster".into()));
        }
        u.column_mut(c).unscale_mut(norm);
    }
    Ok(())
}

fn fix_sign(u: &mut DMatrix<f64>, c: usize) {
    let col = u.column(c);
    let amax = col.amax();
    if amax == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .copied()
        .find(|v| v.abs() >= amax * (1.0 - 1e-9))
        .unwrap_or(0.0);
    if pivot < 0.0 {
        u.column_mut(c).neg_mut();
    }
}

/// Scalar spectral filter `h(sigma)`.
#[derive(Clone)]
pub struct CustomFilter {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomFilter {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomFilter {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFilter")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// Piecewise-linear filter through `(sigma, lambda)` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFilter {
    knots: Vec<(f64, f64)>,
}

impl TabulatedFilter {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("tabulated filter needs at least two knots"));
        }
        if knots.iter().any(|(s, l)| !s.is_finite() || !l.is_finite()) {
            return Err(Error::invalid("tabulated filter knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "tabulated filter knots must have strictly increasing sigma",
            ));
        }
        Ok(TabulatedFilter { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn eval(&self, sigma: f64) -> Result<f64> {
        let (lo, hi) = (self.knots[0].0, self.knots[self.knots.len() - 1].0);
        let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        if sigma < lo - slack || sigma > hi + slack {
            return Err(Error::FilterDomain(format!(
                "sigma {sigma} outside tabulated range [{lo}, {hi}]"
            )));
        }
        let s = sigma.clamp(lo, hi);
        let idx = self
            .knots
            .partition_point(|&(k, _)| k <= s)
            .clamp(1, self.knots.len() - 1);
        let (s0, l0) = self.knots[idx - 1];
        let (s1, l1) = self.knots[idx];
        Ok(l0 + (l1 - l0) * (s - s0) / (s1 - s0))
    }
}

/// Evolution operator `A = h(L)`, described by its action on Laplacian
/// eigenvalues.
#[derive(Debug, Clone)]
pub enum DiffusionModel {
    /// `h(sigma) = exp(-dt * sigma)`.
    Heat { dt: f64 },
    Tabulated(TabulatedFilter),
    Custom(CustomFilter),
}

impl DiffusionModel {
    pub fn heat(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::invalid(format!(
                "heat time step must be finite and nonnegative, got {dt}"
            )));
        }
        Ok(DiffusionModel::Heat { dt })
    }

    pub fn name(&self) -> String {
        match self {
            DiffusionModel::Heat { dt } => format!("heat(dt={dt})"),
            DiffusionModel::Tabulated(_) => "tabulated".into(),
            DiffusionModel::Custom(c) => c.name.clone(),
        }
    }

    pub fn eval(&self, sigma: f64) -> Result<f64> {
        let v = match self {
            DiffusionModel::Heat { dt } => (-dt * sigma).exp(),
            DiffusionModel::Tabulated(t) => t.eval(sigma)?,
            DiffusionModel::Custom(c) => (c.f)(sigma),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::FilterDomain(format!(
                "{} is not finite at sigma = {sigma}",
                self.name()
            )))
        }
    }
}

/// `lambda_i = h(sigma_i)` for the first `k` eigenvalues.
pub fn diffusion_eigenvalues(
    basis: &SpectralBasis,
    model: &DiffusionModel,
    k: usize,
) -> Result<Vec<f64>> {
    check_bandwidth(k, basis.n())?;
    basis.sigma.iter().take(k).map(|&s| model.eval(s)).collect()
}

fn check_bandwidth(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("bandwidth k={k} must lie in 1..={n}")));
    }
    Ok(())
}

/// Observation times `t_0 = 0 < t_1 < ...` measured in units of one
/// application of the evolution operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    unit: f64,
}

impl TimeGrid {
    /// `{0, 1, ..., steps - 1}`.
    pub fn regular(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("time grid needs at least one step"));
        }
        Ok(TimeGrid {
            times: (0..steps).map(|t| t as f64).collect(),
            unit: 1.0,
        })
    }

    /// Arbitrary observation times; the exponent of `A` at time `t` is `t / unit`.
    pub fn irregular(times: Vec<f64>, unit: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("time grid needs at least one time"));
        }
        if !(unit.is_finite() && unit > 0.0) {
            return Err(Error::invalid(format!("time unit must be positive, got {unit}")));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("the first observation time must be 0"));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("observation times must be strictly increasing"));
        }
        Ok(TimeGrid { times, unit })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn is_regular(&self) -> bool {
        self.times
            .iter()
            .enumerate()
            .all(|(l, &t)| t / self.unit == l as f64)
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.times.iter().map(|t| t / self.unit).collect()
    }
}

/// `lambda^e`, using integer powers whenever `e` is integral.
pub fn filter_power(lambda: f64, e: f64) -> Result<f64> {
    if e.fract() == 0.0 && e.abs() <= f64::from(i32::MAX) {
        return Ok(lambda.powi(e as i32));
    }
    if lambda < 0.0 {
        return Err(Error::FilterDomain(format!(
            "negative eigenvalue {lambda} raised to non-integer power {e}"
        )));
    }
    Ok(lambda.powf(e))
}

/// Column normalizers `f(lambda) = sqrt(sum_l lambda^{2 e_l})`.
pub fn f_norms(lambdas: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    let exps = grid.exponents();
    lambdas
        .iter()
        .map(|&l| {
            if !l.is_finite() {
                return Err(Error::FilterDomain(format!("non-finite eigenvalue {l}")));
            }
            let mut acc = 0.0;
            for &e in &exps {
                let p = filter_power(l, e)?;
                acc += p * p;
            }
            Ok(acc.sqrt())
        })
        .collect()
}

/// The `Tn x k` orthonormal space-time dictionary.
#[derive(Debug, Clone)]
pub struct SpaceTimeDictionary {
    n: usize,
    k: usize,
    grid: TimeGrid,
    lambdas: Vec<f64>,
    fvals: Vec<f64>,
    utilde: DMatrix<f64>,
}

impl SpaceTimeDictionary {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of observation times `T`.
    pub fn steps(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn fvals(&self) -> &[f64] {
        &self.fvals
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.utilde
    }

    /// Rows `t*n .. (t+1)*n`.
    pub fn block(&self, t: usize) -> DMatrixView<'_, f64> {
        self.utilde.rows(t * self.n, self.n)
    }

    pub fn orthonormality_error(&self) -> f64 {
        gram_deviation(&self.utilde)
    }

    pub fn column_inf_norms(&self) -> Vec<f64> {
        self.utilde.column_iter().map(|c| c.amax()).collect()
    }

    /// Debug export: header line `rows cols`, then one comma-separated row per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{} {}\n", self.utilde.nrows(), self.utilde.ncols());
        for r in self.utilde.row_iter() {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

pub fn build_dictionary(
    basis: &SpectralBasis,
    model: &DiffusionModel,
    k: usize,
    grid: &TimeGrid,
) -> Result<SpaceTimeDictionary> {
    let n = basis.n();
    let lambdas = diffusion_eigenvalues(basis, model, k)?;
    let fvals = f_norms(&lambdas, grid)?;
    let exps = grid.exponents();
    let steps = grid.len();
    let mut utilde = DMatrix::zeros(steps * n, k);
    for (i, (&lambda, &f)) in lambdas.iter().zip(&fvals).enumerate() {
        let u = basis.u.column(i);
        for (t, &e) in exps.iter().enumerate() {
            let scale = filter_power(lambda, e)? / f;
            for j in 0..n {
                utilde[(t * n + j, i)] = scale * u[j];
            }
        }
    }
    Ok(SpaceTimeDictionary {
        n,
        k,
        grid: grid.clone(),
        lambdas,
        fvals,
        utilde,
    })
}

/// A real value on every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal(DVector<f64>);

impl GraphSignal {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("graph signal has non-finite entries"));
        }
        Ok(GraphSignal(values))
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Self::new(DVector::from_vec(values))
    }

    pub fn zeros(n: usize) -> Self {
        GraphSignal(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Spectral coefficients over the first `k` eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectralCode {
    coeffs: DVector<f64>,
}

impl SparseSpectralCode {
    pub fn from_dense(coeffs: DVector<f64>) -> Self {
        SparseSpectralCode { coeffs }
    }

    pub fn zeros(k: usize) -> Self {
        Self::from_dense(DVector::zeros(k))
    }

    /// Code of length `k` with `coeffs[i]` placed at `support[i]`.
    pub fn from_support(k: usize, support: &[usize], coeffs: &[f64]) -> Result<Self> {
        if support.len() != coeffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support indices but {} coefficients",
                support.len(),
                coeffs.len()
            )));
        }
        let mut c = DVector::zeros(k);
        for (&i, &v) in support.iter().zip(coeffs) {
            if i >= k {
                return Err(Error::invalid(format!("support index {i} outside 0..{k}")));
            }
            c[i] += v;
        }
        Ok(Self::from_dense(c))
    }

    /// Uniformly random support of size `s` with standard normal values.
    pub fn random(k: usize, s: usize, rng: &mut Rng) -> Result<Self> {
        if s > k {
            return Err(Error::invalid(format!("sparsity {s} exceeds bandwidth {k}")));
        }
        let mut support = index::sample(rng, k, s).into_vec();
        support.sort_unstable();
        let coeffs: Vec<f64> = (0..s).map(|_| StandardNormal.sample(rng)).collect();
        Self::from_support(k, &support, &coeffs)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sparsity(&self) -> usize {
        self.coeffs.iter().filter(|v| **v != 0.0).count()
    }
}

/// `x_t = U diag(h(sigma)^power) U^T x`. A power of zero returns `x` unchanged.
pub fn evolve(
    x: &GraphSignal,
    basis: &SpectralBasis,
    model: &DiffusionModel,
    power: f64,
) -> Result<GraphSignal> {
    check_signal_len(x, basis)?;
    if power == 0.0 {
        return Ok(x.clone());
    }
    let coef = basis.u.tr_mul(&x.0);
    let scales = filter_powers(basis, model, power)?;
    GraphSignal::new(&basis.u * coef.component_mul(&scales))
}

fn filter_powers(basis: &SpectralBasis, model: &DiffusionModel, power: f64) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(basis.n());
    for (o, &s) in out.iter_mut().zip(basis.sigma.iter()) {
        *o = filter_power(model.eval(s)?, power)?;
    }
    Ok(out)
}

fn check_signal_len(x: &GraphSignal, basis: &SpectralBasis) -> Result<()> {
    if x.len() != basis.n() {
        return Err(Error::DimensionMismatch(format!(
            "signal has length {}, graph has {} nodes",
            x.len(),
            basis.n()
        )));
    }
    Ok(())
}

/// Space-time trajectory `[x; A^{e_1} x; ...]` of length `T n`.
pub fn embed(
    x: &GraphSignal,
    basis: &SpectralBasis,
    model: &DiffusionModel,
    grid: &TimeGrid,
) -> Result<DVector<f64>> {
    check_signal_len(x, basis)?;
    let n = basis.n();
    let coef = basis.u.tr_mul(&x.0);
    let mut out = DVector::zeros(grid.len() * n);
    for (t, e) in grid.exponents().into_iter().enumerate() {
        let xt = if e == 0.0 {
            x.0.clone()
        } else {
            &basis.u * coef.component_mul(&filter_powers(basis, model, e)?)
        };
        out.rows_mut(t * n, n).copy_from(&xt);
    }
    Ok(out)
}

/// `x = sum_{i in support} c_i u_i`, optionally rescaled to unit norm.
///
/// Returns the vertex signal and its code over the first `k` eigenvectors.
pub fn synth_signal(
    basis: &SpectralBasis,
    k: usize,
    support: &[usize],
    coeffs: &[f64],
    normalize: bool,
) -> Result<(GraphSignal, SparseSpectralCode)> {
    check_bandwidth(k, basis.n())?;
    let mut code = SparseSpectralCode::from_support(k, support, coeffs)?;
    let mut x = basis.leading(k) * &code.coeffs;
    if normalize {
        let norm = x.norm();
        if norm > 0.0 {
            x.unscale_mut(norm);
            code.coeffs.unscale_mut(norm);
        }
    }
    Ok((GraphSignal::new(x)?, code))
}

/// Maps a dictionary-domain code back to the initial vertex signal:
/// `x = U_k diag(1 / f) c`.
pub fn code_to_vertex(
    c_star: &SparseSpectralCode,
    dict: &SpaceTimeDictionary,
    basis: &SpectralBasis,
) -> Result<GraphSignal> {
    if c_star.len() != dict.k {
        return Err(Error::DimensionMismatch(format!(
            "code has length {}, dictionary bandwidth is {}",
            c_star.len(),
            dict.k
        )));
    }
    if basis.n() != dict.n {
        return Err(Error::DimensionMismatch("basis and dictionary disagree on n".into()));
    }
    let scaled = DVector::from_iterator(
        dict.k,
        c_star.coeffs.iter().zip(&dict.fvals).map(|(c, f)| c / f),
    );
    GraphSignal::new(basis.leading(dict.k) * scaled)
}

/// Dictionary-domain code of a signal: `diag(f) U_k^T x`.
pub fn dictionary_code(x: &GraphSignal, dict: &SpaceTimeDictionary, basis: &SpectralBasis) -> Result<DVector<f64>> {
    check_signal_len(x, basis)?;
    let c = basis.leading(dict.k).tr_mul(&x.0);
    Ok(DVector::from_iterator(
        dict.k,
        c.iter().zip(&dict.fvals).map(|(c, f)| c * f),
    ))
}
