//! Coherence, sampling distributions, random space-time sampling plans and
//! the reweighted measurement operator `Phi = Psi S Utilde`.


use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::render_csv;
use crate::rng::rng_from_seed;
use crate::spectral::SpaceTimeDictionary;

/// Smallest probability any node may receive.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Which per-step distribution to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionChoice {
    Uniform,
    Optimal,
}

impl std::str::FromStr for DistributionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(DistributionChoice::Uniform),
            "optimal" => Ok(DistributionChoice::Optimal),
            other => Err(Error::invalid(format!(
                "unknown distribution {other:?} (expected uniform or optimal)"
            ))),
        }
    }
}

impl std::fmt::Display for DistributionChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistributionChoice::Uniform => "uniform",
            DistributionChoice::Optimal => "optimal",
        })
    }
}

/// One probability distribution over the nodes per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    rows: Vec<Vec<f64>>,
}

impl SamplingDistribution {
    /// Validates and normalizes the rows. Entries below `floor` are raised
    /// to `floor` and the remaining mass is rescaled so each row sums to 1.
    pub fn from_rows(rows: Vec<Vec<f64>>, floor: f64) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid("distribution needs at least one step and one node"));
        }
        let n = rows[0].len();
        if !(0.0..1.0 / n as f64).contains(&floor) {
            return Err(Error::invalid(format!("probability floor {floor} out of range")));
        }
        let mut out = Vec::with_capacity(rows.len());
        for (t, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {t} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::invalid(format!("row {t} has a negative or non-finite entry")));
            }
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Err(Error::invalid(format!("row {t} has zero mass")));
            }
            let mut row: Vec<f64> = row.iter().map(|p| p / total).collect();
            let low = row.iter().filter(|&&p| p < floor).count();
            if low > 0 {
                let rest: f64 = row.iter().filter(|&&p| p >= floor).sum();
                let scale = (1.0 - low as f64 * floor) / rest;
                for p in &mut row {
                    *p = if *p < floor { floor } else { *p * scale };
                }
            }
            out.push(row);
        }
        Ok(SamplingDistribution { rows: out })
    }

    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.rows[t]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `T` rows by `n` columns, no header.
    pub fn to_csv(&self) -> String {
        render_csv(
            None,
            self.rows.iter().map(|row| row.iter().map(|p| p.to_string())),
        )
    }
}

pub fn uniform_distribution(n: usize, steps: usize) -> Result<SamplingDistribution> {
    if n == 0 || steps == 0 {
        return Err(Error::invalid("uniform distribution needs n >= 1 and T >= 1"));
    }
    Ok(SamplingDistribution {
        rows: vec![vec![1.0 / n as f64; n]; steps],
    })
}

/// Per-step coherence values `nu(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceProfile {
    nu: Vec<f64>,
}

impl CoherenceProfile {
    pub fn from_nu(nu: Vec<f64>) -> Self {
        CoherenceProfile { nu }
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn nu_sq(&self) -> Vec<f64> {
        self.nu.iter().map(|v| v * v).collect()
    }

    pub fn nu_sq_sum(&self) -> f64 {
        self.nu.iter().map(|v| v * v).sum()
    }
}

/// Largest |entry| of every row of block `t` with its (first) column index.
fn block_row_max(dict: &SpaceTimeDictionary, t: usize) -> Vec<(f64, usize)> {
    let block = dict.block(t);
    block
        .row_iter()
        .map(|r| {
            let mut best = (r[0].abs(), 0);
            for (j, v) in r.iter().enumerate().skip(1) {
                if v.abs() > best.0 {
                    best = (v.abs(), j);
                }
            }
            best
        })
        .collect()
}

fn check_dims(dict: &SpaceTimeDictionary, p: &SamplingDistribution) -> Result<()> {
    if p.steps() != dict.steps() || p.n() != dict.n() {
        return Err(Error::DimensionMismatch(format!(
            "distribution is {}x{}, dictionary has T={} and n={}",
            p.steps(),
            p.n(),
            dict.steps(),
            dict.n()
        )));
    }
    Ok(())
}

/// `nu(t) = max_{i,j} |Utilde[t n + i, j]| / sqrt(p_t(i))`.
pub fn coherence(dict: &SpaceTimeDictionary, p: &SamplingDistribution) -> Result<CoherenceProfile> {
    check_dims(dict, p)?;
    let nu = (0..dict.steps())
        .map(|t| {
            block_row_max(dict, t)
                .iter()
                .zip(p.row(t))
                .map(|((a, _), q)| a / q.sqrt())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(CoherenceProfile { nu })
}

/// Coherence-minimizing distribution: `p_t(i)` proportional to the squared
/// largest entry of row `i` of block `t`.
///
/// The returned profile holds the exact optimum
/// `nu(t)^2 = sum_i max_j |Utilde[t n + i, j]|^2`, computed before flooring.
pub fn optimal_distribution(
    dict: &SpaceTimeDictionary,
) -> Result<(SamplingDistribution, CoherenceProfile)> {
    let n = dict.n();
    let mut rows = Vec::with_capacity(dict.steps());
    let mut nu = Vec::with_capacity(dict.steps());
    for t in 0..dict.steps() {
        let sq: Vec<f64> = block_row_max(dict, t).iter().map(|(a, _)| a * a).collect();
        let total: f64 = sq.iter().sum();
        if sq.iter().any(|&v| v < PROBABILITY_FLOOR * total) {
            log::warn!("time step {t}: dictionary rows near zero, probabilities floored");
        }
        if total > 0.0 {
            rows.push(sq);
        } else {
            rows.push(vec![1.0 / n as f64; n]);
        }
        nu.push(total.sqrt());
    }
    Ok((
        SamplingDistribution::from_rows(rows, PROBABILITY_FLOOR)?,
        CoherenceProfile { nu },
    ))
}

pub fn distribution_for(
    dict: &SpaceTimeDictionary,
    choice: DistributionChoice,
) -> Result<(SamplingDistribution, CoherenceProfile)> {
    match choice {
        DistributionChoice::Optimal => optimal_distribution(dict),
        DistributionChoice::Uniform => {
            let p = uniform_distribution(dict.n(), dict.steps())?;
            let nu = coherence(dict, &p)?;
            Ok((p, nu))
        }
    }
}

/// Splits `m` samples across time steps in proportion to `nu(t)^2`
/// (largest-remainder rounding, ties to the earlier step).
pub fn allocate_budget(nu: &CoherenceProfile, m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::invalid("sample budget must be positive"));
    }
    let steps = nu.nu.len();
    if steps == 0 {
        return Err(Error::invalid("empty coherence profile"));
    }
    let sq = nu.nu_sq();
    let total: f64 = sq.iter().sum();
    let shares: Vec<f64> = if total > 0.0 {
        sq.iter().map(|v| m as f64 * v / total).collect()
    } else {
        vec![m as f64 / steps as f64; steps]
    };
    let mut budgets: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = budgets.iter().sum();
    let mut order: Vec<usize> = (0..steps).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &t in order.iter().cycle().take(m.saturating_sub(assigned)) {
        budgets[t] += 1;
    }
    Ok(budgets)
}

/// Drawn node indices per time step and their reweighting factors
/// `1 / sqrt(m_t p_t(omega))`. Node indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    n: usize,
    omega: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    seed: u64,
}

impl SamplingPlan {
    /// Plan from explicit draws, weighted against `p`.
    pub fn from_draws(p: &SamplingDistribution, omega: Vec<Vec<usize>>, seed: u64) -> Result<Self> {
        if omega.len() != p.steps() {
            return Err(Error::DimensionMismatch(format!(
                "{} draw lists for {} time steps",
                omega.len(),
                p.steps()
            )));
        }
        let n = p.n();
        let mut weights = Vec::with_capacity(omega.len());
        for (t, draws) in omega.iter().enumerate() {
            let m_t = draws.len() as f64;
            let mut w = Vec::with_capacity(draws.len());
            for &i in draws {
                if i >= n {
                    return Err(Error::invalid(format!("node index {i} outside 0..{n}")));
                }
                w.push(1.0 / (m_t * p.row(t)[i]).sqrt());
            }
            weights.push(w);
        }
        Ok(SamplingPlan {
            n,
            omega,
            weights,
            seed,
        })
    }

    /// Every node once per step under the uniform distribution; all weights are 1.
    pub fn full(n: usize, steps: usize) -> Result<Self> {
        let p = uniform_distribution(n, steps)?;
        Self::from_draws(&p, vec![(0..n).collect(); steps], 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[Vec<usize>] {
        &self.omega
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn budgets(&self) -> Vec<usize> {
        self.omega.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.omega.iter().map(Vec::len).sum()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(t, draw, node, weight)` in measurement-row order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.omega
            .iter()
            .zip(&self.weights)
            .enumerate()
            .flat_map(|(t, (om, w))| {
                om.iter()
                    .zip(w)
                    .enumerate()
                    .map(move |(d, (&i, &wt))| (t, d, i, wt))
            })
    }

    /// CSV with header `t,draw_index,omega,weight`; `omega` is 1-based.
    pub fn to_csv(&self) -> String {
        let header = ["t", "draw_index", "omega", "weight"].map(String::from);
        render_csv(
            Some(&header),
            self.entries()
                .map(|(t, d, i, w)| [t.to_string(), d.to_string(), (i + 1).to_string(), w.to_string()]),
        )
    }
}

/// Draws `budgets[t]` nodes i.i.d. from `p_t` for every step (with
/// replacement, inverse-CDF sampling).
pub fn draw_samples(p: &SamplingDistribution, budgets: &[usize], seed: u64) -> Result<SamplingPlan> {
    if budgets.len() != p.steps() {
        return Err(Error::DimensionMismatch(format!(
            "{} budgets for {} time steps",
            budgets.len(),
            p.steps()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let n = p.n();
    let mut omega = Vec::with_capacity(budgets.len());
    for (t, &m_t) in budgets.iter().enumerate() {
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &q in p.row(t) {
            acc += q;
            cdf.push(acc);
        }
        let draws = (0..m_t)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                cdf.partition_point(|&c| c <= u).min(n - 1)
            })
            .collect();
        omega.push(draws);
    }
    SamplingPlan::from_draws(p, omega, seed)
}

/// The `M x k` matrix `Psi S Utilde`, rows in `(t, draw)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    phi: DMatrix<f64>,
}

impl MeasurementOperator {
    pub fn from_matrix(phi: DMatrix<f64>) -> Self {
        MeasurementOperator { phi }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn rows(&self) -> usize {
        self.phi.nrows()
    }

    pub fn cols(&self) -> usize {
        self.phi.ncols()
    }
}

fn check_plan(n: usize, steps: usize, plan: &SamplingPlan) -> Result<()> {
    if plan.n != n || plan.steps() != steps {
        return Err(Error::DimensionMismatch(format!(
            "plan drawn for n={}, T={}; expected n={n}, T={steps}",
            plan.n,
            plan.steps()
        )));
    }
    Ok(())
}

pub fn build_measurement(dict: &SpaceTimeDictionary, plan: &SamplingPlan) -> Result<MeasurementOperator> {
    check_plan(dict.n(), dict.steps(), plan)?;
    let n = dict.n();
    let u = dict.matrix();
    let mut phi = DMatrix::zeros(plan.total(), dict.k());
    for (row, (t, _, i, w)) in plan.entries().enumerate() {
        phi.row_mut(row).copy_from(&(u.row(t * n + i) * w));
    }
    Ok(MeasurementOperator { phi })
}

/// Reads the sampled coordinates of a length-`T n` space-time vector.
/// Returns the raw samples `y` and the reweighted samples `Psi y`.
pub fn apply_sampling(
    spacetime: &DVector<f64>,
    plan: &SamplingPlan,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if spacetime.len() != plan.n * plan.steps() {
        return Err(Error::DimensionMismatch(format!(
            "space-time vector has length {}, plan expects {}",
            spacetime.len(),
            plan.n * plan.steps()
        )));
    }
    let m = plan.total();
    let mut y = DVector::zeros(m);
    let mut yt = DVector::zeros(m);
    for (row, (t, _, i, w)) in plan.entries().enumerate() {
        let v = spacetime[t * plan.n + i];
        y[row] = v;
        yt[row] = w * v;
    }
    Ok((y, yt))
}

/// Applies the reweighting `Psi` to raw samples.
pub fn reweight(y: &DVector<f64>, plan: &SamplingPlan) -> Result<DVector<f64>> {
    if y.len() != plan.total() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples for a plan with {} draws",
            y.len(),
            plan.total()
        )));
    }
    Ok(DVector::from_iterator(
        y.len(),
        plan.entries().zip(y.iter()).map(|((_, _, _, w), v)| w * v),
    ))
}

fn ceil_count(v: f64) -> u64 {
    // forgive last-ulp noise so exact integers are not bumped up
    (v * (1.0 - 1e-12)).ceil().max(0.0) as u64
}

/// Per-step sample count `C nu^2 delta^-2 s ln^2(s) ln(k) ln(nT)` that
/// guarantees the restricted isometry property with constant `delta`.
pub fn rip_sample_bound(
    nu_sq: f64,
    s: usize,
    k: usize,
    n: usize,
    steps: usize,
    delta: f64,
    c: f64,
) -> Result<u64> {
    Ok(ceil_count(rip_sample_bound_value(nu_sq, s, k, n, steps, delta, c)?))
}

pub fn rip_sample_bound_value(
    nu_sq: f64,
    s: usize,
    k: usize,
    n: usize,
    steps: usize,
    delta: f64,
    c: f64,
) -> Result<f64> {
    if s < 2 || k < 2 {
        return Err(Error::invalid("bound needs s >= 2 and k >= 2"));
    }
    if !(delta > 0.0 && delta < 1.0) || !(c > 0.0) || !(nu_sq >= 0.0) || n == 0 || steps == 0 {
        return Err(Error::invalid("bound parameters out of domain"));
    }
    let ls = (s as f64).ln();
    Ok(c * nu_sq / (delta * delta)
        * s as f64
        * ls
        * ls
        * (k as f64).ln()
        * ((n * steps) as f64).ln())
}

/// `32 s nu^2 / (3 beta^2) ln(1/epsilon)`.
pub fn appendix_bound_tail(nu_sq: f64, s: usize, beta: f64, epsilon: f64) -> Result<f64> {
    if s == 0 || !(beta > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) || !(nu_sq >= 0.0) {
        return Err(Error::invalid("tail bound parameters out of domain"));
    }
    Ok(32.0 * s as f64 * nu_sq / (3.0 * beta * beta) * (1.0 / epsilon).ln())
}

/// `6272 s nu^2 ln(3nT) ln(4k) ln^2(4s) / eta^2`.
pub fn appendix_bound_expectation(
    nu_sq: f64,
    s: usize,
    k: usize,
    n: usize,
    steps: usize,
    eta: f64,
) -> Result<f64> {
    if s == 0 || k == 0 || n == 0 || steps == 0 || !(eta > 0.0) || !(nu_sq >= 0.0) {
        return Err(Error::invalid("expectation bound parameters out of domain"));
    }
    let l4s = (4.0 * s as f64).ln();
    Ok(6272.0 * s as f64 * nu_sq
        * (3.0 * (n * steps) as f64).ln()
        * (4.0 * k as f64).ln()
        * l4s
        * l4s
        / (eta * eta))
}

/// Integer sample count for a real-valued bound.
pub fn required_samples(bound: f64) -> u64 {
    ceil_count(bound)
}
