//! Multinomial ordinal data, cumulative-probability estimates, pooled
//! smoothed null variances, Kolmogorov-type trend statistics and the
//! record-resampling bootstrap.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    column_operator, estimate, matrix_feasible, one_cycle_applicable, row_operator, WeightMatrix,
};
use crate::order::{MatrixOrderSpec, OrderRestriction};
use crate::project::{verify_feasible, FEASIBILITY_TOL};
use crate::rng::{stream_rng, STREAM_BOOTSTRAP};

/// `I` groups of counts over `J` ordered categories; row `i` sums to the
/// group size `n_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalCounts {
    counts: Array2<u64>,
    group_sizes: Vec<u64>,
}

impl OrdinalCounts {
    pub fn new(counts: Array2<u64>) -> Result<Self> {
        let (groups, categories) = counts.dim();
        if groups < 2 {
            return Err(Error::InvalidCounts(format!("need at least two groups, got {groups}")));
        }
        if categories < 2 {
            return Err(Error::InvalidCounts(format!(
                "need at least two categories, got {categories}"
            )));
        }
        let group_sizes: Vec<u64> = counts.rows().into_iter().map(|r| r.sum()).collect();
        if let Some(i) = group_sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidCounts(format!("group {i} has no subjects")));
        }
        Ok(Self { counts, group_sizes })
    }

    pub fn group_count(&self) -> usize {
        self.counts.nrows()
    }

    pub fn categories(&self) -> usize {
        self.counts.ncols()
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    pub fn group_sizes(&self) -> &[u64] {
        &self.group_sizes
    }

    /// The common group size, if the design is balanced.
    pub fn equal_group_size(&self) -> Option<u64> {
        let n = self.group_sizes[0];
        self.group_sizes.iter().all(|&m| m == n).then_some(n)
    }
}

/// Per-subject records over several ordinal response variables, grouped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiResponseDataset {
    /// `groups[i]` holds one record per subject; a record holds one label
    /// per variable.
    groups: Vec<Vec<Vec<u32>>>,
    /// Category count per variable.
    categories: Vec<usize>,
}

impl MultiResponseDataset {
    pub fn new(groups: Vec<Vec<Vec<u32>>>, categories: Vec<usize>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidCounts(format!(
                "need at least two groups, got {}",
                groups.len()
            )));
        }
        if categories.is_empty() {
            return Err(Error::InvalidCounts("need at least one response variable".into()));
        }
        for (v, &j) in categories.iter().enumerate() {
            if j < 2 {
                return Err(Error::InvalidCounts(format!(
                    "variable {v} needs at least two categories, got {j}"
                )));
            }
        }
        for (i, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::InvalidCounts(format!("group {i} has no subjects")));
            }
            for record in group {
                if record.len() != categories.len() {
                    return Err(Error::InvalidCounts(format!(
                        "a record in group {i} has {} labels for {} variables",
                        record.len(),
                        categories.len()
                    )));
                }
                for (v, &label) in record.iter().enumerate() {
                    if label as usize >= categories[v] {
                        return Err(Error::InvalidCounts(format!(
                            "label {label} out of range for variable {v} \
                             with {} categories",
                            categories[v]
                        )));
                    }
                }
            }
        }
        Ok(Self { groups, categories })
    }

    /// Single-variable dataset with one record per counted subject.
    pub fn from_counts(d: &OrdinalCounts) -> Self {
        let groups = d
            .counts()
            .rows()
            .into_iter()
            .map(|row| {
                let mut records = Vec::new();
                for (label, &count) in row.iter().enumerate() {
                    for _ in 0..count {
                        records.push(vec![label as u32]);
                    }
                }
                records
            })
            .collect();
        Self { groups, categories: vec![d.categories()] }
    }

    pub fn variables(&self) -> usize {
        self.categories.len()
    }

    pub fn categories(&self) -> &[usize] {
        &self.categories
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group_sizes(&self) -> Vec<u64> {
        self.groups.iter().map(|g| g.len() as u64).collect()
    }

    pub fn counts_for(&self, variable: usize) -> Result<OrdinalCounts> {
        if variable >= self.variables() {
            return Err(Error::IndexOutOfRange { index: variable, len: self.variables() });
        }
        let mut counts = Array2::zeros((self.groups.len(), self.categories[variable]));
        for (i, group) in self.groups.iter().enumerate() {
            for record in group {
                counts[(i, record[variable] as usize)] += 1;
            }
        }
        OrdinalCounts::new(counts)
    }

    fn pooled_records(&self) -> Vec<&[u32]> {
        self.groups
            .iter()
            .flat_map(|g| g.iter().map(|r| r.as_slice()))
            .collect()
    }
}

/// Row `i` holds the cumulative sample proportions of group `i`; the last
/// column is exactly one and every row is nondecreasing.
pub fn cumulative_umle(d: &OrdinalCounts) -> Array2<f64> {
    let (groups, categories) = d.counts().dim();
    let mut theta = Array2::zeros((groups, categories));
    for i in 0..groups {
        let n = d.group_sizes()[i];
        let mut acc = 0u64;
        for j in 0..categories {
            acc += d.counts()[(i, j)];
            theta[(i, j)] = acc as f64 / n as f64;
        }
    }
    theta
}

/// Pooled Bayes (Dirichlet-smoothed) category probabilities
/// `(sum_i X_ir + I sqrt(n)/J) / (nI + I sqrt(n))`. Strictly positive and
/// summing to one; requires a balanced design.
pub fn pooled_smoothed_pi(d: &OrdinalCounts) -> Result<Vec<f64>> {
    let n = d
        .equal_group_size()
        .ok_or_else(|| Error::UnequalGroupSizes { sizes: d.group_sizes().to_vec() })?;
    let groups = d.group_count() as f64;
    let categories = d.categories() as f64;
    let root_n = (n as f64).sqrt();
    let denominator = n as f64 * groups + groups * root_n;
    let prior = groups * root_n / categories;
    Ok((0..d.categories())
        .map(|r| {
            let pooled: u64 = (0..d.group_count()).map(|i| d.counts()[(i, r)]).sum();
            (pooled as f64 + prior) / denominator
        })
        .collect())
}

/// Null variance of a cumulative proportion at cut `j` (0-based,
/// `j < J - 1`): the double sum over smoothed category probabilities, which
/// telescopes to `theta_j (1 - theta_j) / n`.
pub fn null_variance(pi_tilde: &[f64], j: usize, n: u64) -> Result<f64> {
    if j + 1 >= pi_tilde.len() {
        return Err(Error::IndexOutOfRange { index: j, len: pi_tilde.len().saturating_sub(1) });
    }
    if n == 0 {
        return Err(Error::InvalidCounts("group size must be positive".into()));
    }
    let theta: f64 = pi_tilde[..=j].iter().sum();
    Ok((theta * (1.0 - theta) / n as f64).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestAxis {
    Columns,
    Rows,
}

/// One standardized farthest-pair difference.
#[derive(Debug, Clone, Serialize)]
pub struct SubgraphContribution {
    pub axis: TestAxis,
    /// Column (for the column statistic) or row (for the row statistic)
    /// the chain was evaluated in.
    pub index: usize,
    pub chain: Vec<usize>,
    pub low: usize,
    pub high: usize,
    pub diff: f64,
    pub se: f64,
    pub z: f64,
}

/// A statistic value together with the contributions it maximized over.
#[derive(Debug, Clone)]
pub struct StatisticValue {
    pub value: f64,
    pub contributions: Vec<SubgraphContribution>,
}

fn standardize(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn lane_statistic<F>(
    fitted: &Array2<f64>,
    axis: TestAxis,
    lanes: &[usize],
    restriction: &OrderRestriction,
    se_fn: F,
) -> Result<StatisticValue>
where
    F: Fn(usize, usize, usize) -> f64,
{
    if restriction.is_trivial() {
        return Err(Error::InvalidConfig(
            "the tested axis carries no order restriction, so no statistic is defined".into(),
        ));
    }
    let mut contributions = Vec::with_capacity(lanes.len() * restriction.subgraphs().len());
    for &lane in lanes {
        for g in restriction.subgraphs() {
            let (low, high) = g.farthest_pair();
            let diff = match axis {
                TestAxis::Columns => fitted[(high, lane)] - fitted[(low, lane)],
                TestAxis::Rows => fitted[(lane, high)] - fitted[(lane, low)],
            };
            let se = se_fn(lane, low, high);
            contributions.push(SubgraphContribution {
                axis,
                index: lane,
                chain: g.chain().to_vec(),
                low,
                high,
                diff,
                se,
                z: standardize(diff, se),
            });
        }
    }
    let value = contributions.iter().map(|c| c.z).fold(f64::NEG_INFINITY, f64::max);
    Ok(StatisticValue { value, contributions })
}

/// Max standardized farthest-pair difference over every column restriction
/// subgraph and every informative column (the last cumulative column is
/// identically one and is skipped). `se_fn(column, low, high)` supplies the
/// null standard error.
pub fn t1_statistic<F>(
    fitted: &Array2<f64>,
    col_restriction: &OrderRestriction,
    se_fn: F,
) -> Result<StatisticValue>
where
    F: Fn(usize, usize, usize) -> f64,
{
    let (rows, cols) = fitted.dim();
    if col_restriction.p() != rows {
        return Err(Error::LengthMismatch(format!(
            "column restriction covers {} elements but the matrix has {rows} rows",
            col_restriction.p()
        )));
    }
    if cols < 2 {
        return Err(Error::InvalidDimension("need at least two categories".into()));
    }
    let lanes: Vec<usize> = (0..cols - 1).collect();
    lane_statistic(fitted, TestAxis::Columns, &lanes, col_restriction, se_fn)
}

/// Row-wise analogue of [`t1_statistic`], over all rows.
pub fn t2_statistic<F>(
    fitted: &Array2<f64>,
    row_restriction: &OrderRestriction,
    se_fn: F,
) -> Result<StatisticValue>
where
    F: Fn(usize, usize, usize) -> f64,
{
    let (rows, cols) = fitted.dim();
    if row_restriction.p() != cols {
        return Err(Error::LengthMismatch(format!(
            "row restriction covers {} elements but the matrix has {cols} columns",
            row_restriction.p()
        )));
    }
    let lanes: Vec<usize> = (0..rows).collect();
    lane_statistic(fitted, TestAxis::Rows, &lanes, row_restriction, se_fn)
}

pub fn t_statistic(t1: f64, t2: f64) -> f64 {
    t1.max(t2)
}

/// `min(1, m * p)`.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    debug_assert!(m >= 1, "correction needs at least one test");
    (p * m as f64).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Equality within columns against the column restriction.
    Columns,
    /// Equality within rows against the row restriction.
    Rows,
    /// Both at once, via the max of the two statistics.
    Both,
}

/// Order-restricted fit of the cumulative matrix used by the tests.
///
/// Estimation weights follow the group sizes (rank 1); when one axis of the
/// start matrix already satisfies its restriction a single pass of the
/// other operator lands in the joint restriction set, so the iteration is
/// skipped.
pub fn fitted_cumulative(d: &OrdinalCounts, spec: &MatrixOrderSpec) -> Result<Array2<f64>> {
    let theta = cumulative_umle(d);
    fitted_from_umle(&theta, d, spec)
}

fn group_size_weights(d: &OrdinalCounts) -> WeightMatrix {
    let u: Vec<f64> = d.group_sizes().iter().map(|&n| n as f64).collect();
    let v = vec![1.0; d.categories()];
    WeightMatrix::from_outer(&u, &v).expect("group sizes are positive")
}

fn fitted_from_umle(
    theta: &Array2<f64>,
    d: &OrdinalCounts,
    spec: &MatrixOrderSpec,
) -> Result<Array2<f64>> {
    let weights = group_size_weights(d);
    if one_cycle_applicable(spec, &weights, &weights) {
        let rows_feasible = theta
            .rows()
            .into_iter()
            .all(|r| verify_feasible(&r.to_vec(), spec.row_restriction(), 0.0).is_ok());
        if rows_feasible {
            return column_operator(theta, &weights, spec.col_restriction());
        }
        let cols_feasible = theta
            .columns()
            .into_iter()
            .all(|c| verify_feasible(&c.to_vec(), spec.col_restriction(), 0.0).is_ok());
        if cols_feasible {
            return row_operator(theta, &weights, spec.row_restriction());
        }
    }
    let est = estimate(theta, spec, &weights, &weights, 1e-10, 1000)?;
    if !est.converged {
        return Err(Error::InvalidConfig(format!(
            "order-restricted fit did not converge (last change {:.3e})",
            est.sup_delta_1.max(est.sup_delta_2)
        )));
    }
    Ok(est.final_estimate)
}

/// The trend statistic for one ordinal table: fit under the joint
/// restriction, then standardize farthest-pair differences with the pooled
/// smoothed null variance.
pub fn test_statistic(
    d: &OrdinalCounts,
    spec: &MatrixOrderSpec,
    hypothesis: Hypothesis,
) -> Result<StatisticValue> {
    if (spec.rows(), spec.cols()) != (d.group_count(), d.categories()) {
        return Err(Error::LengthMismatch(format!(
            "counts are {}x{} but the restriction is for {}x{}",
            d.group_count(),
            d.categories(),
            spec.rows(),
            spec.cols()
        )));
    }
    let n = d
        .equal_group_size()
        .ok_or_else(|| Error::UnequalGroupSizes { sizes: d.group_sizes().to_vec() })?;
    let fitted = fitted_cumulative(d, spec)?;
    let pi = pooled_smoothed_pi(d)?;
    let categories = d.categories();
    let mut variances = Vec::with_capacity(categories - 1);
    for j in 0..categories - 1 {
        variances.push(null_variance(&pi, j, n)?);
    }
    // cumulative smoothed probabilities, last pinned at one
    let mut cum = vec![0.0; categories];
    let mut acc = 0.0;
    for (j, &p) in pi.iter().enumerate() {
        acc += p;
        cum[j] = acc;
    }
    cum[categories - 1] = 1.0;

    let col_se = |k: usize, _lo: usize, _hi: usize| (2.0 * variances[k]).sqrt();
    let row_se = |_lane: usize, lo: usize, hi: usize| {
        let q = (cum[hi] - cum[lo]).clamp(0.0, 1.0);
        (q * (1.0 - q) / n as f64).sqrt()
    };

    match hypothesis {
        Hypothesis::Columns => t1_statistic(&fitted, spec.col_restriction(), col_se),
        Hypothesis::Rows => t2_statistic(&fitted, spec.row_restriction(), row_se),
        Hypothesis::Both => {
            let t1 = t1_statistic(&fitted, spec.col_restriction(), col_se)?;
            let t2 = t2_statistic(&fitted, spec.row_restriction(), row_se)?;
            let value = t_statistic(t1.value, t2.value);
            let mut contributions = t1.contributions;
            contributions.extend(t2.contributions);
            Ok(StatisticValue { value, contributions })
        }
    }
}

/// Convention for counting bootstrap replicates against the observed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exceedance {
    /// `T* > T`; the default.
    Strict,
    /// `T* >= T`; matches rejection against bootstrap critical values.
    GreaterOrEqual,
}

#[derive(Debug, Clone)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub exceedance: Exceedance,
    /// Re-run the full iterative fit next to the single-pass shortcut and
    /// assert agreement. Costly; intended for self-checks.
    pub debug_full_pipeline: bool,
}

impl BootstrapOptions {
    pub fn new(seed: u64) -> Self {
        Self { replicates: 10_000, seed, exceedance: Exceedance::Strict, debug_full_pipeline: false }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_exceedance(mut self, exceedance: Exceedance) -> Self {
        self.exceedance = exceedance;
        self
    }
}

/// Bootstrap test report for one variable.
#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub p_adjusted: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub per_subgraph: Vec<SubgraphContribution>,
}

impl TestResult {
    pub fn with_bonferroni(mut self, tests: usize) -> Self {
        self.p_adjusted = Some(bonferroni(self.p_value, tests));
        self
    }
}

/// Record-resampling bootstrap p-values for every variable at once, from
/// shared replicate draws.
///
/// Each replicate pools all records, redraws every group at its original
/// size with replacement (whole records, preserving cross-variable
/// dependence), recomputes the statistic and counts exceedances. The result
/// is a deterministic function of `(data, spec, hypothesis, options)`.
pub fn bootstrap_all_variables(
    data: &MultiResponseDataset,
    hypothesis: Hypothesis,
    spec: &MatrixOrderSpec,
    opts: &BootstrapOptions,
) -> Result<Vec<TestResult>> {
    let variables: Vec<usize> = (0..data.variables()).collect();
    bootstrap_for_variables(data, &variables, hypothesis, spec, opts)
}

/// Single-variable convenience over the shared engine: with the same seed
/// it reproduces the corresponding entry of [`bootstrap_all_variables`].
pub fn bootstrap_pvalue(
    data: &MultiResponseDataset,
    variable: usize,
    hypothesis: Hypothesis,
    spec: &MatrixOrderSpec,
    opts: &BootstrapOptions,
) -> Result<TestResult> {
    if variable >= data.variables() {
        return Err(Error::IndexOutOfRange { index: variable, len: data.variables() });
    }
    let mut results = bootstrap_for_variables(data, &[variable], hypothesis, spec, opts)?;
    Ok(results.pop().expect("one variable requested"))
}

fn bootstrap_for_variables(
    data: &MultiResponseDataset,
    variables: &[usize],
    hypothesis: Hypothesis,
    spec: &MatrixOrderSpec,
    opts: &BootstrapOptions,
) -> Result<Vec<TestResult>> {
    if opts.replicates == 0 {
        return Err(Error::InvalidConfig("need at least one bootstrap replicate".into()));
    }
    let pool = data.pooled_records();
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let group_sizes = data.group_sizes();
    let observed: Vec<StatisticValue> = variables
        .iter()
        .map(|&v| {
            let counts = data.counts_for(v)?;
            if opts.debug_full_pipeline {
                assert_full_pipeline_agreement(&counts, spec)?;
            }
            test_statistic(&counts, spec, hypothesis)
        })
        .collect::<Result<_>>()?;

    let exceed_counts: Vec<u64> = (0..opts.replicates)
        .into_par_iter()
        .map(|replicate| -> Result<Vec<bool>> {
            let mut rng = stream_rng(opts.seed, STREAM_BOOTSTRAP, replicate as u64);
            let mut drawn: Vec<&[u32]> = Vec::with_capacity(pool.len());
            for &size in &group_sizes {
                for _ in 0..size {
                    drawn.push(pool[rng.random_range(0..pool.len())]);
                }
            }
            let mut flags = Vec::with_capacity(variables.len());
            for (slot, &v) in variables.iter().enumerate() {
                let mut counts = Array2::zeros((group_sizes.len(), data.categories()[v]));
                let mut offset = 0usize;
                for (i, &size) in group_sizes.iter().enumerate() {
                    for k in 0..size as usize {
                        counts[(i, drawn[offset + k][v] as usize)] += 1u64;
                    }
                    offset += size as usize;
                }
                let replicate_counts = OrdinalCounts::new(counts)?;
                let stat = test_statistic(&replicate_counts, spec, hypothesis)?;
                let exceeds = match opts.exceedance {
                    Exceedance::Strict => stat.value > observed[slot].value,
                    Exceedance::GreaterOrEqual => stat.value >= observed[slot].value,
                };
                flags.push(exceeds);
            }
            Ok(flags)
        })
        .try_fold(
            || vec![0u64; variables.len()],
            |mut acc, flags| -> Result<Vec<u64>> {
                for (a, f) in acc.iter_mut().zip(flags?) {
                    *a += u64::from(f);
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; variables.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    Ok(observed
        .into_iter()
        .zip(exceed_counts)
        .map(|(stat, count)| TestResult {
            statistic: stat.value,
            p_value: count as f64 / opts.replicates as f64,
            p_adjusted: None,
            replicates: opts.replicates,
            seed: opts.seed,
            per_subgraph: stat.contributions,
        })
        .collect())
}

fn assert_full_pipeline_agreement(d: &OrdinalCounts, spec: &MatrixOrderSpec) -> Result<()> {
    let shortcut = fitted_cumulative(d, spec)?;
    let weights = group_size_weights(d);
    let full = estimate(&cumulative_umle(d), spec, &weights, &weights, 1e-10, 1000)?;
    let max_diff = shortcut
        .iter()
        .zip(full.final_estimate.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(
        max_diff < 1e-8,
        "single-pass fit and full iteration disagree by {max_diff:e}"
    );
    debug_assert!(matrix_feasible(&shortcut, spec, FEASIBILITY_TOL).is_ok());
    Ok(())
}
