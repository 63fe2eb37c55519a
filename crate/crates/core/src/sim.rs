//! Simulation harnesses: the estimation-accuracy study on normal data and
//! the size/power study for the ordinal trend test, plus the bundled
//! multinomial scenario table.

use std::sync::OnceLock;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{estimate, WeightMatrix};
use crate::order::{MatrixOrderSpec, OrderRestriction};
use crate::ordinal::{cumulative_umle, test_statistic, Hypothesis, OrdinalCounts};
use crate::rng::{derive_seed, stream_rng, STREAM_ESTIMATION_SIM, STREAM_POWER_BOOT, STREAM_POWER_DATA};

/// Accuracy study configuration. The mean surface is ascending in the row
/// index down every column and dips back over the last three columns of
/// each row, so columns carry a simple order and rows a tree order rooted
/// at the first column. Cell `(i, j)` is observed with variance `1/i`
/// (1-based `i`) and estimation weight `sqrt(i)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationSimConfig {
    pub rows: usize,
    pub cols: usize,
    pub runs: usize,
    pub seed: u64,
    /// Multiplier on the per-cell standard deviation; zero collapses the
    /// noise for degenerate checks.
    pub noise_scale: f64,
}

impl EstimationSimConfig {
    pub fn new(rows: usize, cols: usize, runs: usize, seed: u64) -> Self {
        Self { rows, cols, runs, seed, noise_scale: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.rows < 2 {
            return Err(Error::InvalidConfig("need at least two rows".into()));
        }
        if self.cols < 4 {
            return Err(Error::InvalidConfig(
                "need at least four columns so the ascending block is nonempty".into(),
            ));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("need at least one run".into()));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::InvalidConfig("noise scale must be nonnegative".into()));
        }
        Ok(())
    }
}

/// The target mean at 1-based `(i1, j1)`.
pub fn estimation_mean(rows_j: usize, i1: usize, j1: usize) -> f64 {
    let j_count = rows_j as i64;
    let (i1, j1) = (i1 as i64, j1 as i64);
    if j1 < j_count - 2 {
        (i1 + j1) as f64
    } else {
        (i1 - j1 + j_count + 1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub rows: usize,
    pub cols: usize,
    pub runs: usize,
    pub seed: u64,
    pub noise_scale: f64,
    /// Mean of (restricted estimate - target) over cells and runs.
    pub bias_restricted: f64,
    pub bias_restricted_se: f64,
    /// Mean of (unrestricted estimate - target); the raw draws.
    pub bias_unrestricted: f64,
    pub bias_unrestricted_se: f64,
    /// `100 (1 - restricted loss / unrestricted loss)`; absent when the
    /// unrestricted loss vanishes.
    pub loss_reduction_quadratic: Option<f64>,
    pub loss_reduction_quadratic_se: Option<f64>,
    pub loss_reduction_quartic: Option<f64>,
    pub loss_reduction_quartic_se: Option<f64>,
}

struct RunAccumulator {
    dev_restricted: f64,
    dev_unrestricted: f64,
    quad_restricted: f64,
    quad_unrestricted: f64,
    quart_restricted: f64,
    quart_unrestricted: f64,
}

/// Draws noisy matrices around the study means, fits them under the joint
/// restriction and accumulates bias and loss against the targets.
pub fn run_estimation_sim(config: &EstimationSimConfig) -> Result<EstimationReport> {
    config.validate()?;
    let (rows, cols) = (config.rows, config.cols);
    let spec = MatrixOrderSpec::new(
        rows,
        cols,
        OrderRestriction::simple_tree(cols, 0)?,
        OrderRestriction::simple_order(rows)?,
    )?;
    let root_i: Vec<f64> = (1..=rows).map(|i| (i as f64).sqrt()).collect();
    let weights = WeightMatrix::from_outer(&root_i, &vec![1.0; cols])?;
    debug_assert!(weights.is_rank1());
    let targets = Array2::from_shape_fn((rows, cols), |(i, j)| {
        estimation_mean(cols, i + 1, j + 1)
    });
    let sds: Vec<f64> = (1..=rows)
        .map(|i| config.noise_scale / (i as f64).sqrt())
        .collect();

    let per_run: Vec<RunAccumulator> = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<RunAccumulator> {
            let mut rng = stream_rng(config.seed, STREAM_ESTIMATION_SIM, run as u64);
            let mut draw = Array2::zeros((rows, cols));
            for i in 0..rows {
                for j in 0..cols {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    draw[(i, j)] = targets[(i, j)] + sds[i] * z;
                }
            }
            let fit = estimate(&draw, &spec, &weights, &weights, 1e-10, 1000)?;
            let mut acc = RunAccumulator {
                dev_restricted: 0.0,
                dev_unrestricted: 0.0,
                quad_restricted: 0.0,
                quad_unrestricted: 0.0,
                quart_restricted: 0.0,
                quart_unrestricted: 0.0,
            };
            for ((idx, &target), &raw) in targets.indexed_iter().zip(draw.iter()) {
                let dr = fit.final_estimate[idx] - target;
                let du = raw - target;
                acc.dev_restricted += dr;
                acc.dev_unrestricted += du;
                acc.quad_restricted += dr * dr;
                acc.quad_unrestricted += du * du;
                acc.quart_restricted += dr.powi(4);
                acc.quart_unrestricted += du.powi(4);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    // aggregate sequentially in run order so the report is reproducible
    // bit for bit regardless of worker count
    let cells = (rows * cols) as f64;
    let runs = config.runs as f64;
    let mut sums = [0.0f64; 6];
    for acc in &per_run {
        sums[0] += acc.dev_restricted;
        sums[1] += acc.dev_unrestricted;
        sums[2] += acc.quad_restricted;
        sums[3] += acc.quad_unrestricted;
        sums[4] += acc.quart_restricted;
        sums[5] += acc.quart_unrestricted;
    }
    let bias_restricted = sums[0] / (runs * cells);
    let bias_unrestricted = sums[1] / (runs * cells);
    let mean_se = |pick: &dyn Fn(&RunAccumulator) -> f64, mean: f64| {
        let var = per_run
            .iter()
            .map(|a| {
                let d = pick(a) / cells - mean;
                d * d
            })
            .sum::<f64>()
            / (runs - 1.0).max(1.0);
        (var / runs).sqrt()
    };
    let reduction = |restricted: f64, unrestricted: f64| {
        (unrestricted > 0.0).then(|| 100.0 * (1.0 - restricted / unrestricted))
    };
    // standard error of the loss ratio by the ratio-estimator expansion
    let ratio_se = |num: &dyn Fn(&RunAccumulator) -> f64,
                    den: &dyn Fn(&RunAccumulator) -> f64,
                    total_num: f64,
                    total_den: f64| {
        if total_den <= 0.0 {
            return None;
        }
        let ratio = total_num / total_den;
        let mean_den = total_den / runs;
        let var = per_run
            .iter()
            .map(|a| {
                let d = num(a) - ratio * den(a);
                d * d
            })
            .sum::<f64>()
            / (runs - 1.0).max(1.0);
        Some(100.0 * (var / runs).sqrt() / mean_den)
    };

    Ok(EstimationReport {
        rows,
        cols,
        runs: config.runs,
        seed: config.seed,
        noise_scale: config.noise_scale,
        bias_restricted,
        bias_restricted_se: mean_se(&|a| a.dev_restricted, bias_restricted),
        bias_unrestricted,
        bias_unrestricted_se: mean_se(&|a| a.dev_unrestricted, bias_unrestricted),
        loss_reduction_quadratic: reduction(sums[2], sums[3]),
        loss_reduction_quadratic_se: ratio_se(
            &|a| a.quad_restricted,
            &|a| a.quad_unrestricted,
            sums[2],
            sums[3],
        ),
        loss_reduction_quartic: reduction(sums[4], sums[5]),
        loss_reduction_quartic_se: ratio_se(
            &|a| a.quart_restricted,
            &|a| a.quart_unrestricted,
            sums[4],
            sums[5],
        ),
    })
}

/// One multinomial configuration from the bundled scenario table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table3Scenario {
    pub id: String,
    /// Whether every group shares one probability row.
    pub null: bool,
    pub pi: Vec<Vec<f64>>,
    /// Set when a transcribed row needed renormalization to sum to one.
    #[serde(default)]
    pub normalized: bool,
}

impl Table3Scenario {
    pub fn groups(&self) -> usize {
        self.pi.len()
    }

    pub fn categories(&self) -> usize {
        self.pi[0].len()
    }
}

static TABLE3: OnceLock<Vec<Table3Scenario>> = OnceLock::new();

/// The bundled scenario table. Rows that do not sum to one in the printed
/// source are normalized and flagged.
pub fn table3_scenarios() -> &'static [Table3Scenario] {
    TABLE3.get_or_init(|| {
        let mut scenarios: Vec<Table3Scenario> =
            serde_json::from_str(include_str!("table3.json")).expect("bundled table parses");
        for scenario in &mut scenarios {
            for row in &mut scenario.pi {
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    for p in row.iter_mut() {
                        *p /= total;
                    }
                    scenario.normalized = true;
                }
            }
        }
        scenarios
    })
}

pub fn find_scenario(id: &str) -> Option<&'static Table3Scenario> {
    table3_scenarios().iter().find(|s| s.id == id)
}

/// Size/power study configuration for one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct PowerSimConfig {
    pub scenario: Table3Scenario,
    pub n: u64,
    pub sims: usize,
    pub bootstrap_replicates: usize,
    pub alpha: f64,
    /// Also run the one-sided distribution-distance competitor on the same
    /// draws (two-group scenarios only).
    pub with_ks: bool,
    pub seed: u64,
}

impl PowerSimConfig {
    pub fn new(scenario: Table3Scenario, n: u64, sims: usize, bootstrap_replicates: usize, seed: u64) -> Self {
        Self { scenario, n, sims, bootstrap_replicates, alpha: 0.05, with_ks: false, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("need a positive group size".into()));
        }
        if self.sims == 0 || self.bootstrap_replicates == 0 {
            return Err(Error::InvalidConfig(
                "need at least one simulation and one bootstrap replicate".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must lie strictly inside (0, 1)".into()));
        }
        if self.with_ks && self.scenario.groups() != 2 {
            return Err(Error::UnsupportedRestriction(
                "the one-sided distribution-distance competitor compares exactly two groups".into(),
            ));
        }
        Ok(())
    }
}

/// Paired per-simulation rejection counts when the competitor runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairedRejections {
    pub both: usize,
    pub trend_only: usize,
    pub ks_only: usize,
    pub neither: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub scenario_id: String,
    pub null: bool,
    pub normalized: bool,
    pub groups: usize,
    pub categories: usize,
    pub n: u64,
    pub sims: usize,
    pub bootstrap_replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub rejection_trend: f64,
    pub rejection_trend_se: f64,
    pub rejection_ks: Option<f64>,
    pub rejection_ks_se: Option<f64>,
    pub paired: Option<PairedRejections>,
}

/// One-sided sup distance between the two cumulative rows over the
/// informative columns, oriented so the second group dominating the first
/// counts as evidence.
pub fn ks_one_sided(d: &OrdinalCounts) -> Result<f64> {
    if d.group_count() != 2 {
        return Err(Error::UnsupportedRestriction(format!(
            "the one-sided distribution distance compares exactly two groups, got {}",
            d.group_count()
        )));
    }
    let theta = cumulative_umle(d);
    let mut best = f64::NEG_INFINITY;
    for j in 0..d.categories() - 1 {
        best = best.max(theta[(1, j)] - theta[(0, j)]);
    }
    Ok(best)
}

pub(crate) fn sample_multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c < u).min(last);
        counts[k] += 1;
    }
    counts
}

struct SimOutcome {
    trend_reject: bool,
    ks_reject: Option<bool>,
}

/// Runs the bootstrap trend test (and optionally the two-group competitor
/// on the same draws) over simulated multinomial data and reports
/// rejection rates. A simulation rejects when the observed statistic
/// exceeds the bootstrap critical value, i.e. when the share of replicate
/// statistics at or above the observed one is at most `alpha`.
pub fn run_power_sim(config: &PowerSimConfig) -> Result<PowerReport> {
    config.validate()?;
    let scenario = &config.scenario;
    let groups = scenario.groups();
    let categories = scenario.categories();
    if categories < 2 {
        return Err(Error::InvalidConfig("scenario needs at least two categories".into()));
    }
    let spec = MatrixOrderSpec::new(
        groups,
        categories,
        OrderRestriction::simple_order(categories)?,
        OrderRestriction::simple_order(groups)?,
    )?;

    let outcomes: Vec<SimOutcome> = (0..config.sims)
        .into_par_iter()
        .map(|sim| -> Result<SimOutcome> {
            let mut data_rng = stream_rng(config.seed, STREAM_POWER_DATA, sim as u64);
            let mut counts = Array2::zeros((groups, categories));
            for (i, row) in scenario.pi.iter().enumerate() {
                for (j, c) in sample_multinomial(&mut data_rng, config.n, row).into_iter().enumerate() {
                    counts[(i, j)] = c;
                }
            }
            let observed = OrdinalCounts::new(counts)?;
            let trend_obs = test_statistic(&observed, &spec, Hypothesis::Columns)?.value;
            let ks_obs = if config.with_ks { Some(ks_one_sided(&observed)?) } else { None };

            // pooled labels; resampling whole records reduces to drawing
            // labels uniformly from this pool
            let mut pool: Vec<u32> = Vec::with_capacity((groups as u64 * config.n) as usize);
            for i in 0..groups {
                for j in 0..categories {
                    for _ in 0..observed.counts()[(i, j)] {
                        pool.push(j as u32);
                    }
                }
            }
            let boot_seed = derive_seed(config.seed, STREAM_POWER_BOOT, sim as u64);
            let mut trend_at_or_above = 0usize;
            let mut ks_at_or_above = 0usize;
            for replicate in 0..config.bootstrap_replicates {
                let mut rng = stream_rng(boot_seed, crate::rng::STREAM_BOOTSTRAP, replicate as u64);
                let mut replicate_counts = Array2::zeros((groups, categories));
                for i in 0..groups {
                    for _ in 0..config.n {
                        let label = pool[rng.random_range(0..pool.len())];
                        replicate_counts[(i, label as usize)] += 1u64;
                    }
                }
                let replicate_data = OrdinalCounts::new(replicate_counts)?;
                let trend_star = test_statistic(&replicate_data, &spec, Hypothesis::Columns)?.value;
                if trend_star >= trend_obs {
                    trend_at_or_above += 1;
                }
                if let Some(obs) = ks_obs {
                    if ks_one_sided(&replicate_data)? >= obs {
                        ks_at_or_above += 1;
                    }
                }
            }
            let b = config.bootstrap_replicates as f64;
            Ok(SimOutcome {
                trend_reject: trend_at_or_above as f64 / b <= config.alpha,
                ks_reject: ks_obs.map(|_| ks_at_or_above as f64 / b <= config.alpha),
            })
        })
        .collect::<Result<_>>()?;

    let sims = config.sims as f64;
    let trend_rejections = outcomes.iter().filter(|o| o.trend_reject).count();
    let rejection_trend = trend_rejections as f64 / sims;
    let binomial_se = |p: f64| (p * (1.0 - p) / sims).sqrt();

    let (rejection_ks, rejection_ks_se, paired) = if config.with_ks {
        let ks_rejections = outcomes.iter().filter(|o| o.ks_reject == Some(true)).count();
        let rate = ks_rejections as f64 / sims;
        let mut paired = PairedRejections { both: 0, trend_only: 0, ks_only: 0, neither: 0 };
        for o in &outcomes {
            match (o.trend_reject, o.ks_reject == Some(true)) {
                (true, true) => paired.both += 1,
                (true, false) => paired.trend_only += 1,
                (false, true) => paired.ks_only += 1,
                (false, false) => paired.neither += 1,
            }
        }
        (Some(rate), Some(binomial_se(rate)), Some(paired))
    } else {
        (None, None, None)
    };

    Ok(PowerReport {
        scenario_id: scenario.id.clone(),
        null: scenario.null,
        normalized: scenario.normalized,
        groups,
        categories,
        n: config.n,
        sims: config.sims,
        bootstrap_replicates: config.bootstrap_replicates,
        alpha: config.alpha,
        seed: config.seed,
        rejection_trend,
        rejection_trend_se: binomial_se(rejection_trend),
        rejection_ks,
        rejection_ks_se,
        paired,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_pattern_matches_definition() {
        // J = 5 rows run (i+1, i+2, i+3, i+2, i+1)
        let row: Vec<f64> = (1..=5).map(|j| estimation_mean(5, 2, j)).collect();
        assert_eq!(row, vec![3.0, 4.0, 5.0, 4.0, 3.0]);
        // J = 10 keeps ascending through j = 7 and ends (i+3, i+2, i+1)
        let row: Vec<f64> = (1..=10).map(|j| estimation_mean(10, 1, j)).collect();
        assert_eq!(row, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 4.0, 3.0, 2.0]);
    }

    #[test]
    fn config_validation() {
        assert!(run_estimation_sim(&EstimationSimConfig::new(1, 5, 10, 0)).is_err());
        assert!(run_estimation_sim(&EstimationSimConfig::new(2, 3, 10, 0)).is_err());
        assert!(run_estimation_sim(&EstimationSimConfig::new(2, 5, 0, 0)).is_err());
    }

    #[test]
    fn zero_noise_reports_no_reduction() {
        let mut config = EstimationSimConfig::new(2, 5, 5, 3);
        config.noise_scale = 0.0;
        let report = run_estimation_sim(&config).unwrap();
        assert_eq!(report.loss_reduction_quadratic, None);
        assert_eq!(report.loss_reduction_quartic, None);
        assert!(report.bias_restricted.abs() < 1e-12);
    }

    #[test]
    fn estimation_sim_is_reproducible() {
        let config = EstimationSimConfig::new(2, 5, 50, 9);
        let a = run_estimation_sim(&config).unwrap();
        let b = run_estimation_sim(&config).unwrap();
        assert_eq!(a.bias_restricted, b.bias_restricted);
        assert_eq!(a.loss_reduction_quadratic, b.loss_reduction_quadratic);
    }

    #[test]
    fn scenario_table_loads() {
        let scenarios = table3_scenarios();
        assert_eq!(scenarios.len(), 40);
        assert_eq!(scenarios.iter().filter(|s| s.null).count(), 24);
        for s in scenarios {
            for row in &s.pi {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{}", s.id);
            }
            if s.null {
                for row in &s.pi[1..] {
                    assert_eq!(row, &s.pi[0], "{}", s.id);
                }
            }
        }
        // the uniform three-category rows needed renormalization
        assert!(find_scenario("t3-null-01").unwrap().normalized);
        assert!(!find_scenario("t3-null-02").unwrap().normalized);
        assert!(find_scenario("t3-alt-02").is_some());
        assert!(find_scenario("missing").is_none());
    }

    #[test]
    fn ks_examples() {
        let identical = OrdinalCounts::new(ndarray::array![[3u64, 3, 4], [3, 3, 4]]).unwrap();
        assert_eq!(ks_one_sided(&identical).unwrap(), 0.0);

        let shifted = OrdinalCounts::new(ndarray::array![[2u64, 2, 6], [5, 2, 3]]).unwrap();
        // cumulative rows (.2,.4), (.5,.7): gap 0.3 at both cuts
        assert!((ks_one_sided(&shifted).unwrap() - 0.3).abs() < 1e-12);

        let three = OrdinalCounts::new(ndarray::array![[1u64, 1], [1, 1], [1, 1]]).unwrap();
        assert!(ks_one_sided(&three).is_err());
    }

    #[test]
    fn ks_matches_direct_enumeration() {
        let mut rng = stream_rng(77, "test/ks", 0);
        for _ in 0..50 {
            let mut counts = Array2::zeros((2, 4));
            for i in 0..2 {
                for j in 0..4 {
                    counts[(i, j)] = rng.random_range(0..5u64);
                }
                if (0..4).map(|j| counts[(i, j)]).sum::<u64>() == 0 {
                    counts[(i, 0)] = 1;
                }
            }
            let d = OrdinalCounts::new(counts).unwrap();
            let theta = cumulative_umle(&d);
            let mut expect = f64::NEG_INFINITY;
            for j in 0..3 {
                expect = expect.max(theta[(1, j)] - theta[(0, j)]);
            }
            assert_eq!(ks_one_sided(&d).unwrap(), expect);
        }
    }

    #[test]
    fn multinomial_sampler_is_exhaustive() {
        let mut rng = stream_rng(3, "test/multinomial", 0);
        let counts = sample_multinomial(&mut rng, 100, &[0.2, 0.3, 0.5]);
        assert_eq!(counts.iter().sum::<u64>(), 100);
        assert_eq!(counts.len(), 3);
    }

    #[test]
    fn power_sim_smoke() {
        let scenario = find_scenario("t3-alt-02").unwrap().clone();
        let mut config = PowerSimConfig::new(scenario, 30, 20, 40, 123);
        config.with_ks = true;
        let report = run_power_sim(&config).unwrap();
        assert!(report.rejection_trend >= 0.0 && report.rejection_trend <= 1.0);
        let paired = report.paired.unwrap();
        assert_eq!(
            paired.both + paired.trend_only + paired.ks_only + paired.neither,
            config.sims
        );
        // strong separation at n = 30 rejects essentially always
        assert!(report.rejection_trend > 0.9);

        let again = run_power_sim(&config).unwrap();
        assert_eq!(report.rejection_trend, again.rejection_trend);
        assert_eq!(report.rejection_ks, again.rejection_ks);
    }

    #[test]
    fn power_sim_rejects_ks_for_three_groups() {
        let scenario = find_scenario("t3-null-15").unwrap().clone();
        let mut config = PowerSimConfig::new(scenario, 10, 5, 10, 1);
        config.with_ks = true;
        assert!(run_power_sim(&config).is_err());
    }
}
