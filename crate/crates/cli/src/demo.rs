//! Bundled skin-toxicity dataset: three mouse genotypes, ten animals each,
//! six ordinal severity variables on five levels. The published table
//! reports cumulative relative frequencies; the raw per-category counts are
//! recovered by scaling to the group size and differencing.

use ndarray::Array2;
use ordmat::{
    bootstrap_all_variables, BootstrapOptions, Hypothesis, MatrixOrderSpec,
    MultiResponseDataset, OrderRestriction, OrdinalCounts, Result, SubgraphContribution,
    TestResult,
};
use serde::Serialize;

pub const GROUP_SIZE: u64 = 10;
pub const CATEGORY_COUNT: usize = 5;

/// Genotypes in the tested trend order: the hypothesis is that cumulative
/// severity profiles ascend along this sequence (COX-1 deficient mice react
/// most severely, COX-2 deficient least).
pub const GENOTYPES: [&str; 3] = ["COX-1-d", "WT", "COX-2-d"];

pub const VARIABLES: [&str; 6] = [
    "microblister",
    "ulceration",
    "epidermal_necrosis",
    "acute_inflammation",
    "hemorrhage",
    "dermal_necrosis",
];

/// Cumulative relative frequencies per variable, rows in [`GENOTYPES`]
/// order over the severity levels unremarkable..marked.
const CUMULATIVE: [[[f64; CATEGORY_COUNT]; 3]; 6] = [
    [[0.0, 0.2, 1.0, 1.0, 1.0], [0.0, 0.5, 0.9, 1.0, 1.0], [0.3, 0.8, 1.0, 1.0, 1.0]],
    [[0.4, 0.5, 0.8, 0.9, 1.0], [0.8, 0.9, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0, 1.0]],
    [[0.0, 0.0, 0.0, 0.3, 1.0], [0.0, 0.0, 0.1, 0.8, 1.0], [0.1, 0.2, 0.7, 0.8, 1.0]],
    [[0.0, 0.0, 0.5, 1.0, 1.0], [0.0, 0.0, 0.6, 1.0, 1.0], [0.1, 0.5, 1.0, 1.0, 1.0]],
    [[0.0, 0.1, 0.9, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0, 1.0], [0.1, 0.4, 1.0, 1.0, 1.0]],
    [[0.0, 0.1, 0.8, 1.0, 1.0], [0.0, 0.1, 0.9, 1.0, 1.0], [0.2, 0.4, 1.0, 1.0, 1.0]],
];

fn counts_row(cumulative: &[f64; CATEGORY_COUNT]) -> [u64; CATEGORY_COUNT] {
    let mut counts = [0u64; CATEGORY_COUNT];
    let mut previous = 0.0;
    for (j, &c) in cumulative.iter().enumerate() {
        let diff = (c - previous) * GROUP_SIZE as f64;
        let rounded = diff.round();
        assert!(
            (diff - rounded).abs() < 1e-9 && rounded >= 0.0,
            "cumulative table must scale to integer counts"
        );
        counts[j] = rounded as u64;
        previous = c;
    }
    assert_eq!(counts.iter().sum::<u64>(), GROUP_SIZE);
    counts
}

/// Reconstructed per-category counts for one variable.
pub fn demo_counts(variable: usize) -> OrdinalCounts {
    let table = &CUMULATIVE[variable];
    let mut counts = Array2::zeros((3, CATEGORY_COUNT));
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in counts_row(row).iter().enumerate() {
            counts[(i, j)] = c;
        }
    }
    OrdinalCounts::new(counts).expect("bundled counts are valid")
}

/// Per-animal records across all six variables.
///
/// Only the per-variable marginals are published, so the joint coupling is
/// reconstructed by aligning the sorted label lists within each genotype
/// (animal k takes the k-th smallest label of every variable). Each
/// variable's bootstrap distribution depends only on its own marginal, so
/// the coupling choice does not move the reported p-values.
pub fn demo_dataset() -> MultiResponseDataset {
    let per_variable: Vec<OrdinalCounts> = (0..VARIABLES.len()).map(demo_counts).collect();
    let mut groups = Vec::with_capacity(3);
    for genotype in 0..3 {
        let mut labels: Vec<Vec<u32>> = Vec::with_capacity(VARIABLES.len());
        for counts in &per_variable {
            let mut sorted = Vec::with_capacity(GROUP_SIZE as usize);
            for category in 0..CATEGORY_COUNT {
                for _ in 0..counts.counts()[(genotype, category)] {
                    sorted.push(category as u32);
                }
            }
            labels.push(sorted);
        }
        let records: Vec<Vec<u32>> = (0..GROUP_SIZE as usize)
            .map(|animal| labels.iter().map(|l| l[animal]).collect())
            .collect();
        groups.push(records);
    }
    MultiResponseDataset::new(groups, vec![CATEGORY_COUNT; VARIABLES.len()])
        .expect("bundled records are valid")
}

/// The joint restriction for the demo analysis: cumulative rows ascend over
/// severity levels, columns ascend over the genotype trend.
pub fn demo_spec() -> MatrixOrderSpec {
    MatrixOrderSpec::new(
        3,
        CATEGORY_COUNT,
        OrderRestriction::simple_order(CATEGORY_COUNT).expect("valid"),
        OrderRestriction::simple_order(3).expect("valid"),
    )
    .expect("valid")
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoVariableResult {
    pub variable: String,
    pub statistic: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub significant: bool,
    pub per_subgraph: Vec<SubgraphContribution>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub genotype_order: Vec<String>,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub variables: Vec<DemoVariableResult>,
}

/// Runs all six trend tests from shared bootstrap draws and applies the
/// family-wise correction; significance compares adjusted p-values to
/// `alpha`.
pub fn analyze(replicates: usize, seed: u64, alpha: f64) -> Result<DemoReport> {
    let data = demo_dataset();
    let spec = demo_spec();
    let opts = BootstrapOptions::new(seed).with_replicates(replicates);
    let results: Vec<TestResult> =
        bootstrap_all_variables(&data, Hypothesis::Columns, &spec, &opts)?
            .into_iter()
            .map(|r| r.with_bonferroni(VARIABLES.len()))
            .collect();
    let variables = results
        .into_iter()
        .zip(VARIABLES)
        .map(|(r, name)| {
            let adjusted = r.p_adjusted.expect("correction applied");
            DemoVariableResult {
                variable: name.to_string(),
                statistic: r.statistic,
                p_value: r.p_value,
                p_adjusted: adjusted,
                significant: adjusted < alpha,
                per_subgraph: r.per_subgraph,
            }
        })
        .collect();
    Ok(DemoReport {
        genotype_order: GENOTYPES.iter().map(|g| g.to_string()).collect(),
        alpha,
        replicates,
        seed,
        variables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ordmat::cumulative_umle;

    #[test]
    fn counts_reproduce_the_published_cumulative_rows() {
        for (v, table) in CUMULATIVE.iter().enumerate() {
            let counts = demo_counts(v);
            let theta = cumulative_umle(&counts);
            for i in 0..3 {
                for j in 0..CATEGORY_COUNT {
                    assert!(
                        (theta[(i, j)] - table[i][j]).abs() < 1e-12,
                        "variable {v} genotype {i} level {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn microblister_counts_match_hand_differencing() {
        let counts = demo_counts(0);
        assert_eq!(
            counts.counts().row(0).to_vec(),
            vec![0, 2, 8, 0, 0],
            "first genotype microblister counts"
        );
    }

    #[test]
    fn dataset_marginals_match_the_counts() {
        let data = demo_dataset();
        for v in 0..VARIABLES.len() {
            assert_eq!(data.counts_for(v).unwrap(), demo_counts(v));
        }
        assert_eq!(data.group_sizes(), vec![GROUP_SIZE; 3]);
    }
}
