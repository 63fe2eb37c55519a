//! Estimation and hypothesis testing for matrix-valued parameters whose
//! rows and columns carry order restrictions.
//!
//! The crate builds up in layers:
//!
//! * [`order`] encodes restrictions as chains (maximally linked subgraphs)
//!   and answers structural queries such as nodal membership.
//! * [`project`] projects weighted vectors onto the simple-order cone and
//!   extends the projection to arbitrary restrictions via nodal-first
//!   estimation with weight pinning.
//! * [`matrix`] alternates the column and row estimators over a matrix,
//!   iterates both composition orders to their limits and averages them;
//!   rank-1 weight matrices converge in a single cycle.
//! * [`ordinal`] applies the machinery to grouped ordinal counts:
//!   cumulative-probability estimates, pooled smoothed null variances,
//!   Kolmogorov-type trend statistics and a record-resampling bootstrap.
//! * [`sim`] reproduces the estimation-accuracy and size/power studies.
//! * [`rng`] derives named, versioned random streams so every stochastic
//!   result is a pure function of its seed.

pub mod error;
pub mod matrix;
pub mod order;
pub mod ordinal;
pub mod project;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use matrix::{
    check_rank1, column_operator, estimate, matrix_feasible, one_cycle_applicable, row_operator,
    MatrixEstimate, MatrixFeasibilityViolation, WeightMatrix,
};
pub use order::{
    LinkedSubgraph, MatrixOrderSpec, OrderRestriction, RestrictionKind, RestrictionSpec,
};
pub use ordinal::{
    bonferroni, bootstrap_all_variables, bootstrap_pvalue, cumulative_umle, fitted_cumulative,
    null_variance, pooled_smoothed_pi, t1_statistic, t2_statistic, t_statistic, test_statistic,
    BootstrapOptions, Exceedance, Hypothesis, MultiResponseDataset, OrdinalCounts,
    StatisticValue, SubgraphContribution, TestAxis, TestResult,
};
pub use project::{
    hp_estimate, project_simple_order_minmax, project_simple_order_pava, verify_feasible,
    FeasibilityViolation, ProjectionResult, WeightedVector, EQUALITY_TOL, FEASIBILITY_TOL,
};
pub use sim::{
    find_scenario, ks_one_sided, run_estimation_sim, run_power_sim, table3_scenarios,
    EstimationReport, EstimationSimConfig, PowerReport, PowerSimConfig, Table3Scenario,
};
