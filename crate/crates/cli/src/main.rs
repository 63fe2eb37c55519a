//! Command-line front end: estimation, trend testing, the two simulation
//! studies and the bundled toxicology walkthrough.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use ordmat::rng::fnv1a64;
use ordmat::{
    estimate, matrix_feasible, run_estimation_sim, run_power_sim, table3_scenarios,
    BootstrapOptions, EstimationSimConfig, Exceedance, Hypothesis, MatrixOrderSpec,
    MatrixFeasibilityViolation, MultiResponseDataset, PowerSimConfig, RestrictionSpec,
    SubgraphContribution, WeightMatrix,
};
use rand::Rng;
use serde::Serialize;

use ordmat_cli::demo;
use ordmat_cli::io;
use ordmat_cli::report::{demo_table, estimation_table, power_table, Report};

#[derive(Debug)]
enum CliError {
    /// Bad input or usage; exit code 2.
    Input(String),
    /// Numerical non-convergence; exit code 3.
    NonConvergence(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::NonConvergence(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<ordmat::Error> for CliError {
    fn from(e: ordmat::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HypothesisArg {
    Columns,
    Rows,
    Both,
}

impl From<HypothesisArg> for Hypothesis {
    fn from(h: HypothesisArg) -> Self {
        match h {
            HypothesisArg::Columns => Hypothesis::Columns,
            HypothesisArg::Rows => Hypothesis::Rows,
            HypothesisArg::Both => Hypothesis::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExceedanceArg {
    Strict,
    Ge,
}

impl From<ExceedanceArg> for Exceedance {
    fn from(e: ExceedanceArg) -> Self {
        match e {
            ExceedanceArg::Strict => Exceedance::Strict,
            ExceedanceArg::Ge => Exceedance::GreaterOrEqual,
        }
    }
}

/// Flat key = value defaults loaded from `--config`; explicit flags win.
#[derive(Default)]
struct Overlay(toml::Table);

impl Overlay {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let table: toml::Table = text
                    .parse()
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                Ok(Self(table))
            }
        }
    }

    fn integer(&self, key: &str) -> CliResult<Option<u64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(CliError::Input(format!(
                "config key {key:?} must be a nonnegative integer, got {other}"
            ))),
        }
    }

    fn float(&self, key: &str) -> CliResult<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(CliError::Input(format!(
                "config key {key:?} must be a number, got {other}"
            ))),
        }
    }

    fn string(&self, key: &str) -> CliResult<Option<String>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(CliError::Input(format!(
                "config key {key:?} must be a string, got {other}"
            ))),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ordmat",
    version,
    about = "Order-restricted matrix estimation and bootstrap trend tests for ordinal data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a matrix under row and column order restrictions.
    Estimate {
        /// Headerless CSV matrix to fit.
        #[arg(long)]
        input: PathBuf,
        /// Restriction applied to every row: none, simple, umbrella:K,
        /// tree:K or chains:...
        #[arg(long, default_value = "simple")]
        row_order: String,
        /// Restriction applied to every column.
        #[arg(long, default_value = "simple")]
        col_order: String,
        /// CSV weight matrix used by the row passes (default all ones).
        #[arg(long)]
        row_weights: Option<PathBuf>,
        /// CSV weight matrix used by the column passes (default all ones).
        #[arg(long)]
        col_weights: Option<PathBuf>,
        /// Convergence threshold on the between-cycle sup-norm change.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        max_cycles: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Flat key = value defaults; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Bootstrap trend test on ordinal counts or subject records.
    Test {
        /// Count CSV (group,c1,...,cJ) or, with --records, long-format
        /// subject records (group,subject,var,category).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = false)]
        records: bool,
        /// Category count override for record input.
        #[arg(long)]
        categories: Option<usize>,
        #[arg(long, default_value = "simple")]
        row_order: String,
        #[arg(long, default_value = "simple")]
        col_order: String,
        #[arg(long, value_enum, default_value_t = HypothesisArg::Columns)]
        hypothesis: HypothesisArg,
        #[arg(long)]
        replicates: Option<usize>,
        /// Replicate counting rule for the p-value.
        #[arg(long, value_enum, default_value_t = ExceedanceArg::Strict)]
        exceedance: ExceedanceArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Accuracy study of the restricted estimator on noisy matrices.
    SimulateEstimation {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        noise_scale: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Size/power study of the bootstrap trend test on a bundled scenario.
    SimulatePower {
        /// Scenario id such as t3-null-01; mistakes list the valid ids.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        sims: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Also run the two-group one-sided distribution-distance
        /// competitor on the same draws.
        #[arg(long, default_value_t = false)]
        ks: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Analyze the bundled skin-toxicity dataset.
    AnalyzeDemo {
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the reconstructed per-variable count tables into this
        /// directory.
        #[arg(long)]
        emit_counts: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Seed precedence: flag, then config, then the ORDMAT_SEED_STREAM
/// environment name hashed to a seed, then entropy. The resolved value is
/// embedded in every report.
fn resolve_seed(flag: Option<u64>, overlay: &Overlay) -> CliResult<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Some(seed) = overlay.integer("seed")? {
        return Ok(seed);
    }
    if let Ok(name) = std::env::var("ORDMAT_SEED_STREAM") {
        if !name.is_empty() {
            return Ok(fnv1a64(name.as_bytes()));
        }
    }
    Ok(rand::rng().random())
}

fn emit(output: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn matrix_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn build_spec(
    rows: usize,
    cols: usize,
    row_order: &str,
    col_order: &str,
) -> CliResult<MatrixOrderSpec> {
    let row_spec: RestrictionSpec = row_order.parse().map_err(CliError::from)?;
    let col_spec: RestrictionSpec = col_order.parse().map_err(CliError::from)?;
    Ok(MatrixOrderSpec::new(rows, cols, row_spec.build(cols)?, col_spec.build(rows)?)?)
}

#[derive(Serialize)]
struct EstimateConfigEcho {
    input: String,
    row_order: String,
    col_order: String,
    row_weights: Option<String>,
    col_weights: Option<String>,
    tol: f64,
    max_cycles: usize,
}

#[derive(Serialize)]
struct FeasibilityEcho {
    theta_tilde_1: Option<MatrixFeasibilityViolation>,
    theta_tilde_2: Option<MatrixFeasibilityViolation>,
    final_estimate: Option<MatrixFeasibilityViolation>,
}

#[derive(Serialize)]
struct EstimateResultEcho {
    theta_tilde_1: Vec<Vec<f64>>,
    theta_tilde_2: Vec<Vec<f64>>,
    final_estimate: Vec<Vec<f64>>,
    iterations_1: usize,
    iterations_2: usize,
    converged: bool,
    sup_delta_1: f64,
    sup_delta_2: f64,
    /// First violated pair per matrix, absent when feasible.
    feasibility: FeasibilityEcho,
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    input: PathBuf,
    row_order: String,
    col_order: String,
    row_weights: Option<PathBuf>,
    col_weights: Option<PathBuf>,
    tol: f64,
    max_cycles: usize,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Format,
    config: Option<PathBuf>,
) -> CliResult<()> {
    let overlay = Overlay::load(config.as_ref())?;
    let seed = resolve_seed(seed, &overlay)?;
    let matrix = io::read_matrix_csv(fs::File::open(&input)?)?;
    let (rows, cols) = matrix.dim();
    let spec = build_spec(rows, cols, &row_order, &col_order)?;
    let load_weights = |path: &Option<PathBuf>| -> CliResult<WeightMatrix> {
        match path {
            None => Ok(WeightMatrix::ones(rows, cols)),
            Some(p) => {
                let w = io::read_matrix_csv(fs::File::open(p)?)?;
                Ok(WeightMatrix::new(w)?)
            }
        }
    };
    let w_r = load_weights(&row_weights)?;
    let w_c = load_weights(&col_weights)?;

    let fit = estimate(&matrix, &spec, &w_r, &w_c, tol, max_cycles)?;
    let feasibility = FeasibilityEcho {
        theta_tilde_1: matrix_feasible(&fit.theta_tilde_1, &spec, ordmat::FEASIBILITY_TOL).err(),
        theta_tilde_2: matrix_feasible(&fit.theta_tilde_2, &spec, ordmat::FEASIBILITY_TOL).err(),
        final_estimate: matrix_feasible(&fit.final_estimate, &spec, ordmat::FEASIBILITY_TOL).err(),
    };
    let result = EstimateResultEcho {
        theta_tilde_1: matrix_rows(&fit.theta_tilde_1),
        theta_tilde_2: matrix_rows(&fit.theta_tilde_2),
        final_estimate: matrix_rows(&fit.final_estimate),
        iterations_1: fit.iterations_1,
        iterations_2: fit.iterations_2,
        converged: fit.converged,
        sup_delta_1: fit.sup_delta_1,
        sup_delta_2: fit.sup_delta_2,
        feasibility,
    };
    let report = Report::new(
        "estimate",
        seed,
        EstimateConfigEcho {
            input: input.display().to_string(),
            row_order,
            col_order,
            row_weights: row_weights.map(|p| p.display().to_string()),
            col_weights: col_weights.map(|p| p.display().to_string()),
            tol,
            max_cycles,
        },
        result,
    );
    let text = match format {
        Format::Json => report.to_json(),
        Format::Table => {
            let mut t = String::new();
            t.push_str(&format!(
                "iterations: {} (column-first), {} (row-first); converged: {}\n",
                fit.iterations_1, fit.iterations_2, fit.converged
            ));
            for (name, m) in [
                ("theta_tilde_1", &fit.theta_tilde_1),
                ("theta_tilde_2", &fit.theta_tilde_2),
                ("final", &fit.final_estimate),
            ] {
                t.push_str(&format!("{name}:\n"));
                for row in m.rows() {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
                    t.push_str(&format!("  {}\n", cells.join(" ")));
                }
            }
            t
        }
    };
    emit(output.as_ref(), &text)?;
    if !fit.converged {
        return Err(CliError::NonConvergence(format!(
            "no convergence within {max_cycles} cycles; last sup-norm changes {:.3e} and {:.3e}",
            fit.sup_delta_1, fit.sup_delta_2
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct TestConfigEcho {
    input: String,
    records: bool,
    row_order: String,
    col_order: String,
    hypothesis: String,
    replicates: usize,
    exceedance: String,
}

#[derive(Serialize)]
struct VariableTestEcho {
    variable: String,
    statistic: f64,
    p_value: f64,
    p_adjusted: f64,
    replicates: usize,
    seed: u64,
    per_subgraph: Vec<SubgraphContribution>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_test(
    input: PathBuf,
    records: bool,
    categories: Option<usize>,
    row_order: String,
    col_order: String,
    hypothesis: HypothesisArg,
    replicates: Option<usize>,
    exceedance: ExceedanceArg,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Format,
    config: Option<PathBuf>,
) -> CliResult<()> {
    let overlay = Overlay::load(config.as_ref())?;
    let seed = resolve_seed(seed, &overlay)?;
    let replicates = match replicates {
        Some(r) => r,
        None => overlay.integer("replicates")?.map(|v| v as usize).unwrap_or(10_000),
    };
    if replicates == 0 {
        return Err(CliError::Input("need at least one bootstrap replicate".into()));
    }

    let file = fs::File::open(&input)?;
    let (variable_names, dataset) = if records {
        let (_groups, vars, data) = io::read_records_csv(file, categories)?;
        (vars, data)
    } else {
        let (_labels, counts) = io::read_counts_csv(file)?;
        (vec!["response".to_string()], MultiResponseDataset::from_counts(&counts))
    };

    let groups = dataset.group_count();
    let hypothesis_core: Hypothesis = hypothesis.into();
    let opts = BootstrapOptions::new(seed)
        .with_replicates(replicates)
        .with_exceedance(exceedance.into());

    // all variables share one category count in record files unless a
    // variable-specific table is needed; the joint restriction is built per
    // variable below
    let mut outputs = Vec::with_capacity(variable_names.len());
    for (v, name) in variable_names.iter().enumerate() {
        let var_categories = dataset.categories()[v];
        let spec = build_spec(groups, var_categories, &row_order, &col_order)?;
        let result = ordmat::bootstrap_pvalue(&dataset, v, hypothesis_core, &spec, &opts)?
            .with_bonferroni(variable_names.len());
        outputs.push(VariableTestEcho {
            variable: name.clone(),
            statistic: result.statistic,
            p_value: result.p_value,
            p_adjusted: result.p_adjusted.expect("correction applied"),
            replicates: result.replicates,
            seed: result.seed,
            per_subgraph: result.per_subgraph,
        });
    }

    let report = Report::new(
        "test",
        seed,
        TestConfigEcho {
            input: input.display().to_string(),
            records,
            row_order,
            col_order,
            hypothesis: format!("{hypothesis:?}").to_lowercase(),
            replicates,
            exceedance: format!("{exceedance:?}").to_lowercase(),
        },
        outputs,
    );
    let text = match format {
        Format::Json => report.to_json(),
        Format::Table => {
            let mut t = String::new();
            t.push_str(&format!("replicates={replicates} seed={seed}\n"));
            t.push_str("  variable              statistic      raw p  adjusted p\n");
            for v in &report.result {
                t.push_str(&format!(
                    "  {:<20} {:>10.4} {:>10.5} {:>11.4}\n",
                    v.variable, v.statistic, v.p_value, v.p_adjusted
                ));
            }
            t
        }
    };
    emit(output.as_ref(), &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_estimation(
    rows: Option<usize>,
    cols: Option<usize>,
    runs: Option<usize>,
    noise_scale: Option<f64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Format,
    config: Option<PathBuf>,
) -> CliResult<()> {
    let overlay = Overlay::load(config.as_ref())?;
    let seed = resolve_seed(seed, &overlay)?;
    let pick_usize = |flag: Option<usize>, key: &str, default: usize| -> CliResult<usize> {
        Ok(match flag {
            Some(v) => v,
            None => overlay.integer(key)?.map(|v| v as usize).unwrap_or(default),
        })
    };
    let mut sim = EstimationSimConfig::new(
        pick_usize(rows, "rows", 2)?,
        pick_usize(cols, "cols", 5)?,
        pick_usize(runs, "runs", 2000)?,
        seed,
    );
    sim.noise_scale = match noise_scale {
        Some(v) => v,
        None => overlay.float("noise-scale")?.unwrap_or(1.0),
    };
    let result = run_estimation_sim(&sim)?;
    let report = Report::new("simulate-estimation", seed, sim.clone(), result.clone());
    let text = match format {
        Format::Json => report.to_json(),
        Format::Table => estimation_table(&result),
    };
    emit(output.as_ref(), &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_power(
    scenario: Option<String>,
    n: Option<u64>,
    sims: Option<usize>,
    replicates: Option<usize>,
    alpha: Option<f64>,
    ks: bool,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Format,
    config: Option<PathBuf>,
) -> CliResult<()> {
    let overlay = Overlay::load(config.as_ref())?;
    let seed = resolve_seed(seed, &overlay)?;
    let scenario_id = match scenario {
        Some(s) => s,
        None => overlay
            .string("scenario")?
            .ok_or_else(|| CliError::Input("missing --scenario".into()))?,
    };
    let scenario = ordmat::find_scenario(&scenario_id).ok_or_else(|| {
        let ids: Vec<&str> = table3_scenarios().iter().map(|s| s.id.as_str()).collect();
        CliError::Input(format!(
            "unknown scenario {scenario_id:?}; valid ids: {}",
            ids.join(", ")
        ))
    })?;
    let mut sim = PowerSimConfig::new(
        scenario.clone(),
        match n {
            Some(v) => v,
            None => overlay.integer("n")?.unwrap_or(20),
        },
        match sims {
            Some(v) => v,
            None => overlay.integer("sims")?.map(|v| v as usize).unwrap_or(2000),
        },
        match replicates {
            Some(v) => v,
            None => overlay.integer("replicates")?.map(|v| v as usize).unwrap_or(500),
        },
        seed,
    );
    sim.alpha = match alpha {
        Some(v) => v,
        None => overlay.float("alpha")?.unwrap_or(0.05),
    };
    sim.with_ks = ks;
    let result = run_power_sim(&sim)?;
    let report = Report::new("simulate-power", seed, sim.clone(), result.clone());
    let text = match format {
        Format::Json => report.to_json(),
        Format::Table => power_table(&result),
    };
    emit(output.as_ref(), &text)
}

#[derive(Serialize)]
struct DemoConfigEcho {
    replicates: usize,
    alpha: f64,
    emit_counts: Option<String>,
}

fn cmd_analyze_demo(
    replicates: Option<usize>,
    alpha: Option<f64>,
    emit_counts: Option<PathBuf>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Format,
    config: Option<PathBuf>,
) -> CliResult<()> {
    let overlay = Overlay::load(config.as_ref())?;
    let seed = resolve_seed(seed, &overlay)?;
    let replicates = match replicates {
        Some(v) => v,
        None => overlay.integer("replicates")?.map(|v| v as usize).unwrap_or(50_000),
    };
    let alpha = match alpha {
        Some(v) => v,
        None => overlay.float("alpha")?.unwrap_or(0.05),
    };
    if let Some(dir) = &emit_counts {
        fs::create_dir_all(dir)?;
        let labels: Vec<String> = demo::GENOTYPES.iter().map(|g| g.to_string()).collect();
        for (v, name) in demo::VARIABLES.iter().enumerate() {
            let path = Path::new(dir).join(format!("{name}.csv"));
            let file = fs::File::create(&path)?;
            io::write_counts_csv(file, &labels, &demo::demo_counts(v))?;
        }
    }
    let result = demo::analyze(replicates, seed, alpha)?;
    let report = Report::new(
        "analyze-demo",
        seed,
        DemoConfigEcho {
            replicates,
            alpha,
            emit_counts: emit_counts.map(|p| p.display().to_string()),
        },
        result.clone(),
    );
    let text = match format {
        Format::Json => report.to_json(),
        Format::Table => demo_table(&result),
    };
    emit(output.as_ref(), &text)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Estimate {
            input,
            row_order,
            col_order,
            row_weights,
            col_weights,
            tol,
            max_cycles,
            seed,
            output,
            format,
            config,
        } => cmd_estimate(
            input, row_order, col_order, row_weights, col_weights, tol, max_cycles, seed, output,
            format, config,
        ),
        Command::Test {
            input,
            records,
            categories,
            row_order,
            col_order,
            hypothesis,
            replicates,
            exceedance,
            seed,
            output,
            format,
            config,
        } => cmd_test(
            input, records, categories, row_order, col_order, hypothesis, replicates, exceedance,
            seed, output, format, config,
        ),
        Command::SimulateEstimation {
            rows,
            cols,
            runs,
            noise_scale,
            seed,
            output,
            format,
            config,
        } => cmd_simulate_estimation(rows, cols, runs, noise_scale, seed, output, format, config),
        Command::SimulatePower {
            scenario,
            n,
            sims,
            replicates,
            alpha,
            ks,
            seed,
            output,
            format,
            config,
        } => cmd_simulate_power(
            scenario, n, sims, replicates, alpha, ks, seed, output, format, config,
        ),
        Command::AnalyzeDemo { replicates, alpha, emit_counts, seed, output, format, config } => {
            cmd_analyze_demo(replicates, alpha, emit_counts, seed, output, format, config)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
