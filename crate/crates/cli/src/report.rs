//! Report envelope and text rendering. JSON reports keep a stable key
//! order and embed the seed, the resolved configuration and the tool
//! version, so a rerun with the embedded seed reproduces the bytes.

use ordmat::{EstimationReport, PowerReport};
use serde::Serialize;

use crate::demo::DemoReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    /// Report schema version.
    pub spec: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &'static str, seed: u64, config: C, result: R) -> Self {
        Self {
            spec: SCHEMA_VERSION,
            tool: "ordmat",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

fn fmt_opt(value: Option<f64>, width: usize, precision: usize) -> String {
    match value {
        Some(v) => format!("{v:>width$.precision$}"),
        None => format!("{:>width$}", "n/a"),
    }
}

/// Plain-text table mirroring the accuracy study's columns.
pub fn estimation_table(report: &EstimationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "rows={} cols={} runs={} seed={} noise_scale={}\n",
        report.rows, report.cols, report.runs, report.seed, report.noise_scale
    ));
    out.push_str(
        "  I   J   bias(fit)   bias(raw)     quad%    quart%\n",
    );
    out.push_str(&format!(
        "{:>3} {:>3} {:>11.4} {:>11.4} {} {}\n",
        report.rows,
        report.cols,
        report.bias_restricted,
        report.bias_unrestricted,
        fmt_opt(report.loss_reduction_quadratic, 9, 2),
        fmt_opt(report.loss_reduction_quartic, 9, 2),
    ));
    out.push_str(&format!(
        "  (mc se: bias(fit) {:.4}, bias(raw) {:.4}, quad {}, quart {})\n",
        report.bias_restricted_se,
        report.bias_unrestricted_se,
        fmt_opt(report.loss_reduction_quadratic_se, 1, 2),
        fmt_opt(report.loss_reduction_quartic_se, 1, 2),
    ));
    out
}

pub fn power_table(report: &PowerReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario={} null={} normalized={} groups={} categories={} n={} sims={} replicates={} alpha={} seed={}\n",
        report.scenario_id,
        report.null,
        report.normalized,
        report.groups,
        report.categories,
        report.n,
        report.sims,
        report.bootstrap_replicates,
        report.alpha,
        report.seed
    ));
    out.push_str(&format!(
        "  trend rejection: {:.4} (mc se {:.4})\n",
        report.rejection_trend, report.rejection_trend_se
    ));
    if let (Some(ks), Some(se)) = (report.rejection_ks, report.rejection_ks_se) {
        out.push_str(&format!("  ks rejection:    {ks:.4} (mc se {se:.4})\n"));
    }
    if let Some(paired) = &report.paired {
        out.push_str(&format!(
            "  paired: both={} trend_only={} ks_only={} neither={}\n",
            paired.both, paired.trend_only, paired.ks_only, paired.neither
        ));
    }
    out
}

pub fn demo_table(report: &DemoReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "trend order: {} (cumulative severity ascends along this order)\n",
        report.genotype_order.join(" <= ")
    ));
    out.push_str(&format!(
        "replicates={} seed={} alpha={}\n",
        report.replicates, report.seed, report.alpha
    ));
    out.push_str("  variable              statistic      raw p  adjusted p  significant\n");
    for v in &report.variables {
        out.push_str(&format!(
            "  {:<20} {:>10.4} {:>10.5} {:>11.4}  {}\n",
            v.variable,
            v.statistic,
            v.p_value,
            v.p_adjusted,
            if v.significant { "yes" } else { "no" }
        ));
    }
    out
}
