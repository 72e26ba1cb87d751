//! Config-driven experiment runner for the resonator model: loads a scenario,
//! runs one of the canonical experiments, writes CSV tables and SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod config;
pub mod error;
pub mod experiments;
pub mod golden;
pub mod plot;
pub mod table;

use std::path::{Path, PathBuf};

use sslr_core::optimize::FULL_BUDGET_SAMPLES;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use experiments::{run_experiment, Experiment, ExperimentOutput, Failure};
pub use table::{Column, ResultTable};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const OUT_DIR_ENV: &str = "SSLR_OUT_DIR";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub full_budget: bool,
    pub check: bool,
}

/// Where results go: explicit flag (or env var), then the config, then `out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// The scenario after command-line overrides; this is what gets hashed.
pub fn effective_config(cfg: &ScenarioConfig, opts: &RunOptions) -> ScenarioConfig {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.optimizer.seed = seed;
    }
    if opts.full_budget {
        cfg.optimizer.n_smax = FULL_BUDGET_SAMPLES;
    }
    cfg
}

fn stamp(t: &mut ResultTable, exp: Experiment, cfg: &ScenarioConfig, hash: &str, timestamp: &str) {
    let extra = std::mem::take(&mut t.metadata);
    t.set_meta("experiment", exp.name());
    t.set_meta("seed", cfg.optimizer.seed.to_string());
    t.set_meta("config_hash", hash);
    t.set_meta("tool_version", TOOL_VERSION);
    t.set_meta(table::TIMESTAMP_KEY, timestamp);
    for (k, v) in extra {
        t.set_meta(&k, v);
    }
}

/// Numeric summary of a model error, written next to any partial results.
pub fn diagnostic_table(exp: Experiment, err: &CliError) -> ResultTable {
    use sslr_core::Error as E;
    let mut spec: Vec<(&str, &str)> = vec![("failed", "")];
    let mut row = vec![1.0];
    if let CliError::Model(e) = err {
        match e {
            E::Infeasible { samples, counts } => {
                spec.extend([
                    ("samples", ""),
                    ("non_positive", ""),
                    ("unstable_at_d_set", ""),
                    ("l1_radius_exceeded", ""),
                    ("l2_radius_exceeded", ""),
                    ("unstable_in_range", ""),
                ]);
                row.extend(
                    [
                        *samples,
                        counts.non_positive,
                        counts.unstable_at_design_distance,
                        counts.l1_radius_exceeded,
                        counts.l2_radius_exceeded,
                        counts.unstable_in_range,
                    ]
                    .map(|v| v as f64),
                );
            }
            E::Unstable { distance, product } => {
                spec.extend([("distance", "m"), ("g_product", "")]);
                row.extend([*distance, *product]);
            }
            E::NoConvergence { residual } => {
                spec.push(("residual", "w"));
                row.push(*residual);
            }
            E::AscentNoConvergence {
                best_objective,
                best_a_g,
                best_reflectivity,
            } => {
                spec.extend([("eta_trans", ""), ("a_g", "m"), ("r_m2", "")]);
                row.extend([*best_objective, *best_a_g, *best_reflectivity]);
            }
            E::LosslessCavity(p) => {
                spec.push(("r1_r2", ""));
                row.push(*p);
            }
            _ => {}
        }
    }
    let mut t = ResultTable::new(
        &format!("{}_diagnostic", exp.stem()),
        spec.iter().map(|(n, u)| Column::new(n, u)).collect(),
    );
    t.push(row);
    t.set_meta("error", err.to_string().replace('\n', " "));
    t
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub tables: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

/// Run one experiment and write its artifacts under `out_dir`.
///
/// On a model error the partial tables and a diagnostic table are still
/// written before the error is returned.
pub fn run(exp: Experiment, cfg: &ScenarioConfig, opts: &RunOptions, out_dir: &Path) -> Result<RunSummary, CliError> {
    let cfg = effective_config(cfg, opts);
    cfg.validate()?;
    let hash = cfg.hash();
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut summary = RunSummary::default();

    let mut output = match run_experiment(exp, &cfg) {
        Ok(o) => o,
        Err(Failure { error, partial }) => {
            for mut t in partial.into_iter().chain([diagnostic_table(exp, &error)]) {
                stamp(&mut t, exp, &cfg, &hash, &timestamp);
                t.write(out_dir)?;
            }
            return Err(error);
        }
    };
    for t in &mut output.tables {
        stamp(t, exp, &cfg, &hash, &timestamp);
        summary.tables.push(t.write(out_dir)?);
    }
    for (name, spec) in &output.plots {
        let t = output
            .table(name)
            .ok_or_else(|| CliError::Plot(format!("no table `{name}` for plot `{}`", spec.name)))?;
        summary.plots.push(plot::emit_plot(t, spec, out_dir)?);
    }
    if opts.check {
        let failures = golden::check(exp, &output);
        if !failures.is_empty() {
            return Err(CliError::Golden(failures));
        }
    }
    Ok(summary)
}
