//! `gwve classify`: moment ledger plus finite-horizon criticality evidence.
//!
//! Data goes to `--out` (or stdout); human-readable warnings go to stderr.
//! The trend flags are heuristics over the computed horizon, never
//! theorems, and a non-critical-looking environment is still exit code 0 —
//! the report is the product, the warning is the interpretation.

use gwve::env::{classify_with, CriticalityReport, DEFAULT_STARSTAR_C, DEFAULT_TREND_EPSILON};
use serde::Serialize;

use crate::cli::{ClassifyArgs, Format};
use crate::envfile::load_env;
use crate::output::{cell, csv_sink, map_csv, write_json};
use crate::{map_env, validation, CliError};

pub const CSV_HEADER: [&str; 6] = ["n", "mu", "rho", "mu_rho", "starstar_ok", "starstar_c_min"];

#[derive(Serialize)]
struct ClassifyJson<'a> {
    command: &'static str,
    env: &'a str,
    horizon: u64,
    mu: &'a [f64],
    rho: &'a [f64],
    mu_rho: &'a [f64],
    starstar_ok: &'a [bool],
    starstar_c_min: &'a [f64],
    starstar_c_sup: f64,
    c_checked: f64,
    rho_increasing_unbounded: bool,
    mu_rho_increasing_unbounded: bool,
    looks_critical: bool,
    f1_min: f64,
    f1_max: f64,
    f2_min: f64,
    epsilon_trend: f64,
    warnings: &'a [String],
}

pub fn run(args: &ClassifyArgs) -> Result<(), CliError> {
    let loaded = load_env(&args.env)?;
    let horizon = args.n_max.unwrap_or(loaded.horizon);
    if horizon < 3 {
        return Err(validation(format!(
            "classification needs a horizon of at least 3, got {horizon}"
        )));
    }
    let eps = match args.tol {
        None => DEFAULT_TREND_EPSILON,
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(validation(format!("--tol must be a positive real, got {t}"))),
    };

    let report = classify_with(&loaded.environment, horizon, DEFAULT_STARSTAR_C, eps)
        .map_err(map_env)?;
    let warnings = collect_warnings(&report);
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    match args.format {
        Format::Json => write_json(
            args.out.as_deref(),
            &ClassifyJson {
                command: "classify",
                env: &loaded.path,
                horizon,
                mu: &report.mu,
                rho: &report.rho,
                mu_rho: &report.mu_rho,
                starstar_ok: &report.starstar.ok,
                starstar_c_min: &report.starstar.c_min,
                starstar_c_sup: report.starstar.c_sup,
                c_checked: report.c_checked,
                rho_increasing_unbounded: report.rho_increasing_unbounded,
                mu_rho_increasing_unbounded: report.mu_rho_increasing_unbounded,
                looks_critical: report.looks_critical(),
                f1_min: report.f1_min,
                f1_max: report.f1_max,
                f2_min: report.f2_min,
                epsilon_trend: report.epsilon_trend,
                warnings: &warnings,
            },
        ),
        Format::Csv => {
            let out = args.out.as_deref();
            let mut w = csv_sink(out)?;
            w.write_record(CSV_HEADER).map_err(|e| map_csv(out, e))?;
            for i in 0..horizon as usize {
                w.write_record([
                    (i + 1).to_string(),
                    cell(report.mu[i]),
                    cell(report.rho[i]),
                    cell(report.mu_rho[i]),
                    report.starstar.ok[i].to_string(),
                    cell(report.starstar.c_min[i]),
                ])
                .map_err(|e| map_csv(out, e))?;
            }
            w.flush().map_err(|e| map_csv(out, e.into()))?;
            Ok(())
        }
    }
}

fn collect_warnings(report: &CriticalityReport) -> Vec<String> {
    let mut warnings = Vec::new();
    if !report.looks_critical() {
        warnings.push(format!(
            "not critical over horizon {}: trend flags rho={}, mu_rho={} \
             (finite-horizon evidence only)",
            report.horizon, report.rho_increasing_unbounded, report.mu_rho_increasing_unbounded
        ));
    }
    if !report.starstar.ok.iter().all(|&ok| ok) {
        warnings.push(format!(
            "third-moment condition fails at c = {} for some generation; \
             minimal feasible c over the horizon is {}",
            report.c_checked, report.starstar.c_sup
        ));
    }
    warnings
}
