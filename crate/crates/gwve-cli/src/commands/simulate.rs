//! `gwve simulate`: Monte Carlo estimators on the one-spine size-biased
//! tree, with deterministic seeding and schema-stable artifacts.
//!
//! Every estimator emits one JSON report (stdout, or `<out>/<estimator>.json`
//! when `--out DIR` is given).  With `--out`, CSV companions are written
//! next to it:
//!
//! * `spine-law` / `meanyye` — `zdot_hist.csv` (`k,count`): histogram of the
//!   size-biased population `Ż_n`.
//! * `equilibrium` — `r_hist.csv` (`k,count`): histogram of `R_n`.
//! * `steps` — `steps_mc.csv` (`step,j,lhs,stderr,rhs,violated`) and
//!   `steps_sandwich.csv` (`j,survival,lower,upper,ok`).
//!
//! Histogram replicas draw from a disjoint stream block (base stream id
//! `1 << 32`), so adding or dropping `--out` never changes the estimate.
//! A run that exhausts its rejection budget still writes all artifacts
//! (flagged via `rejection_failures`) and then exits with the budget code.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gwve::bounds::moment_sequences;
use gwve::spine::{
    check_step_inequalities, estimate_equilibrium_identity, estimate_meanyye_rhs,
    for_each_sample, sample_spine_tree, RngStream, SpineError, StepMcRow, StepReport,
};
use serde::Serialize;

use crate::cli::{Estimator, SimulateArgs};
use crate::envfile::load_env;
use crate::output::{cell, csv_sink, map_csv, write_json};
use crate::{map_exact, map_spine, validation, CliError};

/// Stream id offset for histogram replicas; the estimator itself uses
/// chunked streams `0, 1, 2, …`, far below this block.
pub const REPLICA_STREAM_BASE: u64 = 1 << 32;

#[derive(Serialize)]
struct StepMcJson {
    step: u8,
    j: u64,
    lhs: f64,
    stderr: f64,
    rhs: f64,
    violated: bool,
}

#[derive(Serialize)]
struct SandwichJson {
    j: u64,
    survival: f64,
    lower: f64,
    upper: f64,
    ok: bool,
}

/// One report shape for every estimator; fields unused by an estimator are
/// empty, never absent, so downstream parsers see a single schema.
#[derive(Serialize)]
struct SimulateJson<'a> {
    command: &'static str,
    estimator: &'static str,
    env: &'a str,
    n: u64,
    samples: usize,
    seed: u64,
    estimate: f64,
    stderr: Option<f64>,
    rejection_failures: u64,
    details: BTreeMap<&'static str, f64>,
    violations: Vec<String>,
    step_mc: Vec<StepMcJson>,
    step_sandwich: Vec<SandwichJson>,
}

fn hist_csv(
    dir: &Path,
    name: &str,
    value_header: &str,
    hist: &BTreeMap<u64, u64>,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut w = csv_sink(Some(&path))?;
    w.write_record([value_header, "count"]).map_err(|e| map_csv(Some(&path), e))?;
    for (k, c) in hist {
        w.write_record([k.to_string(), c.to_string()])
            .map_err(|e| map_csv(Some(&path), e))?;
    }
    w.flush().map_err(|e| map_csv(Some(&path), e.into()))?;
    Ok(path)
}

/// Histogram of `Ż_n` (or `R_n` via `pick`) from the replica stream block.
fn replica_hist(
    env: &gwve::env::Environment,
    n: u64,
    m: usize,
    seed: u64,
    pick: fn(&gwve::spine::SpineSample) -> u64,
) -> Result<BTreeMap<u64, u64>, SpineError> {
    let mut hist = BTreeMap::new();
    for_each_sample(RngStream::new(seed, REPLICA_STREAM_BASE), m, |rng| {
        let s = sample_spine_tree(env, n, rng)?;
        *hist.entry(pick(&s)).or_insert(0u64) += 1;
        Ok(())
    })?;
    Ok(hist)
}

fn mc_rows(step: u8, rows: &[StepMcRow], out: &mut Vec<StepMcJson>) {
    for r in rows {
        out.push(StepMcJson {
            step,
            j: r.j,
            lhs: r.lhs,
            stderr: r.stderr,
            rhs: r.rhs,
            violated: r.violated,
        });
    }
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let loaded = load_env(&args.env)?;
    let env = &loaded.environment;
    let (n, m, seed) = (args.n, args.samples, args.seed);
    if n < 1 {
        return Err(validation("--n must be at least 1".to_string()));
    }
    match args.estimator {
        Estimator::SpineLaw => {
            if m < 2 {
                return Err(validation(format!(
                    "--samples {m} is too small: the mean needs at least 2"
                )));
            }
        }
        _ => {
            if m < 10_000 {
                return Err(validation(format!(
                    "--samples {m} is too small: this estimator needs at least 10000"
                )));
            }
        }
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| crate::map_io(dir, e))?;
    }

    let base = RngStream::new(seed, 0);
    let mut details: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut violations: Vec<String> = Vec::new();
    let mut step_mc: Vec<StepMcJson> = Vec::new();
    let mut step_sandwich: Vec<SandwichJson> = Vec::new();
    let estimate;
    let mut stderr = None;
    let mut rejection_failures = 0u64;

    match args.estimator {
        Estimator::SpineLaw => {
            let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
            let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
            for_each_sample(base, m, |rng| {
                let s = sample_spine_tree(env, n, rng)?;
                *hist.entry(s.zdot).or_insert(0) += 1;
                let z = s.zdot as f64;
                sum += z;
                sumsq += z * z;
                Ok(())
            })
            .map_err(map_spine)?;
            let mean = sum / m as f64;
            let var = ((sumsq - m as f64 * mean * mean) / (m as f64 - 1.0)).max(0.0);
            let se = (var / m as f64).sqrt();
            estimate = mean;
            stderr = Some(se);

            let track = moment_sequences(env, n).map_err(|e| map_exact(e.into(), 0))?;
            let identity = 1.0 + track.mu_rho(n);
            details.insert("identity_mean", identity);
            details.insert("mu_rho", track.mu_rho(n));
            details.insert("abs_gap", (mean - identity).abs());
            if se > 0.0 {
                details.insert("z_score", (mean - identity) / se);
            }

            if let Some(dir) = &args.out {
                hist_csv(dir, "zdot_hist.csv", "k", &hist)?;
            }
        }
        Estimator::Equilibrium => {
            let report =
                estimate_equilibrium_identity(env, n, m, base).map_err(map_spine)?;
            estimate = report.ks_gap;
            details.insert("knots_used", report.knots_used as f64);
            if let Some(dir) = &args.out {
                let hist = replica_hist(env, n, m, seed, |s| s.r).map_err(map_spine)?;
                hist_csv(dir, "r_hist.csv", "k", &hist)?;
            }
        }
        Estimator::Meanyye => {
            let report = estimate_meanyye_rhs(env, n, m, base).map_err(map_spine)?;
            estimate = report.estimate;
            stderr = Some(report.stderr);
            rejection_failures = report.rejection_failures;
            let b = gwve::exact::b_n(env, n).map_err(|e| map_exact(e, 0))?;
            details.insert("b_n", b);
            if let Some(dir) = &args.out {
                let hist = replica_hist(env, n, m, seed, |s| s.zdot).map_err(map_spine)?;
                hist_csv(dir, "zdot_hist.csv", "k", &hist)?;
            }
        }
        Estimator::Steps => {
            let report: StepReport =
                check_step_inequalities(env, n, m, base).map_err(map_spine)?;
            rejection_failures = report.rejection_failures;
            violations = report.violations.clone();
            mc_rows(1, &report.step1, &mut step_mc);
            mc_rows(2, &report.step2, &mut step_mc);
            mc_rows(3, &report.step3, &mut step_mc);
            for r in &report.step4 {
                step_sandwich.push(SandwichJson {
                    j: r.j,
                    survival: r.survival,
                    lower: r.lower,
                    upper: r.upper,
                    ok: r.ok,
                });
            }
            let mc_violated = step_mc.iter().filter(|r| r.violated).count();
            let sandwich_bad = step_sandwich.iter().filter(|r| !r.ok).count();
            estimate = (mc_violated + sandwich_bad) as f64;
            details.insert("violation_rows", mc_violated as f64);
            details.insert("sandwich_failures", sandwich_bad as f64);

            if let Some(dir) = &args.out {
                let path = dir.join("steps_mc.csv");
                let mut w = csv_sink(Some(&path))?;
                w.write_record(["step", "j", "lhs", "stderr", "rhs", "violated"])
                    .map_err(|e| map_csv(Some(&path), e))?;
                for r in &step_mc {
                    w.write_record([
                        r.step.to_string(),
                        r.j.to_string(),
                        cell(r.lhs),
                        cell(r.stderr),
                        cell(r.rhs),
                        r.violated.to_string(),
                    ])
                    .map_err(|e| map_csv(Some(&path), e))?;
                }
                w.flush().map_err(|e| map_csv(Some(&path), e.into()))?;

                let path = dir.join("steps_sandwich.csv");
                let mut w = csv_sink(Some(&path))?;
                w.write_record(["j", "survival", "lower", "upper", "ok"])
                    .map_err(|e| map_csv(Some(&path), e))?;
                for r in &step_sandwich {
                    w.write_record([
                        r.j.to_string(),
                        cell(r.survival),
                        cell(r.lower),
                        cell(r.upper),
                        r.ok.to_string(),
                    ])
                    .map_err(|e| map_csv(Some(&path), e))?;
                }
                w.flush().map_err(|e| map_csv(Some(&path), e.into()))?;
            }
        }
    }

    for v in &violations {
        eprintln!("warning: {v}");
    }

    let report = SimulateJson {
        command: "simulate",
        estimator: args.estimator.slug(),
        env: &loaded.path,
        n,
        samples: m,
        seed,
        estimate,
        stderr,
        rejection_failures,
        details,
        violations,
        step_mc,
        step_sandwich,
    };
    let json_path = args.out.as_ref().map(|d| d.join(format!("{}.json", args.estimator.slug())));
    write_json(json_path.as_deref(), &report)?;

    if rejection_failures > 0 {
        return Err(CliError::Budget(format!(
            "{rejection_failures} conditioned redraws exhausted their rejection budget \
             (estimate is partial; artifacts were still written)"
        )));
    }
    Ok(())
}
