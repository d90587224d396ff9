//! `gwve wasserstein`: `W₁(Y_n/b_n, Exp(1))` over `n = 1..=n_max`, each row
//! paired with the first bound shape and the ratio distance/shape.
//!
//! Rows that cannot be resolved at the requested truncation point are
//! *flagged*, not fatal: `status` records why (`truncation`,
//! `survival_underflow`, `roundoff`) and the numeric cells stay empty, so a
//! sweep over a long horizon degrades gracefully instead of aborting at the
//! first generation out of reach.

use gwve::bounds::{moment_sequences, rn, theorem4_shape};
use gwve::exact::{self, ExactError};
use gwve::wasserstein::{dw_scaled_pmf_vs_exp, WassersteinError};
use serde::Serialize;

use crate::cli::{Format, WassersteinArgs};
use crate::envfile::load_env;
use crate::exactlaw::conditional_fixed_k;
use crate::output::{csv_sink, map_csv, opt_cell, write_json};
use crate::{map_exact, map_wasserstein, validation, CliError};

pub const CSV_HEADER: [&str; 6] =
    ["n", "dw", "truncation_bound", "thm4_shape", "ratio", "status"];

#[derive(Serialize)]
struct DistanceRowJson {
    n: u64,
    dw: Option<f64>,
    truncation_bound: Option<f64>,
    thm4_shape: Option<f64>,
    ratio: Option<f64>,
    status: &'static str,
}

#[derive(Serialize)]
struct WassersteinJson<'a> {
    command: &'static str,
    env: &'a str,
    n_max: u64,
    trunc: usize,
    rows: Vec<DistanceRowJson>,
}

/// Sorts a per-row failure into a `status` label, or passes it through as
/// fatal when it does not describe an `n`-local resolution problem.
fn row_status(err: ExactError) -> Result<&'static str, ExactError> {
    match err {
        ExactError::Truncation { .. } | ExactError::TailTooHeavy { .. } => Ok("truncation"),
        ExactError::VanishingSurvival { .. } => Ok("survival_underflow"),
        ExactError::NegativeProbability { .. } | ExactError::MassInconsistent { .. } => {
            Ok("roundoff")
        }
        other => Err(other),
    }
}

pub fn run(args: &WassersteinArgs) -> Result<(), CliError> {
    let loaded = load_env(&args.env)?;
    let env = &loaded.environment;
    let k = args.trunc;
    if k == 0 || !k.is_power_of_two() {
        return Err(validation(format!("--trunc {k} must be a power of two")));
    }
    if args.n_max < 1 {
        return Err(validation("--n-max must be at least 1".to_string()));
    }
    let tol = match args.tol {
        None => exact::DEFAULT_TAIL_TOL,
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(validation(format!("--tol must be a positive real, got {t}"))),
    };

    let track = moment_sequences(env, args.n_max).map_err(|e| map_exact(e.into(), k))?;

    let mut rows = Vec::with_capacity(args.n_max as usize);
    for n in 1..=args.n_max {
        let thm4 = if n >= 2 && track.rho(n) > 0.0 {
            rn(&track, n).ok().map(|r| theorem4_shape(&track, r, n))
        } else {
            None
        };

        let outcome: Result<(f64, f64), &'static str> =
            match conditional_fixed_k(env, n, k, tol) {
                Ok(cond) => match dw_scaled_pmf_vs_exp(&cond.pmf, cond.b) {
                    Ok(d) => Ok((d.value, d.truncation_bound)),
                    Err(WassersteinError::TailTooHeavy { .. }) => Err("truncation"),
                    Err(e) => return Err(map_wasserstein(e, k)),
                },
                Err(e) => Err(row_status(e).map_err(|fatal| map_exact(fatal, k))?),
            };

        let row = match outcome {
            Ok((dw, trunc_bound)) => DistanceRowJson {
                n,
                dw: Some(dw),
                truncation_bound: Some(trunc_bound),
                thm4_shape: thm4,
                ratio: thm4.map(|t| dw / t),
                status: "ok",
            },
            Err(status) => {
                eprintln!("warning: n={n}: no distance at truncation {k} ({status})");
                DistanceRowJson {
                    n,
                    dw: None,
                    truncation_bound: None,
                    thm4_shape: thm4,
                    ratio: None,
                    status,
                }
            }
        };
        rows.push(row);
    }

    match args.format {
        Format::Json => write_json(
            args.out.as_deref(),
            &WassersteinJson {
                command: "wasserstein",
                env: &loaded.path,
                n_max: args.n_max,
                trunc: k,
                rows,
            },
        ),
        Format::Csv => {
            let out = args.out.as_deref();
            let mut w = csv_sink(out)?;
            w.write_record(CSV_HEADER).map_err(|e| map_csv(out, e))?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    opt_cell(r.dw),
                    opt_cell(r.truncation_bound),
                    opt_cell(r.thm4_shape),
                    opt_cell(r.ratio),
                    r.status.to_string(),
                ])
                .map_err(|e| map_csv(out, e))?;
            }
            w.flush().map_err(|e| map_csv(out, e.into()))
        }
    }
}
