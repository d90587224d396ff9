//! `gwve bounds`: the sequences `r_n`, `s_n` and the three convergence-rate
//! bound shapes (plus the exact linear-fractional bound when it applies)
//! over `n = 1..=n_max`.
//!
//! CSV columns are fixed; quantities undefined at a given `n` (such as
//! `r_n` at `n = 1`) or for a given family (the exact bound outside
//! linear-fractional environments) appear as empty cells.

use gwve::bounds::{rate_bound_report, RateBoundReport, DEFAULT_F2_FLOOR};
use serde::Serialize;

use crate::cli::{BoundsArgs, Format};
use crate::envfile::load_env;
use crate::output::{cell, csv_sink, map_csv, opt_cell, write_json};
use crate::{map_bounds, validation, CliError};

pub const CSV_HEADER: [&str; 7] =
    ["n", "r_n", "s_n", "thm4_shape", "thm5_shape", "cor_shape", "lf_exact_bound"];

/// Validity band for the logarithmic corollary shape: `f'(1)` and `f''(1)`
/// must stay inside `[BAND_LO, BAND_HI]` for the estimate's hypotheses.
pub const BAND_LO: f64 = 0.1;
pub const BAND_HI: f64 = 10.0;

#[derive(Serialize)]
struct BoundsRowJson {
    n: u64,
    r_n: Option<f64>,
    s_n: f64,
    thm4_shape: Option<f64>,
    thm5_shape: f64,
    cor_shape: f64,
    lf_exact_bound: Option<f64>,
}

#[derive(Serialize)]
struct BoundsJson<'a> {
    command: &'static str,
    env: &'a str,
    n_max: u64,
    thm5_f2_warning: bool,
    cor_band_warning: bool,
    warnings: &'a [String],
    rows: Vec<BoundsRowJson>,
}

pub fn run(args: &BoundsArgs) -> Result<(), CliError> {
    let loaded = load_env(&args.env)?;
    if args.n_max < 2 {
        return Err(validation(format!(
            "--n-max {} is too small: r_n is defined for n >= 2",
            args.n_max
        )));
    }
    let report: RateBoundReport = rate_bound_report(
        &loaded.environment,
        args.n_max,
        DEFAULT_F2_FLOOR,
        BAND_LO,
        BAND_HI,
    )
    .map_err(map_bounds)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    match args.format {
        Format::Json => write_json(
            args.out.as_deref(),
            &BoundsJson {
                command: "bounds",
                env: &loaded.path,
                n_max: args.n_max,
                thm5_f2_warning: report.thm5_f2_warning,
                cor_band_warning: report.cor_band_warning,
                warnings: &report.warnings,
                rows: report
                    .rows
                    .iter()
                    .map(|r| BoundsRowJson {
                        n: r.n,
                        r_n: r.r_n,
                        s_n: r.s_n,
                        thm4_shape: r.thm4_shape,
                        thm5_shape: r.thm5_shape,
                        cor_shape: r.cor_shape,
                        lf_exact_bound: r.lf_exact_bound,
                    })
                    .collect(),
            },
        ),
        Format::Csv => {
            let out = args.out.as_deref();
            let mut w = csv_sink(out)?;
            w.write_record(CSV_HEADER).map_err(|e| map_csv(out, e))?;
            for r in &report.rows {
                w.write_record([
                    r.n.to_string(),
                    opt_cell(r.r_n),
                    cell(r.s_n),
                    opt_cell(r.thm4_shape),
                    cell(r.thm5_shape),
                    cell(r.cor_shape),
                    opt_cell(r.lf_exact_bound),
                ])
                .map_err(|e| map_csv(out, e))?;
            }
            w.flush().map_err(|e| map_csv(out, e.into()))
        }
    }
}
