//! `gwve reproduce-examples`: writes the four built-in worked examples as
//! CSVs into a directory, one file per example plus a `summary.csv` with
//! each diagnostic's observed spread.
//!
//! Columns per example file: `n,mu,rho,mu_rho,r_n,s_n,thm4_shape,
//! thm5_shape,cor_shape,lf_exact_bound,trunc_k,dw,dw_truncation_bound,
//! basis,diagnostic`.  Summary columns: `example,diag_label,rows,dw_rows,
//! fallback_rows,diag_min,diag_max,max_over_min`.

use std::path::Path;

use crate::cli::ReproduceArgs;
use crate::examples::{builtin_examples, example_rows, ExampleRow};
use crate::output::{cell, csv_sink, map_csv, opt_cell};
use crate::CliError;

pub const CSV_HEADER: [&str; 15] = [
    "n",
    "mu",
    "rho",
    "mu_rho",
    "r_n",
    "s_n",
    "thm4_shape",
    "thm5_shape",
    "cor_shape",
    "lf_exact_bound",
    "trunc_k",
    "dw",
    "dw_truncation_bound",
    "basis",
    "diagnostic",
];

pub const SUMMARY_HEADER: [&str; 8] = [
    "example",
    "diag_label",
    "rows",
    "dw_rows",
    "fallback_rows",
    "diag_min",
    "diag_max",
    "max_over_min",
];

fn write_example_csv(path: &Path, rows: &[ExampleRow]) -> Result<(), CliError> {
    let mut w = csv_sink(Some(path))?;
    w.write_record(CSV_HEADER).map_err(|e| map_csv(Some(path), e))?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            cell(r.mu),
            cell(r.rho),
            cell(r.mu_rho),
            opt_cell(r.r_n),
            cell(r.s_n),
            opt_cell(r.thm4_shape),
            cell(r.thm5_shape),
            cell(r.cor_shape),
            opt_cell(r.lf_exact_bound),
            r.trunc_k.map(|k| k.to_string()).unwrap_or_default(),
            opt_cell(r.dw),
            opt_cell(r.dw_truncation_bound),
            r.basis.to_string(),
            cell(r.diagnostic),
        ])
        .map_err(|e| map_csv(Some(path), e))?;
    }
    w.flush().map_err(|e| map_csv(Some(path), e.into()))
}

pub fn run(args: &ReproduceArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out).map_err(|e| crate::map_io(&args.out, e))?;

    let summary_path = args.out.join("summary.csv");
    let mut summary = csv_sink(Some(&summary_path))?;
    summary
        .write_record(SUMMARY_HEADER)
        .map_err(|e| map_csv(Some(&summary_path), e))?;

    for spec in builtin_examples() {
        let spec = spec.capped(args.n_max);
        if spec.grid.is_empty() {
            eprintln!("skipping {}: grid empty under --n-max", spec.slug);
            continue;
        }
        eprintln!(
            "computing {} ({}; {} generations up to n = {}) ...",
            spec.slug,
            spec.title,
            spec.grid.len(),
            spec.grid.last().unwrap()
        );
        let (rows, warnings) = example_rows(&spec)?;
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        let path = args.out.join(format!("{}.csv", spec.slug));
        write_example_csv(&path, &rows)?;

        let dw_rows = rows.iter().filter(|r| r.basis == "dw").count();
        let diag_min = rows.iter().map(|r| r.diagnostic).fold(f64::INFINITY, f64::min);
        let diag_max = rows.iter().map(|r| r.diagnostic).fold(0.0f64, f64::max);
        summary
            .write_record([
                spec.slug.to_string(),
                spec.diag_label.to_string(),
                rows.len().to_string(),
                dw_rows.to_string(),
                (rows.len() - dw_rows).to_string(),
                cell(diag_min),
                cell(diag_max),
                cell(diag_max / diag_min),
            ])
            .map_err(|e| map_csv(Some(&summary_path), e))?;
        eprintln!(
            "wrote {} ({} rows, {} exact-distance, diagnostic spread {:.3})",
            path.display(),
            rows.len(),
            dw_rows,
            diag_max / diag_min
        );
    }
    summary.flush().map_err(|e| map_csv(Some(&summary_path), e.into()))?;
    eprintln!("wrote {}", summary_path.display());
    Ok(())
}
