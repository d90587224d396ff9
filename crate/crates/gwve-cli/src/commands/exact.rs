//! `gwve exact`: the law of `Z_n`, the conditional law `Y_n`, the
//! conditioned mean `b_n` and the survival probability at one generation.
//!
//! CSV layout: one row per population size `k` with columns `k,p_zn,p_yn`;
//! the scalars travel on stdout as `key=value` lines (or on stderr when the
//! CSV itself goes to stdout, keeping the data stream clean).  JSON carries
//! everything in one object.

use gwve::exact::{self, Provenance};
use serde::Serialize;

use crate::cli::{ExactArgs, Format};
use crate::envfile::load_env;
use crate::exactlaw::conditional_fixed_k;
use crate::output::{cell, csv_sink, map_csv, write_json};
use crate::{map_env, map_exact, validation, CliError};

pub const CSV_HEADER: [&str; 3] = ["k", "p_zn", "p_yn"];

#[derive(Serialize)]
struct ExactJson<'a> {
    command: &'static str,
    env: &'a str,
    n: u64,
    trunc: usize,
    b_n: f64,
    survival: f64,
    tail_zn: f64,
    tail_yn: f64,
    provenance: &'static str,
    p_zn: &'a [f64],
    p_yn: &'a [f64],
}

pub fn run(args: &ExactArgs) -> Result<(), CliError> {
    let loaded = load_env(&args.env)?;
    let k = args.trunc;
    if k == 0 || !k.is_power_of_two() {
        return Err(validation(format!("--trunc {k} must be a power of two")));
    }
    let tol = match args.tol {
        None => exact::DEFAULT_TAIL_TOL,
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(validation(format!("--tol must be a positive real, got {t}"))),
    };
    let env = &loaded.environment;
    let n = args.n;

    let lf = env.all_linear_fractional_upto(n);
    let zn = if lf {
        let law = exact::law_of_zn_closed_form(env, n, k).map_err(|e| map_exact(e, k))?;
        if law.tail_mass() > tol {
            return Err(map_exact(
                exact::ExactError::Truncation { tail_mass: law.tail_mass(), tol },
                k,
            ));
        }
        law
    } else {
        exact::law_of_zn_with_tol(env, n, k, tol).map_err(|e| map_exact(e, k))?
    };
    let cond = conditional_fixed_k(env, n, k, tol).map_err(|e| map_exact(e, k))?;
    let survival = if n == 0 {
        1.0
    } else {
        exact::survival_prob(env, 0, n).map_err(map_env)?
    };

    let provenance = match zn.provenance() {
        Provenance::Dft { .. } => "dft",
        Provenance::Convolution => "convolution",
        Provenance::ClosedForm => "closed-form",
    };

    match args.format {
        Format::Json => write_json(
            args.out.as_deref(),
            &ExactJson {
                command: "exact",
                env: &loaded.path,
                n,
                trunc: k,
                b_n: cond.b,
                survival,
                tail_zn: zn.tail_mass(),
                tail_yn: cond.pmf.tail_mass(),
                provenance,
                p_zn: zn.probs(),
                p_yn: cond.pmf.probs(),
            },
        ),
        Format::Csv => {
            let out = args.out.as_deref();
            let mut w = csv_sink(out)?;
            w.write_record(CSV_HEADER).map_err(|e| map_csv(out, e))?;
            for i in 0..k {
                w.write_record([
                    i.to_string(),
                    cell(zn.prob(i)),
                    cell(cond.pmf.prob(i)),
                ])
                .map_err(|e| map_csv(out, e))?;
            }
            w.flush().map_err(|e| map_csv(out, e.into()))?;

            // Scalar block: stdout normally, stderr when the CSV owns stdout.
            let scalars = format!(
                "n={n}\ntrunc={k}\nb_n={}\nsurvival={}\ntail_zn={}\ntail_yn={}\nprovenance={provenance}",
                cell(cond.b),
                cell(survival),
                cell(zn.tail_mass()),
                cell(cond.pmf.tail_mass()),
            );
            if args.out.is_some() {
                println!("{scalars}");
            } else {
                eprintln!("{scalars}");
            }
            Ok(())
        }
    }
}
