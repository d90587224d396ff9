//! The JSON environment schema.
//!
//! An environment file is a single JSON object:
//!
//! ```json
//! {
//!   "family": "poisson" | "linear_fractional" | "symmetric" | "constant_pmf" | "list",
//!   "params": { ... },
//!   "horizon": 100
//! }
//! ```
//!
//! `params` depends on the family.  Named families take per-generation
//! parameters that are either plain numbers (constant in `n`) or formula
//! strings in the expression language of [`gwve::seqexpr`] (variable `n`,
//! arithmetic, `sqrt`, `exp`, `log`, `pow`):
//!
//! - `poisson`: `{"lambda": <number|formula>}`
//! - `linear_fractional`: `{"a": <number|formula>, "p": <number|formula>}`
//! - `symmetric`: `{"delta": <number|formula>}`
//! - `constant_pmf`: `{"probs": [p0, p1, ...]}` — one explicit offspring
//!   law used at every generation
//! - `list`: `{"laws": [<law>, ...], "extend": "cycle"|"hold_last"|"error"}`
//!   where each `<law>` is `{"family": ..., "params": {...}}` with numeric
//!   parameters only, and `extend` (default `"error"`) says what happens
//!   past the last law.
//!
//! Unknown fields are rejected everywhere.  `horizon` is the generation
//! span the file intends to be computed over; commands default their `N`
//! to it but may be pointed past it for the named families.

use std::path::Path;

use gwve::env::{Environment, Extend, OffspringLaw};
use gwve::seqexpr::SeqExpr;
use serde::Deserialize;

use crate::{map_env, map_io, validation, CliError};

/// A parsed environment file.
pub struct LoadedEnv {
    pub environment: Environment,
    /// The file's declared horizon.
    pub horizon: u64,
    /// The `family` field, for reporting.
    pub family: String,
    /// The path the file was loaded from, for messages.
    pub path: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvFileRaw {
    family: String,
    params: serde_json::Value,
    horizon: u64,
}

/// A numeric constant or a formula string in the generation index `n`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ExprParam {
    Number(f64),
    Formula(String),
}

impl ExprParam {
    fn into_expr(self, path: &str, field: &str) -> Result<SeqExpr, CliError> {
        match self {
            // `SeqExpr::Num` literals are nonnegative by contract; a
            // negative constant becomes explicit negation (the library
            // rejects out-of-domain values per generation either way).
            ExprParam::Number(x) if x >= 0.0 => Ok(SeqExpr::Num(x)),
            ExprParam::Number(x) => Ok(SeqExpr::Neg(Box::new(SeqExpr::Num(-x)))),
            ExprParam::Formula(s) => SeqExpr::parse(&s)
                .map_err(|e| validation(format!("{path}: params.{field}: {e}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoissonParams {
    lambda: ExprParam,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearFractionalParams {
    a: ExprParam,
    p: ExprParam,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetricParams {
    delta: ExprParam,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantPmfParams {
    probs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ExtendSpec {
    Cycle,
    HoldLast,
    Error,
}

impl From<ExtendSpec> for Extend {
    fn from(e: ExtendSpec) -> Extend {
        match e {
            ExtendSpec::Cycle => Extend::Cycle,
            ExtendSpec::HoldLast => Extend::HoldLast,
            ExtendSpec::Error => Extend::Error,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ListParams {
    laws: Vec<LawSpec>,
    #[serde(default = "default_extend")]
    extend: ExtendSpec,
}

fn default_extend() -> ExtendSpec {
    ExtendSpec::Error
}

/// One fixed law inside a `list` environment (numeric parameters only).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LawSpec {
    family: String,
    params: serde_json::Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumPoisson {
    lambda: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumLf {
    a: f64,
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumSymmetric {
    delta: f64,
}

/// Reads and validates an environment file.
pub fn load_env(path: &Path) -> Result<LoadedEnv, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| map_io(path, e))?;
    let shown = path.display().to_string();
    let raw: EnvFileRaw = serde_json::from_str(&text)
        .map_err(|e| validation(format!("{shown}: {e}")))?;
    if raw.horizon == 0 {
        return Err(validation(format!("{shown}: horizon must be at least 1")));
    }

    let environment = build_environment(&shown, &raw)?;
    // Surface per-generation parameter problems (bad λ at some n, …) at
    // load time instead of deep inside a batch run.
    environment.validate().map_err(map_env)?;
    Ok(LoadedEnv {
        environment,
        horizon: raw.horizon,
        family: raw.family,
        path: shown,
    })
}

fn build_environment(path: &str, raw: &EnvFileRaw) -> Result<Environment, CliError> {
    let params = raw.params.clone();
    let horizon = raw.horizon;
    match raw.family.as_str() {
        "poisson" => {
            let p: PoissonParams = from_params(path, params)?;
            Ok(Environment::poisson_family(
                p.lambda.into_expr(path, "lambda")?,
                horizon,
            ))
        }
        "linear_fractional" => {
            let p: LinearFractionalParams = from_params(path, params)?;
            Ok(Environment::linear_fractional_family(
                p.a.into_expr(path, "a")?,
                p.p.into_expr(path, "p")?,
                horizon,
            ))
        }
        "symmetric" => {
            let p: SymmetricParams = from_params(path, params)?;
            Ok(Environment::symmetric_family(
                p.delta.into_expr(path, "delta")?,
                horizon,
            ))
        }
        "constant_pmf" => {
            let p: ConstantPmfParams = from_params(path, params)?;
            let law = OffspringLaw::explicit(p.probs)
                .map_err(|e| validation(format!("{path}: params.probs: {e}")))?;
            Ok(Environment::constant(law, horizon))
        }
        "list" => {
            let p: ListParams = from_params(path, params)?;
            if p.laws.is_empty() {
                return Err(validation(format!(
                    "{path}: params.laws: a list environment needs at least one law"
                )));
            }
            let mut laws = Vec::with_capacity(p.laws.len());
            for (i, spec) in p.laws.into_iter().enumerate() {
                laws.push(build_law(path, i, spec)?);
            }
            Environment::from_list(laws, p.extend.into(), horizon)
                .map_err(|e| validation(format!("{path}: params.laws: {e}")))
        }
        other => Err(validation(format!(
            "{path}: family: unknown family `{other}`, expected one of \
             `poisson`, `linear_fractional`, `symmetric`, `constant_pmf`, `list`"
        ))),
    }
}

fn build_law(path: &str, index: usize, spec: LawSpec) -> Result<OffspringLaw, CliError> {
    let at = format!("{path}: params.laws[{index}]");
    let res = match spec.family.as_str() {
        "poisson" => {
            let p: NumPoisson = serde_json::from_value(spec.params)
                .map_err(|e| validation(format!("{at}.params: {e}")))?;
            OffspringLaw::poisson(p.lambda)
        }
        "linear_fractional" => {
            let p: NumLf = serde_json::from_value(spec.params)
                .map_err(|e| validation(format!("{at}.params: {e}")))?;
            OffspringLaw::linear_fractional(p.a, p.p)
        }
        "symmetric" => {
            let p: NumSymmetric = serde_json::from_value(spec.params)
                .map_err(|e| validation(format!("{at}.params: {e}")))?;
            OffspringLaw::symmetric(p.delta)
        }
        "constant_pmf" => {
            let p: ConstantPmfParams = serde_json::from_value(spec.params)
                .map_err(|e| validation(format!("{at}.params: {e}")))?;
            OffspringLaw::explicit(p.probs)
        }
        other => {
            return Err(validation(format!(
                "{at}.family: unknown family `{other}`, expected one of \
                 `poisson`, `linear_fractional`, `symmetric`, `constant_pmf`"
            )))
        }
    };
    res.map_err(|e| validation(format!("{at}: {e}")))
}

fn from_params<T: serde::de::DeserializeOwned>(
    path: &str,
    params: serde_json::Value,
) -> Result<T, CliError> {
    serde_json::from_value(params).map_err(|e| validation(format!("{path}: params: {e}")))
}
