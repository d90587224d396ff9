//! Four built-in worked examples: environment, generation grid and a
//! scaled-decay diagnostic per example.  The `reproduce-examples` command
//! writes these as CSVs; the integration suite checks the diagnostics stay
//! bounded across each grid.
//!
//! Each row carries the moment ledger, the rate quantities, every bound
//! shape, and — where the exact path is numerically feasible — the exact
//! Wasserstein distance of `Y_n/b_n` to `Exp(1)`.  The `basis` column
//! records which quantity the diagnostic product used: `dw` when the exact
//! distance was computed, `thm4_shape` when the row fell back to the first
//! bound shape (tiny survival probabilities put the conditional law beyond
//! certified floating-point reach; the fall-back keeps the decay-order
//! check meaningful and is labeled rather than silent).

use gwve::bounds::{
    corollary_shape, moment_sequences, rn, sn_all, theorem4_shape, theorem5_shape,
    MomentTrack, DEFAULT_F2_FLOOR,
};
use gwve::env::{
    lf_constant_env, poisson_increasing_env, poisson_sqrt_decay_env, symmetric_power_env,
    Environment,
};
use gwve::exact::{self, ExactError};
use gwve::wasserstein::{dw_scaled_pmf_vs_exp, WassersteinError};

use crate::commands::bounds::{BAND_HI, BAND_LO};
use crate::exactlaw::{conditional_adaptive, suggest_k, K_CAP};
use crate::{map_bounds, map_env, map_exact, CliError};

/// Below this survival probability the exact conditional law is not
/// attempted: conditioning divides the transform's round-off by the
/// survival probability, so certified mass bookkeeping is hopeless here.
pub const SURVIVAL_FLOOR: f64 = 1e-9;

/// One built-in example.
pub struct ExampleSpec {
    /// File stem and stable identifier.
    pub slug: &'static str,
    /// Human summary (printed as progress, kept out of the CSV).
    pub title: &'static str,
    /// Generations at which rows are computed.
    pub grid: Vec<u64>,
    /// Builds the environment for a given horizon.
    pub build: fn(u64) -> Environment,
    /// Closed-form conditional law available (linear-fractional family).
    pub lf: bool,
    /// Diagnostic column label, e.g. `dw*sqrt(n)`.
    pub diag_label: &'static str,
    /// Multiplier: diagnostic = basis value × `diag(n, μ_nρ_{0,n})`.
    pub diag: fn(u64, f64) -> f64,
}

impl ExampleSpec {
    /// Drops grid entries above `cap` (quick runs for tests).
    pub fn capped(mut self, cap: Option<u64>) -> Self {
        if let Some(c) = cap {
            self.grid.retain(|&n| n <= c);
        }
        self
    }
}

fn pow2_grid(lo_exp: u32, hi_exp: u32) -> Vec<u64> {
    (lo_exp..=hi_exp).map(|e| 1u64 << e).collect()
}

fn build_symmetric_half(h: u64) -> Environment {
    symmetric_power_env(0.5, h)
}

fn build_lf_half(h: u64) -> Environment {
    lf_constant_env(0.5, 0.5, h).expect("a = p = 1/2 is a valid critical law")
}

/// The four built-in examples, grids uncapped.
pub fn builtin_examples() -> Vec<ExampleSpec> {
    vec![
        ExampleSpec {
            slug: "symmetric_polydecay",
            title: "symmetric perturbation delta_n = n^{-1/2}",
            grid: vec![25, 50, 100, 200, 400],
            build: build_symmetric_half,
            lf: false,
            diag_label: "basis*sqrt(n)",
            diag: |n, _| (n as f64).sqrt(),
        },
        ExampleSpec {
            slug: "poisson_increasing",
            title: "Poisson lambda_n = n/(n-1), cumulative mean mu_n = n",
            grid: pow2_grid(4, 12),
            build: poisson_increasing_env,
            lf: false,
            diag_label: "basis*log(n)",
            diag: |n, _| (n as f64).ln(),
        },
        ExampleSpec {
            slug: "poisson_sqrt_decay",
            title: "Poisson with mu_n = exp(-sqrt(n))",
            grid: pow2_grid(4, 10),
            build: poisson_sqrt_decay_env,
            lf: false,
            diag_label: "basis*sqrt(n)/log(sqrt(n))",
            diag: |n, _| {
                let s = (n as f64).sqrt();
                s / s.ln()
            },
        },
        ExampleSpec {
            slug: "linear_fractional_constant",
            title: "constant linear-fractional a = p = 1/2 (exact bound 4/(2+2n))",
            grid: (1..=200).collect(),
            build: build_lf_half,
            lf: true,
            diag_label: "dw*(2+mu_rho)/4",
            diag: |_, mu_rho| (2.0 + mu_rho) / 4.0,
        },
    ]
}

/// One CSV row of a reproduced example.
pub struct ExampleRow {
    pub n: u64,
    pub mu: f64,
    pub rho: f64,
    pub mu_rho: f64,
    pub r_n: Option<f64>,
    pub s_n: f64,
    pub thm4_shape: Option<f64>,
    pub thm5_shape: f64,
    pub cor_shape: f64,
    pub lf_exact_bound: Option<f64>,
    pub trunc_k: Option<usize>,
    pub dw: Option<f64>,
    pub dw_truncation_bound: Option<f64>,
    /// `"dw"` or `"thm4_shape"` — the diagnostic's basis.
    pub basis: &'static str,
    pub diagnostic: f64,
}

/// Exact-distance attempt for one row.
enum DwOutcome {
    Computed { k: usize, dw: f64, truncation_bound: f64 },
    Fallback(String),
}

fn try_dw(
    spec: &ExampleSpec,
    env: &Environment,
    track: &MomentTrack,
    n: u64,
) -> Result<DwOutcome, CliError> {
    if spec.lf {
        let b = 1.0 + track.mu_rho(n) / 2.0;
        let k = suggest_k(b);
        let (pmf, b) =
            exact::conditional_law_closed_form(env, n, k).map_err(|e| map_exact(e, k))?;
        let d = dw_scaled_pmf_vs_exp(&pmf, b).map_err(|e| crate::map_wasserstein(e, k))?;
        return Ok(DwOutcome::Computed {
            k,
            dw: d.value,
            truncation_bound: d.truncation_bound,
        });
    }
    let survival = exact::survival_prob(env, 0, n).map_err(map_env)?;
    if survival < SURVIVAL_FLOOR {
        return Ok(DwOutcome::Fallback(format!(
            "survival probability {survival:e} is below the exact-path floor {SURVIVAL_FLOOR:e}"
        )));
    }
    let k0 = suggest_k(track.mu(n) / survival);
    match conditional_adaptive(env, n, k0, K_CAP) {
        Ok(cond) => match dw_scaled_pmf_vs_exp(&cond.pmf, cond.b) {
            Ok(d) => Ok(DwOutcome::Computed {
                k: cond.k_used,
                dw: d.value,
                truncation_bound: d.truncation_bound,
            }),
            Err(WassersteinError::TailTooHeavy { tail_mass }) => Ok(DwOutcome::Fallback(
                format!("conditional tail {tail_mass:e} stayed too heavy up to K = {K_CAP}"),
            )),
            Err(e) => Err(crate::map_wasserstein(e, cond.k_used)),
        },
        Err(ExactError::Env(e)) => Err(map_env(e)),
        Err(e) => Ok(DwOutcome::Fallback(e.to_string())),
    }
}

/// Computes all rows of one example; warnings cover hypothesis-band flags
/// and any exact-distance fall-backs.
pub fn example_rows(spec: &ExampleSpec) -> Result<(Vec<ExampleRow>, Vec<String>), CliError> {
    let Some(&n_max) = spec.grid.last() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let env = (spec.build)(n_max);
    let track = moment_sequences(&env, n_max).map_err(map_env)?;
    let s_all = sn_all(&track, n_max).map_err(map_bounds)?;

    let mut rows = Vec::with_capacity(spec.grid.len());
    let mut warnings = Vec::new();
    let mut band_flagged = false;

    for &n in &spec.grid {
        let r_n = if n >= 2 { rn(&track, n).ok() } else { None };
        let s_n = s_all[(n - 1) as usize];
        let thm4 = if track.rho(n) > 0.0 {
            r_n.map(|r| theorem4_shape(&track, r, n))
        } else {
            None
        };
        let thm5 = theorem5_shape(&track, s_n, n, DEFAULT_F2_FLOOR).map_err(map_bounds)?;
        let cor = corollary_shape(&track, s_n, n, BAND_LO, BAND_HI).map_err(map_bounds)?;
        if (thm5.hypothesis_warning || cor.hypothesis_warning) && !band_flagged {
            band_flagged = true;
            warnings.push(format!(
                "{}: shape hypothesis band violated at some generation; \
                 shape columns are reported anyway",
                spec.slug
            ));
        }

        let (trunc_k, dw, dw_truncation_bound, basis, basis_value) =
            match try_dw(spec, &env, &track, n)? {
                DwOutcome::Computed { k, dw, truncation_bound } => {
                    (Some(k), Some(dw), Some(truncation_bound), "dw", dw)
                }
                DwOutcome::Fallback(reason) => {
                    let Some(t4) = thm4 else {
                        return Err(CliError::Numerical(format!(
                            "{}: n = {n}: no exact distance ({reason}) and no first \
                             bound shape to fall back on",
                            spec.slug
                        )));
                    };
                    warnings.push(format!(
                        "{}: n = {n}: diagnostic uses thm4_shape ({reason})",
                        spec.slug
                    ));
                    (None, None, None, "thm4_shape", t4)
                }
            };

        rows.push(ExampleRow {
            n,
            mu: track.mu(n),
            rho: track.rho(n),
            mu_rho: track.mu_rho(n),
            r_n,
            s_n,
            thm4_shape: thm4,
            thm5_shape: thm5.value,
            cor_shape: cor.value,
            lf_exact_bound: spec
                .lf
                .then(|| 4.0 / (2.0 + track.mu_rho(n))),
            trunc_k,
            dw,
            dw_truncation_bound,
            basis,
            diagnostic: basis_value * (spec.diag)(n, track.mu_rho(n)),
        });
    }
    Ok((rows, warnings))
}
