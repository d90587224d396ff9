//! Offspring laws, environment sequences, and criticality diagnostics.
//!
//! One generation of reproduction is an [`OffspringLaw`]: an explicit finite
//! pmf or one of three named families with closed-form pgfs and factorial
//! moments,
//!
//! | family                | pmf / pgf                                             | `f'(1)` | `f''(1)`      | `f'''(1)`        |
//! |-----------------------|-------------------------------------------------------|---------|---------------|------------------|
//! | `poisson(λ)`          | `f(s) = exp(λ(s−1))`                                  | `λ`     | `λ²`          | `λ³`             |
//! | `linear_fractional(a,p)` | `q[0] = 1−a`, `q[k] = a·p(1−p)^{k−1}`;  `f(s) = 1 − a(1−s)/(1−(1−p)s)` | `a/p` | `2a(1−p)/p²` | `6a(1−p)²/p³` |
//! | `symmetric(δ)`        | `q[0] = q[2] = δ/2`, `q[1] = 1−δ`                     | `1`     | `δ`           | `0`              |
//!
//! An [`Environment`] is a deterministic rule `n ↦ q_n` for `n ≥ 1`: a
//! constant law, a named family with [`SeqExpr`] parameters, an explicit list
//! with an extension rule, or a custom closure.  Environments are immutable
//! and cheap to clone; `law_at(n)` is pure, so concurrent use needs no
//! coordination.
//!
//! The diagnostics at the bottom ([`classify`], [`check_starstar`]) report
//! *finite-horizon evidence* for the criticality condition
//! `ρ_{0,n} → ∞` and `μ_n ρ_{0,n} → ∞` — an asymptotic statement no finite
//! computation can certify — plus the third-moment regularity
//! `f_n'''(1) ≤ c · f_n''(1)(1 + f_n'(1))`, which *is* finitely checkable per
//! generation.  The stronger ε-family of regularity conditions quantifying
//! over every ε > 0 admits no finite certificate and is deliberately not
//! machine-checked; reports only ever speak about the per-generation
//! inequality above.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
// f64 math in no_std; shadowed by std's inherent methods under cfg(test).
#[allow(unused_imports)]
use num_traits::Float;

use crate::seqexpr::{EvalError, SeqExpr};

/// Mass-balance slack accepted when validating explicit pmfs.
pub const MASS_TOLERANCE: f64 = 1e-12;

// ── errors ──────────────────────────────────────────────────────────────

/// Rejected offspring-law parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LawError {
    /// Explicit pmf with no entries.
    EmptyPmf,
    /// A pmf entry is negative or not finite.
    BadEntry { index: usize, value: f64 },
    /// Total mass differs from 1 by more than [`MASS_TOLERANCE`].
    MassNotOne { total: f64 },
    /// Every law must have `0 < E[X] < ∞`.
    NonPositiveMean,
    /// A named-family parameter is outside its domain.
    BadParam {
        param: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

impl fmt::Display for LawError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawError::EmptyPmf => f.write_str("explicit pmf must have at least one entry"),
            LawError::BadEntry { index, value } => {
                write!(f, "pmf entry at index {index} is invalid: {value}")
            }
            LawError::MassNotOne { total } => {
                write!(f, "pmf mass {total} differs from 1 by more than {MASS_TOLERANCE:e}")
            }
            LawError::NonPositiveMean => f.write_str("offspring mean must be strictly positive"),
            LawError::BadParam {
                param,
                value,
                constraint,
            } => write!(f, "parameter {param} = {value} violates {constraint}"),
        }
    }
}

impl core::error::Error for LawError {}

/// Environment evaluation failure at a specific generation.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvError {
    /// Generation indices start at 1.
    IndexZero,
    /// The law produced for generation `n` failed validation.
    Law { n: u64, source: LawError },
    /// A `SeqExpr` parameter could not be evaluated at `n`.
    Param {
        n: u64,
        param: &'static str,
        source: EvalError,
    },
    /// A list environment with the `Error` extension rule was asked past its end.
    PastList { n: u64, len: usize },
    /// List environments need at least one law.
    EmptyList,
    /// Free-form failure for custom generators.
    Custom { n: u64, message: String },
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::IndexZero => f.write_str("generation index must be at least 1"),
            EnvError::Law { n, source } => write!(f, "generation {n}: {source}"),
            EnvError::Param { n, param, source } => {
                write!(f, "generation {n}: parameter {param}: {source}")
            }
            EnvError::PastList { n, len } => write!(
                f,
                "generation {n} is past the {len}-law list (extension rule: error)"
            ),
            EnvError::EmptyList => f.write_str("list environment must contain at least one law"),
            EnvError::Custom { n, message } => write!(f, "generation {n}: {message}"),
        }
    }
}

impl core::error::Error for EnvError {}

// ── offspring laws ──────────────────────────────────────────────────────

/// First three factorial moments `(f'(1), f''(1), f'''(1))` of a law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialMoments {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

/// The shape of an offspring law; obtain one through [`OffspringLaw::kind`].
#[derive(Debug, Clone, PartialEq)]
pub enum LawKind {
    /// Finite support `0..probs.len()`.
    Explicit { probs: Vec<f64> },
    Poisson { lambda: f64 },
    /// `q[0] = 1−a`, `q[k] = a·p(1−p)^{k−1}` for `k ≥ 1`.
    LinearFractional { a: f64, p: f64 },
    /// `q[0] = q[2] = δ/2`, `q[1] = 1−δ`.
    Symmetric { delta: f64 },
}

/// A validated one-generation reproduction law.
///
/// Invariants enforced at construction: all mass is nonnegative, explicit
/// pmfs sum to 1 within [`MASS_TOLERANCE`], and the mean is strictly positive
/// and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    kind: LawKind,
}

impl OffspringLaw {
    /// Explicit pmf on `{0, 1, …, probs.len()−1}`.
    pub fn explicit(probs: Vec<f64>) -> Result<Self, LawError> {
        if probs.is_empty() {
            return Err(LawError::EmptyPmf);
        }
        let mut total = 0.0;
        let mut mean = 0.0;
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(LawError::BadEntry { index, value });
            }
            total += value;
            mean += index as f64 * value;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(LawError::MassNotOne { total });
        }
        if !(mean > 0.0) {
            return Err(LawError::NonPositiveMean);
        }
        Ok(Self {
            kind: LawKind::Explicit { probs },
        })
    }

    /// The deterministic one-child law `δ_1`.
    pub fn delta_one() -> Self {
        Self::explicit(alloc::vec![0.0, 1.0]).expect("delta_1 is a valid law")
    }

    pub fn poisson(lambda: f64) -> Result<Self, LawError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LawError::BadParam {
                param: "lambda",
                value: lambda,
                constraint: "lambda > 0",
            });
        }
        Ok(Self {
            kind: LawKind::Poisson { lambda },
        })
    }

    pub fn linear_fractional(a: f64, p: f64) -> Result<Self, LawError> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(LawError::BadParam {
                param: "a",
                value: a,
                constraint: "a in (0, 1]",
            });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(LawError::BadParam {
                param: "p",
                value: p,
                constraint: "p in (0, 1)",
            });
        }
        Ok(Self {
            kind: LawKind::LinearFractional { a, p },
        })
    }

    pub fn symmetric(delta: f64) -> Result<Self, LawError> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(LawError::BadParam {
                param: "delta",
                value: delta,
                constraint: "delta in (0, 1]",
            });
        }
        Ok(Self {
            kind: LawKind::Symmetric { delta },
        })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    /// First three factorial moments, by closed form for the named families
    /// and by direct summation `Σ k(k−1)(k−2)·p_k` (etc.) for explicit pmfs.
    pub fn moments(&self) -> FactorialMoments {
        match &self.kind {
            LawKind::Explicit { probs } => {
                let (mut f1, mut f2, mut f3) = (0.0, 0.0, 0.0);
                for (k, &p) in probs.iter().enumerate() {
                    let k = k as f64;
                    f1 += k * p;
                    f2 += k * (k - 1.0) * p;
                    f3 += k * (k - 1.0) * (k - 2.0) * p;
                }
                FactorialMoments { f1, f2, f3 }
            }
            LawKind::Poisson { lambda } => FactorialMoments {
                f1: *lambda,
                f2: lambda * lambda,
                f3: lambda * lambda * lambda,
            },
            LawKind::LinearFractional { a, p } => FactorialMoments {
                f1: a / p,
                f2: 2.0 * a * (1.0 - p) / (p * p),
                f3: 6.0 * a * (1.0 - p) * (1.0 - p) / (p * p * p),
            },
            LawKind::Symmetric { delta } => FactorialMoments {
                f1: 1.0,
                f2: *delta,
                f3: 0.0,
            },
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().f1
    }

    /// pgf `f(s) = Σ s^k q[k]` at a complex point, `|s| ≤ 1 + 1e−12`.
    pub fn pgf(&self, s: Complex64) -> Complex64 {
        match &self.kind {
            LawKind::Explicit { probs } => horner(probs, s),
            LawKind::Poisson { lambda } => ((s - 1.0) * *lambda).exp(),
            LawKind::LinearFractional { a, p } => {
                let one = Complex64::new(1.0, 0.0);
                one - (one - s) * *a / (one - s * (1.0 - p))
            }
            LawKind::Symmetric { delta } => {
                let d2 = delta / 2.0;
                Complex64::new(d2, 0.0) + s * (1.0 - delta) + s * s * d2
            }
        }
    }

    /// pgf on the real segment `[0, 1]`, where every law is defined.
    pub fn pgf_real(&self, s: f64) -> f64 {
        debug_assert!((0.0..=1.0 + 1e-12).contains(&s));
        match &self.kind {
            LawKind::Explicit { probs } => horner_real(probs, s),
            LawKind::Poisson { lambda } => (lambda * (s - 1.0)).exp(),
            LawKind::LinearFractional { a, p } => 1.0 - a * (1.0 - s) / (1.0 - (1.0 - p) * s),
            LawKind::Symmetric { delta } => {
                delta / 2.0 + (1.0 - delta) * s + delta / 2.0 * s * s
            }
        }
    }

    /// pgf at a real `x ≥ 0` that may exceed 1, used for Chernoff-style tail
    /// bounds.  Returns `None` outside the domain of convergence (the
    /// linear-fractional series diverges at its pole `x = 1/(1−p)`) or when
    /// the value is not finite.
    pub fn pgf_real_checked(&self, x: f64) -> Option<f64> {
        if !(x >= 0.0 && x.is_finite()) {
            return None;
        }
        let v = match &self.kind {
            LawKind::Explicit { probs } => horner_real(probs, x),
            LawKind::Poisson { lambda } => (lambda * (x - 1.0)).exp(),
            LawKind::LinearFractional { a, p } => {
                let den = 1.0 - (1.0 - p) * x;
                if den <= 0.0 {
                    return None;
                }
                1.0 - a * (1.0 - x) / den
            }
            LawKind::Symmetric { delta } => {
                delta / 2.0 + (1.0 - delta) * x + delta / 2.0 * x * x
            }
        };
        v.is_finite().then_some(v)
    }

    /// `q[k]`, exact up to rounding for every family.
    pub fn pmf(&self, k: u64) -> f64 {
        match &self.kind {
            LawKind::Explicit { probs } => {
                usize::try_from(k).ok().and_then(|i| probs.get(i)).copied().unwrap_or(0.0)
            }
            LawKind::Poisson { lambda } => {
                // Recurrence p_{k} = p_{k-1}·λ/k from p_0 = e^{-λ}; cheap at
                // the desk scales involved and free of lgamma.
                let mut p = (-lambda).exp();
                for i in 1..=k {
                    p *= lambda / i as f64;
                }
                p
            }
            LawKind::LinearFractional { a, p } => {
                if k == 0 {
                    1.0 - a
                } else {
                    a * p * (1.0 - p).powi((k - 1).min(u64::from(u32::MAX)) as i32)
                }
            }
            LawKind::Symmetric { delta } => match k {
                0 | 2 => delta / 2.0,
                1 => 1.0 - delta,
                _ => 0.0,
            },
        }
    }

    /// First `len` pmf entries `q[0..len]`.
    pub fn pmf_prefix(&self, len: usize) -> Vec<f64> {
        match &self.kind {
            LawKind::Explicit { probs } => {
                let mut v = probs.clone();
                v.resize(len, 0.0);
                v.truncate(len);
                v
            }
            LawKind::Poisson { lambda } => {
                let mut v = Vec::with_capacity(len);
                let mut p = (-lambda).exp();
                for k in 0..len {
                    if k > 0 {
                        p *= lambda / k as f64;
                    }
                    v.push(p);
                }
                v
            }
            LawKind::LinearFractional { a, p } => {
                let mut v = Vec::with_capacity(len);
                for k in 0..len {
                    if k == 0 {
                        v.push(1.0 - a);
                    } else if k == 1 {
                        v.push(a * p);
                    } else {
                        let prev = v[k - 1];
                        v.push(prev * (1.0 - p));
                    }
                }
                v
            }
            LawKind::Symmetric { .. } => (0..len as u64).map(|k| self.pmf(k)).collect(),
        }
    }

    /// Largest value with positive probability, when the support is finite.
    pub fn support_bound(&self) -> Option<u64> {
        match &self.kind {
            LawKind::Explicit { probs } => {
                let last = probs.iter().rposition(|&p| p > 0.0)?;
                Some(last as u64)
            }
            LawKind::Symmetric { .. } => Some(2),
            LawKind::Poisson { .. } | LawKind::LinearFractional { .. } => None,
        }
    }
}

fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

fn horner_real(coeffs: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

// ── environments ────────────────────────────────────────────────────────

/// What a list environment does past its last explicit law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extend {
    Cycle,
    HoldLast,
    /// Fail loudly (the default: silent cycling would corrupt moment ledgers).
    Error,
}

#[derive(Clone)]
enum Generator {
    Constant(OffspringLaw),
    Poisson { lambda: SeqExpr },
    LinearFractional { a: SeqExpr, p: SeqExpr },
    Symmetric { delta: SeqExpr },
    List { laws: Vec<OffspringLaw>, extend: Extend },
    Custom(Arc<dyn Fn(u64) -> Result<OffspringLaw, EnvError> + Send + Sync>),
}

/// A deterministic, immutable sequence of offspring laws `q_1, q_2, …`.
///
/// The `horizon` is declared metadata — the generation span the caller
/// intends to compute over — not a hard wall: named families remain
/// evaluable beyond it, while list environments honor their extension rule.
#[derive(Clone)]
pub struct Environment {
    generator: Generator,
    horizon: u64,
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.generator {
            Generator::Constant(law) => return write!(
                f,
                "Environment::constant({law:?}, horizon={})",
                self.horizon
            ),
            Generator::Poisson { .. } => "poisson_family",
            Generator::LinearFractional { .. } => "linear_fractional_family",
            Generator::Symmetric { .. } => "symmetric_family",
            Generator::List { .. } => "list",
            Generator::Custom(_) => "custom",
        };
        write!(f, "Environment::{name}(horizon={})", self.horizon)
    }
}

impl Environment {
    /// Same law every generation.
    pub fn constant(law: OffspringLaw, horizon: u64) -> Self {
        Self {
            generator: Generator::Constant(law),
            horizon,
        }
    }

    /// `q_n = Poisson(λ_n)` with `λ_n` given by an expression in `n`.
    pub fn poisson_family(lambda: SeqExpr, horizon: u64) -> Self {
        Self {
            generator: Generator::Poisson { lambda },
            horizon,
        }
    }

    /// `q_n = LinearFractional(a_n, p_n)`.
    pub fn linear_fractional_family(a: SeqExpr, p: SeqExpr, horizon: u64) -> Self {
        Self {
            generator: Generator::LinearFractional { a, p },
            horizon,
        }
    }

    /// `q_n = Symmetric(δ_n)`.
    pub fn symmetric_family(delta: SeqExpr, horizon: u64) -> Self {
        Self {
            generator: Generator::Symmetric { delta },
            horizon,
        }
    }

    /// Explicit laws for generations `1..=laws.len()`, extended per `extend`.
    pub fn from_list(
        laws: Vec<OffspringLaw>,
        extend: Extend,
        horizon: u64,
    ) -> Result<Self, EnvError> {
        if laws.is_empty() {
            return Err(EnvError::EmptyList);
        }
        Ok(Self {
            generator: Generator::List { laws, extend },
            horizon,
        })
    }

    /// Fully custom generator; must be pure (same `n` → same law).
    pub fn custom<F>(generator: F, horizon: u64) -> Self
    where
        F: Fn(u64) -> Result<OffspringLaw, EnvError> + Send + Sync + 'static,
    {
        Self {
            generator: Generator::Custom(Arc::new(generator)),
            horizon,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// The offspring law of generation `n ≥ 1`.
    pub fn law_at(&self, n: u64) -> Result<OffspringLaw, EnvError> {
        if n == 0 {
            return Err(EnvError::IndexZero);
        }
        match &self.generator {
            Generator::Constant(law) => Ok(law.clone()),
            Generator::Poisson { lambda } => {
                let l = eval_param(lambda, n, "lambda")?;
                OffspringLaw::poisson(l).map_err(|source| EnvError::Law { n, source })
            }
            Generator::LinearFractional { a, p } => {
                let av = eval_param(a, n, "a")?;
                let pv = eval_param(p, n, "p")?;
                OffspringLaw::linear_fractional(av, pv)
                    .map_err(|source| EnvError::Law { n, source })
            }
            Generator::Symmetric { delta } => {
                let d = eval_param(delta, n, "delta")?;
                OffspringLaw::symmetric(d).map_err(|source| EnvError::Law { n, source })
            }
            Generator::List { laws, extend } => {
                let idx = (n - 1) as usize;
                if idx < laws.len() {
                    return Ok(laws[idx].clone());
                }
                match extend {
                    Extend::Cycle => Ok(laws[idx % laws.len()].clone()),
                    Extend::HoldLast => Ok(laws[laws.len() - 1].clone()),
                    Extend::Error => Err(EnvError::PastList { n, len: laws.len() }),
                }
            }
            Generator::Custom(f) => f(n),
        }
    }

    /// Laws of generations `1..=n`, materialized once for hot loops
    /// (`result[i]` is the law of generation `i+1`).
    pub fn laws_upto(&self, n: u64) -> Result<Vec<OffspringLaw>, EnvError> {
        let mut v = Vec::with_capacity(n as usize);
        for g in 1..=n {
            v.push(self.law_at(g)?);
        }
        Ok(v)
    }

    /// Checks that every generation up to the horizon yields a valid law.
    pub fn validate(&self) -> Result<(), EnvError> {
        for g in 1..=self.horizon {
            self.law_at(g)?;
        }
        Ok(())
    }

    /// True when generations `1..=n` are all linear-fractional (the family
    /// with closed-form composites and the exact rate bound).
    pub fn all_linear_fractional_upto(&self, n: u64) -> bool {
        (1..=n).all(|g| {
            matches!(
                self.law_at(g).map(|law| law.kind().clone()),
                Ok(LawKind::LinearFractional { .. })
            )
        })
    }
}

fn eval_param(expr: &SeqExpr, n: u64, param: &'static str) -> Result<f64, EnvError> {
    expr.eval(n).map_err(|source| EnvError::Param { n, param, source })
}

// ── built-in example environments ───────────────────────────────────────

/// Symmetric perturbations with polynomial decay `δ_n = n^{-a}`, `a > 0`.
pub fn symmetric_power_env(a: f64, horizon: u64) -> Environment {
    assert!(a > 0.0 && a.is_finite(), "decay exponent must be positive");
    let delta = SeqExpr::parse(&format!("1/n^{a}")).expect("well-formed expression");
    Environment::symmetric_family(delta, horizon)
}

/// Poisson environment with `λ_1 = 1` and `λ_n = n/(n−1)` afterwards, so the
/// cumulative mean telescopes to `μ_n = n`.
pub fn poisson_increasing_env(horizon: u64) -> Environment {
    Environment::custom(
        |n| {
            let lambda = if n == 1 { 1.0 } else { n as f64 / (n - 1) as f64 };
            OffspringLaw::poisson(lambda).map_err(|source| EnvError::Law { n, source })
        },
        horizon,
    )
}

/// Poisson environment with `λ_n = exp(−√n)/exp(−√(n−1))`, driving
/// `μ_n = exp(−√n)` toward zero at a sub-exponential rate.
pub fn poisson_sqrt_decay_env(horizon: u64) -> Environment {
    let lambda =
        SeqExpr::parse("exp(-sqrt(n))/exp(-sqrt(n-1))").expect("well-formed expression");
    Environment::poisson_family(lambda, horizon)
}

/// Constant linear-fractional environment; `a = p` makes it critical.
pub fn lf_constant_env(a: f64, p: f64, horizon: u64) -> Result<Environment, LawError> {
    Ok(Environment::constant(
        OffspringLaw::linear_fractional(a, p)?,
        horizon,
    ))
}

// ── criticality diagnostics ─────────────────────────────────────────────

/// Default trend slack: `ρ_{0,N} > ρ_{0,⌈N/2⌉}·(1+ε)` counts as "increasing".
pub const DEFAULT_TREND_EPSILON: f64 = 0.05;

/// Default constant against which the third-moment condition is checked.
pub const DEFAULT_STARSTAR_C: f64 = 1.0;

/// Per-generation result of the third-moment regularity check
/// `f_n'''(1) ≤ c·f_n''(1)(1+f_n'(1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarStarReport {
    /// Whether the inequality holds at the given `c`, per generation `1..=N`.
    pub ok: Vec<bool>,
    /// Minimal feasible `c_n = f'''/(f''(1+f'))`; `0` when `f'' = f''' = 0`
    /// by convention, `∞` when `f'' = 0` with `f''' > 0`.
    pub c_min: Vec<f64>,
    /// Supremum of `c_min` over the horizon.
    pub c_sup: f64,
}

/// Finite-horizon criticality evidence; see [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityReport {
    pub horizon: u64,
    /// `μ_1..μ_N` (index 0 holds `n = 1`).
    pub mu: Vec<f64>,
    /// `ρ_{0,1}..ρ_{0,N}`.
    pub rho: Vec<f64>,
    /// `μ_n·ρ_{0,n}`.
    pub mu_rho: Vec<f64>,
    /// Third-moment check at `c_checked`, with its per-n minimal witnesses.
    pub starstar: StarStarReport,
    pub c_checked: f64,
    /// Heuristic: `ρ_{0,N} > ρ_{0,⌈N/2⌉}(1+ε)`.  Finite-horizon evidence,
    /// never a theorem.
    pub rho_increasing_unbounded: bool,
    /// Same heuristic for `μ_n ρ_{0,n}`.
    pub mu_rho_increasing_unbounded: bool,
    pub f1_min: f64,
    pub f1_max: f64,
    pub f2_min: f64,
    pub epsilon_trend: f64,
}

impl CriticalityReport {
    /// Both trend flags — the finite-horizon shadow of the criticality
    /// condition `ρ_{0,n} → ∞`, `μ_n ρ_{0,n} → ∞`.
    pub fn looks_critical(&self) -> bool {
        self.rho_increasing_unbounded && self.mu_rho_increasing_unbounded
    }
}

/// Checks `f_n'''(1) ≤ c·f_n''(1)(1+f_n'(1))` for each `n ≤ horizon`.
pub fn check_starstar(
    env: &Environment,
    horizon: u64,
    c: f64,
) -> Result<StarStarReport, EnvError> {
    let mut ok = Vec::with_capacity(horizon as usize);
    let mut c_min = Vec::with_capacity(horizon as usize);
    let mut c_sup = 0.0f64;
    for n in 1..=horizon {
        let m = env.law_at(n)?.moments();
        let cn = if m.f2 == 0.0 {
            if m.f3 == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            m.f3 / (m.f2 * (1.0 + m.f1))
        };
        c_min.push(cn);
        ok.push(cn <= c);
        if cn > c_sup {
            c_sup = cn;
        }
    }
    Ok(StarStarReport { ok, c_min, c_sup })
}

/// Builds the moment ledger over the horizon and reports finite-horizon
/// criticality evidence with the default trend slack and third-moment `c`.
pub fn classify(env: &Environment, horizon: u64) -> Result<CriticalityReport, EnvError> {
    classify_with(env, horizon, DEFAULT_STARSTAR_C, DEFAULT_TREND_EPSILON)
}

/// [`classify`] with explicit third-moment constant and trend slack.
pub fn classify_with(
    env: &Environment,
    horizon: u64,
    c: f64,
    epsilon_trend: f64,
) -> Result<CriticalityReport, EnvError> {
    assert!(horizon >= 3, "classification needs a horizon of at least 3");
    let track = crate::bounds::moment_sequences(env, horizon)?;
    let starstar = check_starstar(env, horizon, c)?;

    let n = horizon as usize;
    let mu: Vec<f64> = (1..=n).map(|i| track.mu(i as u64)).collect();
    let rho: Vec<f64> = (1..=n).map(|i| track.rho(i as u64)).collect();
    let mu_rho: Vec<f64> = (1..=n).map(|i| track.mu_rho(i as u64)).collect();

    let half = n.div_ceil(2);
    let rho_increasing_unbounded = rho[n - 1] > rho[half - 1] * (1.0 + epsilon_trend);
    let mu_rho_increasing_unbounded = mu_rho[n - 1] > mu_rho[half - 1] * (1.0 + epsilon_trend);

    let mut f1_min = f64::INFINITY;
    let mut f1_max = 0.0f64;
    let mut f2_min = f64::INFINITY;
    for g in 1..=horizon {
        let m = env.law_at(g)?.moments();
        f1_min = f1_min.min(m.f1);
        f1_max = f1_max.max(m.f1);
        f2_min = f2_min.min(m.f2);
    }

    Ok(CriticalityReport {
        horizon,
        mu,
        rho,
        mu_rho,
        starstar,
        c_checked: c,
        rho_increasing_unbounded,
        mu_rho_increasing_unbounded,
        f1_min,
        f1_max,
        f2_min,
        epsilon_trend,
    })
}
