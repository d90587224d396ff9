//! Exact finite-n laws: pgf composition, pmf recovery, survival and
//! conditional laws, size-biased and equilibrium transforms, and shape
//! functions.
//!
//! The generating function of `Z_n` started from one ancestor is the
//! inside-out composition `f_{0,n} = f_1 ∘ f_2 ∘ ⋯ ∘ f_n` (with
//! `f_{n,n}(s) = s`).  Everything in this module is a different way of
//! reading that one function:
//!
//! * [`law_of_zn`] recovers `P[Z_n = k]` for `k < K` by evaluating
//!   `f_{0,n}` at the K-th roots of unity and inverting the DFT — `O(n)`
//!   scalar work per point instead of `O(K²)` per generation.  A
//!   direct-convolution oracle ([`law_of_zn_conv`]) and a closed form for
//!   linear-fractional environments ([`law_of_zn_closed_form`]) cross-check
//!   it.
//! * [`survival_prob`] is `1 − f_{j,n}(0)`, the probability that the
//!   process seeded at generation `j` is still alive at `n`.
//! * [`conditional_law`] divides out the zero atom to give
//!   `Y_n = (Z_n | Z_n > 0)` together with its exact mean `b_n`.
//! * [`size_biased_law`] and [`equilibrium_cdf`] are the two transforms
//!   whose interplay drives the exponential-limit machinery: the
//!   equilibrium law of `X` is `U·Ẋ` with `U` uniform and `Ẋ`
//!   size-biased.
//! * [`shape_function`] / [`composed_shape`] evaluate
//!   `φ(s) = 1/(1−f(s)) − 1/(f'(1)(1−s))`, the curvature summary whose
//!   composite telescopes into the `ρ_{0,n}` ledger entry.
//!
//! Truncated pmfs are never renormalized: the unaccounted mass is carried
//! explicitly in `tail_mass` and operations fail loudly when it exceeds
//! tolerance, because silently rescaling would bias every conditional
//! quantity downstream.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
// f64 math in no_std; shadowed by std's inherent methods under cfg(test).
#[allow(unused_imports)]
use num_traits::Float;

use crate::bounds::{moment_sequences, MomentTrack};
use crate::env::{EnvError, Environment, OffspringLaw};
use crate::fft;

/// Default ceiling on `tail_mass` before pmf recovery reports failure.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Negative DFT round-off more extreme than this is an error, not noise.
pub const NEGATIVE_CLIP_FLOOR: f64 = -1e-12;

/// `φ` switches to its analytic limit when `1 − s` drops below this.
pub const SHAPE_LIMIT_THRESHOLD: f64 = 1e-7;

/// Tail mass above which transform operations refuse their input.
pub const TRANSFORM_TAIL_CEILING: f64 = 1e-6;

// ── errors ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum ExactError {
    Env(EnvError),
    /// The DFT path needs a power-of-two truncation point.
    InvalidK { k: usize },
    /// `tail_mass` exceeded tolerance: K is too small for this horizon.
    Truncation { tail_mass: f64, tol: f64 },
    /// A recovered probability was negative beyond round-off clipping.
    NegativeProbability { k: usize, value: f64 },
    /// Σp and tail_mass are inconsistent with total mass 1.
    MassInconsistent { sum: f64, tail_mass: f64 },
    /// The pmf carries no mass on k ≥ 1.
    ZeroMean,
    /// Survival probability too small to condition on.
    VanishingSurvival { survival: f64 },
    /// `f(s) = 1` at some `s < 1`; the shape function is undefined.
    DegenerateLaw,
    /// The input pmf's tail is too heavy for a faithful transform.
    TailTooHeavy { tail_mass: f64 },
    /// The closed-form path applies only to linear-fractional environments.
    FamilyMismatch { n: u64 },
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::Env(e) => write!(f, "environment: {e}"),
            ExactError::InvalidK { k } => {
                write!(f, "truncation point {k} must be a power of two for the DFT path")
            }
            ExactError::Truncation { tail_mass, tol } => write!(
                f,
                "tail mass {tail_mass:e} exceeds tolerance {tol:e}; increase the truncation point"
            ),
            ExactError::NegativeProbability { k, value } => write!(
                f,
                "recovered probability p[{k}] = {value:e} is below the round-off floor \
                 {NEGATIVE_CLIP_FLOOR:e}"
            ),
            ExactError::MassInconsistent { sum, tail_mass } => write!(
                f,
                "probability mass {sum} with tail {tail_mass:e} is inconsistent with total mass 1"
            ),
            ExactError::ZeroMean => f.write_str("pmf has zero mean; transform undefined"),
            ExactError::VanishingSurvival { survival } => {
                write!(f, "survival probability {survival:e} is too small to condition on")
            }
            ExactError::DegenerateLaw => {
                f.write_str("offspring pgf reaches 1 before s = 1; shape function undefined")
            }
            ExactError::TailTooHeavy { tail_mass } => write!(
                f,
                "tail mass {tail_mass:e} exceeds {TRANSFORM_TAIL_CEILING:e}; \
                 transform would not be faithful"
            ),
            ExactError::FamilyMismatch { n } => write!(
                f,
                "closed form requires linear-fractional laws through generation {n}"
            ),
        }
    }
}

impl core::error::Error for ExactError {}

impl From<EnvError> for ExactError {
    fn from(e: EnvError) -> Self {
        ExactError::Env(e)
    }
}

// ── truncated pmfs ──────────────────────────────────────────────────────

/// How a [`TruncatedPmf`] was produced, with path-specific audit data.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Root-of-unity evaluation + inverse DFT.  `max_clip` is the largest
    /// magnitude of negative round-off clipped to zero.
    Dft { max_clip: f64 },
    /// Forward random-sum convolution over generations.
    Convolution,
    /// Linear-fractional closed form; `tail_mass` is the analytic
    /// geometric tail, exactly.
    ClosedForm,
}

/// A nonnegative vector `p[0..K]` plus explicit unaccounted mass.
///
/// Invariants enforced at construction: every entry is finite and `≥ 0`,
/// `tail_mass ≥ 0`, `Σp ≤ 1 + 1e−9`, and `Σp + tail_mass ≥ 1 − 1e−9`.  The
/// upper side is checked on `Σp` alone because `tail_mass` may be a strict
/// *upper bound* on the truncated mass (the DFT path uses a Chernoff bound
/// on the aliased tail — see [`law_of_zn`]), so `Σp + tail_mass` can
/// legitimately exceed 1 by the slack in that bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPmf {
    probs: Vec<f64>,
    tail_mass: f64,
    provenance: Provenance,
}

impl TruncatedPmf {
    pub fn new(
        probs: Vec<f64>,
        tail_mass: f64,
        provenance: Provenance,
    ) -> Result<Self, ExactError> {
        for (k, &p) in probs.iter().enumerate() {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(ExactError::NegativeProbability { k, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        if !(tail_mass >= 0.0) || sum > 1.0 + 1e-9 || sum + tail_mass < 1.0 - 1e-9 {
            return Err(ExactError::MassInconsistent { sum, tail_mass });
        }
        Ok(Self {
            probs,
            tail_mass,
            provenance,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P[X = k]`, zero beyond the truncation point.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// Truncation point K (the support considered is `0..K`).
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Mean of the truncated part, `Σ k·p[k]`.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p)
            .sum()
    }

    /// Second factorial moment of the truncated part, `Σ k(k−1)·p[k]`.
    pub fn second_factorial(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, &p)| (k * k.saturating_sub(1)) as f64 * p)
            .sum()
    }
}

// ── pgf composition ─────────────────────────────────────────────────────

/// `f_{m,n}(s) = f_{m+1}(f_{m+2}(…f_n(s)))`, with `f_{n,n}(s) = s`.
///
/// Evaluated inside-out; the law of `Z_n` is encoded by `f_{0,n}`.
pub fn compose_pgf(
    env: &Environment,
    m: u64,
    n: u64,
    s: Complex64,
) -> Result<Complex64, EnvError> {
    assert!(m <= n, "compose_pgf needs m <= n");
    let mut acc = s;
    for g in (m + 1..=n).rev() {
        acc = env.law_at(g)?.pgf(acc);
    }
    Ok(acc)
}

/// Same composition over pre-materialized laws (hot-loop form):
/// `laws[i]` is the law of generation `m + 1 + i`.
fn compose_with_laws(laws: &[OffspringLaw], s: Complex64) -> Complex64 {
    let mut acc = s;
    for law in laws.iter().rev() {
        acc = law.pgf(acc);
    }
    acc
}

/// Real composition at `x ≥ 0` (possibly `> 1`) with per-law domain guards;
/// `None` as soon as any intermediate leaves a law's domain of convergence.
fn compose_real_checked(laws: &[OffspringLaw], x: f64) -> Option<f64> {
    let mut acc = x;
    for law in laws.iter().rev() {
        acc = law.pgf_real_checked(acc)?;
    }
    Some(acc)
}

/// Real composition on `[0, 1]`, where every law is defined.
fn compose_real(laws: &[OffspringLaw], s: f64) -> f64 {
    let mut acc = s;
    for law in laws.iter().rev() {
        acc = law.pgf_real(acc);
    }
    acc
}

// ── pmf recovery ────────────────────────────────────────────────────────

/// Law of `Z_n` truncated at `K` (a power of two), via root-of-unity
/// evaluation of `f_{0,n}` and inverse DFT, with the default tail
/// tolerance [`DEFAULT_TAIL_TOL`].
///
/// The inverse DFT *aliases*: mass at `k ≥ K` folds onto `k mod K`, so the
/// recovered vector always sums to ≈ 1 and the literal deficit `1 − Σp`
/// cannot measure truncation.  `tail_mass` is therefore the literal deficit
/// (floored at 0) **plus** a Chernoff bound on `P[Z_n ≥ K]`,
/// `min_x f_{0,n}(x)/x^K` over a grid `x = 1 + 2^{−t}`, which bounds the
/// aliased mass from above.  Negative round-off in `[−1e−12, 0)` is clipped
/// to zero and the worst clip recorded in the provenance.
pub fn law_of_zn(env: &Environment, n: u64, k: usize) -> Result<TruncatedPmf, ExactError> {
    law_of_zn_with_tol(env, n, k, DEFAULT_TAIL_TOL)
}

/// [`law_of_zn`] with an explicit tail tolerance.
pub fn law_of_zn_with_tol(
    env: &Environment,
    n: u64,
    k: usize,
    tol: f64,
) -> Result<TruncatedPmf, ExactError> {
    if !k.is_power_of_two() {
        return Err(ExactError::InvalidK { k });
    }
    let laws = env.laws_upto(n)?;

    // Evaluate f_{0,n} on the lower half-spectrum; real coefficients give
    // the upper half by conjugate symmetry.
    let roots = fft::half_spectrum_roots(k);
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for (j, &w) in roots.iter().enumerate() {
        buf[j] = compose_with_laws(&laws, w);
    }
    for j in k / 2 + 1..k {
        buf[j] = buf[k - j].conj();
    }
    fft::fft_in_place(&mut buf, -1.0);

    let mut probs = Vec::with_capacity(k);
    let mut max_clip = 0.0f64;
    let scale = 1.0 / k as f64;
    for (idx, z) in buf.iter().enumerate() {
        let p = z.re * scale;
        if p < 0.0 {
            if p < NEGATIVE_CLIP_FLOOR {
                return Err(ExactError::NegativeProbability { k: idx, value: p });
            }
            max_clip = max_clip.max(-p);
            probs.push(0.0);
        } else {
            probs.push(p);
        }
    }

    let sum: f64 = probs.iter().sum();
    let tail_mass = (1.0 - sum).max(0.0) + aliasing_tail_bound(&laws, k);
    let pmf = TruncatedPmf::new(probs, tail_mass, Provenance::Dft { max_clip })?;
    if tail_mass > tol {
        return Err(ExactError::Truncation { tail_mass, tol });
    }
    Ok(pmf)
}

/// Upper bound on `P[Z_n ≥ K]`.
///
/// Exactly zero when every law has finite support and the composite bound
/// `Π_g max-offspring` fits below `K`.  Otherwise a Chernoff bound
/// `min_x f_{0,n}(x)/x^K` over the quarter-exponential grid
/// `x = 1 + 2^{−t/4}`, `t = 0..=176` — dense enough to sit close to the
/// pole of near-geometric composites, where the bound is tightest.  Grid
/// points outside some law's domain of convergence are skipped; if none
/// is evaluable (pathological environments) the bound is infinite, which
/// conservatively fails truncation.
fn aliasing_tail_bound(laws: &[OffspringLaw], k: usize) -> f64 {
    if let Some(bound) = composite_support_bound(laws) {
        if bound < k as u64 {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for t in 0..=176 {
        let eps = 2.0f64.powf(-(t as f64) / 4.0);
        let Some(fx) = compose_real_checked(laws, 1.0 + eps) else {
            continue;
        };
        if fx <= 0.0 {
            continue;
        }
        let log_bound = fx.ln() - k as f64 * eps.ln_1p();
        best = best.min(log_bound.exp());
    }
    best
}

/// `Z_n ≤ Π_g max-offspring` when every generation has finite support.
fn composite_support_bound(laws: &[OffspringLaw]) -> Option<u64> {
    let mut bound: u64 = 1;
    for law in laws {
        bound = bound.saturating_mul(law.support_bound()?);
        if bound == u64::MAX {
            return None; // saturated: no useful information
        }
    }
    Some(bound)
}

/// Direct-convolution oracle for [`law_of_zn`]: forward random-sum
/// recursion `law(Z_g) = Σ_m P[Z_{g−1} = m]·q_g^{*m}`, truncated at `K`.
///
/// `O(K²·L)` per generation (L = offspring support cut at cumulative tail
/// `< 1e−18`) versus the DFT path's `O(K log K + Kn)` — kept as an
/// independent route, not a fast one.  `tail_mass` here is the literal
/// truncation deficit `1 − Σp`.
pub fn law_of_zn_conv(env: &Environment, n: u64, k: usize) -> Result<TruncatedPmf, ExactError> {
    law_of_zn_conv_with_tol(env, n, k, DEFAULT_TAIL_TOL)
}

/// [`law_of_zn_conv`] with an explicit tail tolerance.
pub fn law_of_zn_conv_with_tol(
    env: &Environment,
    n: u64,
    k: usize,
    tol: f64,
) -> Result<TruncatedPmf, ExactError> {
    assert!(k >= 1);
    let mut v = vec![0.0f64; k];
    if k >= 2 {
        v[1] = 1.0;
    }

    for g in 1..=n {
        let law = env.law_at(g)?;
        let q = offspring_prefix(&law, k);

        // Largest m carrying mass worth convolving for (suffix < 1e−19
        // contributes below the cross-check tolerance).
        let mut last = v.len();
        let mut suffix = 0.0;
        while last > 0 {
            suffix += v[last - 1];
            if suffix > 1e-19 {
                break;
            }
            last -= 1;
        }

        let mut w = vec![0.0f64; k];
        let mut power = vec![1.0f64]; // q^{*0} = δ_0
        w[0] += v[0] * power[0];
        for m in 1..last {
            power = convolve_truncated(&power, &q, k);
            let vm = v[m];
            if vm > 0.0 {
                for (j, &pj) in power.iter().enumerate() {
                    w[j] += vm * pj;
                }
            }
        }
        v = w;
    }

    let sum: f64 = v.iter().sum();
    let tail_mass = (1.0 - sum).max(0.0);
    let pmf = TruncatedPmf::new(v, tail_mass, Provenance::Convolution)?;
    if tail_mass > tol {
        return Err(ExactError::Truncation { tail_mass, tol });
    }
    Ok(pmf)
}

/// Offspring pmf cut where the cumulative tail drops below `1e−18`
/// (capped at `k` entries).
fn offspring_prefix(law: &OffspringLaw, k: usize) -> Vec<f64> {
    let cap = match law.support_bound() {
        Some(b) => ((b + 1) as usize).min(k),
        None => k,
    };
    let full = law.pmf_prefix(cap);
    let mut cum = 0.0;
    for (i, &p) in full.iter().enumerate() {
        cum += p;
        if 1.0 - cum < 1e-18 {
            return full[..=i].to_vec();
        }
    }
    full
}

fn convolve_truncated(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    let len = (a.len() + b.len() - 1).min(k);
    let mut out = vec![0.0f64; len];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 || i >= len {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let idx = i + j;
            if idx >= len {
                break;
            }
            out[idx] += ai * bj;
        }
    }
    out
}

/// Closed-form law of `Z_n` for environments that are linear-fractional
/// through generation `n`: compositions of linear-fractional pgfs stay
/// linear-fractional, so `Z_n` is a zero-inflated geometric with
///
/// ```text
/// P[Z_n > 0] = 1/(1/μ_n + ρ_{0,n}/2),   p̂_n = 2/(2 + μ_nρ_{0,n}),
/// P[Z_n = k] = P[Z_n > 0]·p̂_n(1−p̂_n)^{k−1}   (k ≥ 1),
/// ```
///
/// and `tail_mass` is the exact geometric tail.  `K` here may be any
/// positive integer.
pub fn law_of_zn_closed_form(
    env: &Environment,
    n: u64,
    k: usize,
) -> Result<TruncatedPmf, ExactError> {
    assert!(k >= 1);
    if !env.all_linear_fractional_upto(n) {
        return Err(ExactError::FamilyMismatch { n });
    }
    if n == 0 {
        let mut probs = vec![0.0; k.min(2)];
        if k >= 2 {
            probs[1] = 1.0;
        }
        let tail = if k >= 2 { 0.0 } else { 1.0 };
        return TruncatedPmf::new(probs, tail, Provenance::ClosedForm);
    }
    let track = moment_sequences(env, n)?;
    let survival = 1.0 / (1.0 / track.mu(n) + track.rho(n) / 2.0);
    let p_hat = 2.0 / (2.0 + track.mu_rho(n));

    let mut probs = Vec::with_capacity(k);
    probs.push(1.0 - survival);
    let mut geom = p_hat; // p̂(1−p̂)^{k−1} at k = 1
    for _ in 1..k {
        probs.push(survival * geom);
        geom *= 1.0 - p_hat;
    }
    // Σ_{j≥K} p̂(1−p̂)^{j−1} = (1−p̂)^{K−1}.
    let tail_mass = survival * (1.0 - p_hat).powi((k - 1) as i32);
    TruncatedPmf::new(probs, tail_mass, Provenance::ClosedForm)
}

// ── survival and conditioning ───────────────────────────────────────────

/// `P[Z^{(j)}_n > 0] = 1 − f_{j,n}(0)`: survival at generation `n` of a
/// process seeded with one particle at generation `j`.
///
/// Exactly `1` when `j = n`, and *bit-identical* to
/// `1 − compose_pgf(env, j, n, 0)` by construction — this is that
/// expression, not a reimplementation.
pub fn survival_prob(env: &Environment, j: u64, n: u64) -> Result<f64, EnvError> {
    let z = compose_pgf(env, j, n, Complex64::new(0.0, 0.0))?;
    Ok(1.0 - z.re)
}

/// Exact conditioned mean `b_n = E[Z_n | Z_n > 0] = μ_n / P[Z_n > 0]`,
/// from the ledger and the scalar survival probability — never from a
/// truncated pmf, so truncation cannot bias it.
pub fn b_n(env: &Environment, n: u64) -> Result<f64, ExactError> {
    if n == 0 {
        return Ok(1.0);
    }
    let track = moment_sequences(env, n)?;
    let survival = survival_prob(env, 0, n)?;
    if survival <= 1e-300 {
        return Err(ExactError::VanishingSurvival { survival });
    }
    let mu = track.mu(n);
    if (1e-300..=1e300).contains(&mu) {
        Ok(mu / survival)
    } else {
        Ok((track.log_mu(n) - survival.ln()).exp())
    }
}

/// Law of `Y_n = (Z_n | Z_n > 0)` (support `k ≥ 1`) together with its
/// exact mean `b_n`.
///
/// `P[Y_n = k] = P[Z_n = k]/P[Z_n > 0]`; the zero entry of the returned
/// pmf is exactly 0.  The pmf inherits [`law_of_zn`]'s provenance and its
/// tail scales by `1/P[Z_n > 0]`.
pub fn conditional_law(
    env: &Environment,
    n: u64,
    k: usize,
) -> Result<(TruncatedPmf, f64), ExactError> {
    conditional_law_with_tol(env, n, k, DEFAULT_TAIL_TOL)
}

/// [`conditional_law`] with an explicit tail tolerance for the underlying
/// law of `Z_n`.
pub fn conditional_law_with_tol(
    env: &Environment,
    n: u64,
    k: usize,
    tol: f64,
) -> Result<(TruncatedPmf, f64), ExactError> {
    let law = law_of_zn_with_tol(env, n, k, tol)?;
    if n == 0 {
        return Ok((law, 1.0));
    }
    let survival = survival_prob(env, 0, n)?;
    if survival <= 1e-300 {
        return Err(ExactError::VanishingSurvival { survival });
    }
    let mut probs = Vec::with_capacity(law.len());
    probs.push(0.0);
    for k_ in 1..law.len() {
        probs.push(law.prob(k_) / survival);
    }
    let tail_mass = law.tail_mass() / survival;
    let provenance = law.provenance().clone();
    let pmf = TruncatedPmf::new(probs, tail_mass, provenance)?;
    Ok((pmf, b_n(env, n)?))
}

/// [`conditional_law`] on the closed-form path for environments that are
/// linear-fractional through generation `n`.
///
/// `Y_n` is geometric with success probability `p̂_n = 2/(2 + μ_nρ_{0,n})`,
/// `tail_mass` is the analytic geometric tail `(1 − p̂_n)^{K−1}`, and the
/// conditioned mean collapses to `b_n = 1 + μ_nρ_{0,n}/2` exactly.  `K`
/// may be any positive integer.
pub fn conditional_law_closed_form(
    env: &Environment,
    n: u64,
    k: usize,
) -> Result<(TruncatedPmf, f64), ExactError> {
    assert!(k >= 1);
    if !env.all_linear_fractional_upto(n) {
        return Err(ExactError::FamilyMismatch { n });
    }
    if n == 0 {
        return Ok((law_of_zn_closed_form(env, 0, k)?, 1.0));
    }
    let track = moment_sequences(env, n)?;
    let p_hat = 2.0 / (2.0 + track.mu_rho(n));
    let mut probs = Vec::with_capacity(k);
    probs.push(0.0);
    let mut geom = p_hat; // p̂(1−p̂)^{k−1} at k = 1
    for _ in 1..k {
        probs.push(geom);
        geom *= 1.0 - p_hat;
    }
    let tail_mass = (1.0 - p_hat).powi((k - 1) as i32);
    let pmf = TruncatedPmf::new(probs, tail_mass, Provenance::ClosedForm)?;
    Ok((pmf, 1.0 + track.mu_rho(n) / 2.0))
}

// ── transforms ──────────────────────────────────────────────────────────

/// Size-biased law `ṗ[k] = k·p[k]/m`, `m = Σ k·p[k]`.
///
/// Size-biasing annihilates the zero atom, so the size-bias of a law and
/// of its zero-conditioned version coincide by construction — the formula
/// never reads `p[0]`.
///
/// The input tail must be below [`TRANSFORM_TAIL_CEILING`]; the output
/// `tail_mass` is the first-order estimate `K·tail/m` (each truncated atom
/// sits at `k ≥ K`, so this is the minimum weight the lost mass carries),
/// clamped to 1.
pub fn size_biased_law(pmf: &TruncatedPmf) -> Result<TruncatedPmf, ExactError> {
    if pmf.tail_mass() > TRANSFORM_TAIL_CEILING {
        return Err(ExactError::TailTooHeavy {
            tail_mass: pmf.tail_mass(),
        });
    }
    let m = pmf.mean();
    if m <= 0.0 {
        return Err(ExactError::ZeroMean);
    }
    let probs: Vec<f64> = pmf
        .probs()
        .iter()
        .enumerate()
        .map(|(k, &p)| k as f64 * p / m)
        .collect();
    let tail_mass = (pmf.len() as f64 * pmf.tail_mass() / m).min(1.0);
    TruncatedPmf::new(probs, tail_mass, pmf.provenance().clone())
}

/// The equilibrium CDF `F^e(x) = (1/m)∫_0^x P[X > t] dt` of an
/// integer-valued law: piecewise linear with knots at the integers, and
/// the distribution of `U·Ẋ` (`U` uniform on `[0,1]`, `Ẋ` size-biased,
/// independent).
///
/// Built once, evaluated many times.  The truncated vector is treated as
/// the whole law (input tail must be below [`TRANSFORM_TAIL_CEILING`]);
/// the normalizing mean is the exact integral `Σ_j P[X > j]` of the
/// stored survival staircase, making `F^e(K) = 1` exactly.
#[derive(Debug, Clone)]
pub struct EquilibriumCdf {
    /// `survival[j] = P[X > j]`, `j = 0..K`.
    survival: Vec<f64>,
    /// `cum[j] = ∫_0^j P[X > t] dt`; `cum[K]` is the mean.
    cum: Vec<f64>,
}

impl EquilibriumCdf {
    pub fn new(pmf: &TruncatedPmf) -> Result<Self, ExactError> {
        if pmf.tail_mass() > TRANSFORM_TAIL_CEILING {
            return Err(ExactError::TailTooHeavy {
                tail_mass: pmf.tail_mass(),
            });
        }
        let k = pmf.len();
        // Backward accumulation keeps small survival values exact instead
        // of computing 1 − (large prefix).
        let mut survival = vec![0.0f64; k];
        let mut acc = 0.0;
        for j in (0..k).rev() {
            if j + 1 < k {
                acc += pmf.prob(j + 1);
            }
            survival[j] = acc;
        }
        let mut cum = Vec::with_capacity(k + 1);
        cum.push(0.0);
        for j in 0..k {
            let prev = cum[j];
            cum.push(prev + survival[j]);
        }
        if !(cum[k] > 0.0) {
            return Err(ExactError::ZeroMean);
        }
        Ok(Self { survival, cum })
    }

    /// The normalizing mean `Σ_j P[X > j]`.
    pub fn mean(&self) -> f64 {
        self.cum[self.survival.len()]
    }

    /// `F^e(x)`; 0 for `x ≤ 0`, exactly 1 for `x ≥ K`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let k = self.survival.len();
        if x >= k as f64 {
            return 1.0;
        }
        let j = x as usize; // floor for x ≥ 0
        (self.cum[j] + (x - j as f64) * self.survival[j]) / self.mean()
    }
}

/// One-shot `F^e(x)`; build an [`EquilibriumCdf`] for repeated evaluation.
pub fn equilibrium_cdf(pmf: &TruncatedPmf, x: f64) -> Result<f64, ExactError> {
    Ok(EquilibriumCdf::new(pmf)?.eval(x))
}

// ── shape functions ─────────────────────────────────────────────────────

/// The shape function of one law at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEval {
    pub s: f64,
    /// `φ(s) ≥ 0`; round-off negatives are clipped to zero.
    pub value: f64,
}

/// `φ(s) = 1/(1−f(s)) − 1/(f'(1)(1−s))`, extended by its limit
/// `φ(1) = f''(1)/(2f'(1)²)` for `1 − s <` [`SHAPE_LIMIT_THRESHOLD`]
/// (the raw formula loses all precision to cancellation there).
pub fn shape_function(law: &OffspringLaw, s: f64) -> Result<ShapeEval, ExactError> {
    assert!((0.0..=1.0).contains(&s), "shape function needs s in [0, 1]");
    let m = law.moments();
    if 1.0 - s < SHAPE_LIMIT_THRESHOLD {
        return Ok(ShapeEval {
            s,
            value: m.f2 / (2.0 * m.f1 * m.f1),
        });
    }
    let fs = law.pgf_real(s);
    if fs >= 1.0 {
        // Unreachable for validated laws (mean > 0 forces f(s) < 1 on
        // [0, 1)); kept as a guard for hand-built degenerate inputs.
        return Err(ExactError::DegenerateLaw);
    }
    let value = 1.0 / (1.0 - fs) - 1.0 / (m.f1 * (1.0 - s));
    Ok(ShapeEval {
        s,
        value: value.max(0.0),
    })
}

/// Shape function of the composite `f_{k,n}` by the telescoping sum
/// `φ_{k,n}(s) = μ_k Σ_{l=k}^{n−1} φ_{l+1}(f_{l+1,n}(s)) / μ_l`,
/// accumulating the inner compositions backward so each generation's pgf
/// is evaluated once.
///
/// As `s → 1` every summand tends to `ν_{l+1}/2`, so
/// `φ_{0,n} → ρ_{0,n}/2` — the ledger cross-check.
pub fn composed_shape(env: &Environment, k: u64, n: u64, s: f64) -> Result<f64, ExactError> {
    assert!(k < n, "composed shape needs k < n");
    assert!((0.0..1.0).contains(&s), "composed shape needs s in [0, 1)");
    let track = moment_sequences(env, n)?;
    let mut t = s; // f_{l+1,n}(s), starting at f_{n,n}(s) = s
    let mut sum = 0.0;
    for l in (k..n).rev() {
        let law = env.law_at(l + 1)?;
        let phi = shape_function(&law, t)?.value;
        sum += phi * mu_ratio(&track, k, l);
        if l > k {
            t = law.pgf_real(t);
        }
    }
    Ok(sum)
}

/// The defining expression `1/(1−f_{k,n}(s)) − μ_k/(μ_n(1−s))`, as an
/// independent cross-check of [`composed_shape`] (different algebraic
/// route, shared pgf evaluations only at the law level).
pub fn composed_shape_direct(
    env: &Environment,
    k: u64,
    n: u64,
    s: f64,
) -> Result<f64, ExactError> {
    assert!(k < n);
    assert!((0.0..1.0).contains(&s));
    let track = moment_sequences(env, n)?;
    let laws = env.laws_upto(n)?;
    let fkn = compose_real(&laws[k as usize..], s);
    Ok(1.0 / (1.0 - fkn) - mu_ratio(&track, k, n) / (1.0 - s))
}

/// `μ_a/μ_b` through log space when either endpoint left the plain range.
fn mu_ratio(track: &MomentTrack, a: u64, b: u64) -> f64 {
    let (ma, mb) = (track.mu(a), track.mu(b));
    if (1e-300..=1e300).contains(&ma) && (1e-300..=1e300).contains(&mb) {
        ma / mb
    } else {
        (track.log_mu(a) - track.log_mu(b)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{
        lf_constant_env, poisson_increasing_env, poisson_sqrt_decay_env, symmetric_power_env,
        Environment,
    };
    use proptest::prelude::*;

    fn lf_half(h: u64) -> Environment {
        lf_constant_env(0.5, 0.5, h).unwrap()
    }

    /// Total variation over the truncated supports (tails excluded).
    fn tv(a: &TruncatedPmf, b: &TruncatedPmf) -> f64 {
        let len = a.len().max(b.len());
        0.5 * (0..len).map(|k| (a.prob(k) - b.prob(k)).abs()).sum::<f64>()
    }

    #[test]
    fn composition_endpoints() {
        let env = poisson_increasing_env(10);
        let s = Complex64::new(0.3, 0.0);
        assert_eq!(compose_pgf(&env, 4, 4, s).unwrap(), s);

        // Constant linear-fractional a=p=1/2: f_{0,n}(0) = n/(n+1).
        let env = lf_half(10);
        let z = compose_pgf(&env, 0, 4, Complex64::new(0.0, 0.0)).unwrap();
        assert!((z.re - 0.8).abs() < 1e-12 && z.im.abs() < 1e-15);

        let one = Complex64::new(1.0, 0.0);
        let z = compose_pgf(&env, 0, 7, one).unwrap();
        assert!((z - one).norm() < 1e-12);
    }

    #[test]
    fn dft_law_matches_enumeration() {
        // One symmetric δ=1 generation: {0: 1/2, 2: 1/2}.
        let env = symmetric_power_env(1.0, 4);
        let law = law_of_zn(&env, 1, 8).unwrap();
        assert!((law.prob(0) - 0.5).abs() < 1e-12);
        assert!(law.prob(1).abs() < 1e-12);
        assert!((law.prob(2) - 0.5).abs() < 1e-12);

        // Two generations, against exact-rational tree enumeration.
        let law = law_of_zn(&env, 2, 8).unwrap();
        let enumerated = [0.53125, 0.125, 0.1875, 0.125, 0.03125];
        for (k, &want) in enumerated.iter().enumerate() {
            assert!((law.prob(k) - want).abs() < 1e-12, "k={k}");
        }
        assert!(law.tail_mass() < 1e-12);

        // n = 0 is the point mass at 1.
        let law = law_of_zn(&env, 0, 4).unwrap();
        assert!((law.prob(1) - 1.0).abs() < 1e-12);
        assert!(law.prob(0).abs() < 1e-12);
    }

    #[test]
    fn dft_law_matches_closed_form() {
        // K = 128 keeps the true tail (≈ (2/3)^127) far below the 1e-12
        // comparison: the transform folds tail mass onto low indices, so a
        // short window would shift TV by half the tail itself.
        let env = lf_half(8);
        let dft = law_of_zn(&env, 2, 128).unwrap();
        let closed = law_of_zn_closed_form(&env, 2, 128).unwrap();
        assert!((dft.prob(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((dft.prob(1) - 1.0 / 9.0).abs() < 1e-12);
        assert!((dft.prob(2) - 2.0 / 27.0).abs() < 1e-12);
        assert!(tv(&dft, &closed) < 1e-12);
        assert!(matches!(closed.provenance(), Provenance::ClosedForm));

        // Closed-form path rejects other families.
        assert!(matches!(
            law_of_zn_closed_form(&poisson_increasing_env(4), 2, 16),
            Err(ExactError::FamilyMismatch { n: 2 })
        ));
    }

    #[test]
    fn truncation_error_when_k_too_small() {
        // E[Z_200 | Z_200 > 0] = 201: K = 16 cannot hold the law.
        let env = lf_half(256);
        match law_of_zn(&env, 200, 16) {
            Err(ExactError::Truncation { tail_mass, .. }) => assert!(tail_mass > 1e-3),
            other => panic!("expected truncation failure, got {other:?}"),
        }
        assert!(matches!(
            law_of_zn(&env, 2, 24),
            Err(ExactError::InvalidK { k: 24 })
        ));
    }

    #[test]
    fn survival_values() {
        let env = lf_half(16);
        assert_eq!(survival_prob(&env, 7, 7).unwrap(), 1.0);
        assert!((survival_prob(&env, 0, 9).unwrap() - 0.1).abs() < 1e-12);

        let det = Environment::constant(crate::env::OffspringLaw::delta_one(), 8);
        assert_eq!(survival_prob(&det, 2, 8).unwrap(), 1.0);
    }

    #[test]
    fn conditional_law_is_geometric_for_lf() {
        let env = lf_half(8);
        let (y, b4) = conditional_law(&env, 4, 256).unwrap();
        assert!((b4 - 5.0).abs() < 1e-12);
        assert_eq!(y.prob(0), 0.0);
        // p̂_4 = 2/(2+8) = 1/5.
        let p_hat = 0.2f64;
        for k in 1..30 {
            let want = p_hat * (1.0 - p_hat).powi(k - 1);
            assert!((y.prob(k as usize) - want).abs() < 1e-12, "k={k}");
        }

        let (y0, b0) = conditional_law(&env, 0, 8).unwrap();
        assert_eq!(b0, 1.0);
        assert!((y0.prob(1) - 1.0).abs() < 1e-12);

        assert!((b_n(&env, 4).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn size_bias_hand_values() {
        let uniform12 =
            TruncatedPmf::new(vec![0.0, 0.5, 0.5], 0.0, Provenance::ClosedForm).unwrap();
        let dot = size_biased_law(&uniform12).unwrap();
        assert!((dot.prob(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((dot.prob(2) - 2.0 / 3.0).abs() < 1e-15);

        let delta1 = TruncatedPmf::new(vec![0.0, 1.0], 0.0, Provenance::ClosedForm).unwrap();
        let dot = size_biased_law(&delta1).unwrap();
        assert_eq!(dot.prob(1), 1.0);

        // Only the positive atom survives.
        let mut probs = vec![0.0; 11];
        probs[0] = 0.9;
        probs[10] = 0.1;
        let spiky = TruncatedPmf::new(probs, 0.0, Provenance::ClosedForm).unwrap();
        let dot = size_biased_law(&spiky).unwrap();
        assert!((dot.prob(10) - 1.0).abs() < 1e-15);
        assert_eq!(dot.prob(0), 0.0);

        let zero = TruncatedPmf::new(vec![1.0], 0.0, Provenance::ClosedForm).unwrap();
        assert!(matches!(size_biased_law(&zero), Err(ExactError::ZeroMean)));
    }

    #[test]
    fn size_bias_commutes_with_zero_conditioning() {
        let env = lf_half(8);
        let z = law_of_zn(&env, 3, 128).unwrap();
        let (y, _) = conditional_law(&env, 3, 128).unwrap();
        let a = size_biased_law(&z).unwrap();
        let b = size_biased_law(&y).unwrap();
        assert!(tv(&a, &b) < 1e-13);
    }

    #[test]
    fn closed_form_conditional_matches_dft_path() {
        let env = lf_half(8);
        let (dft, b_dft) = conditional_law(&env, 6, 256).unwrap();
        let (cf, b_cf) = conditional_law_closed_form(&env, 6, 256).unwrap();
        assert!(tv(&dft, &cf) < 1e-12);
        assert!((b_dft - b_cf).abs() < 1e-10 * b_cf);
        // b_n = 1 + μ_nρ_{0,n}/2 = 1 + 6 and p̂ = 2/14; the tail is the
        // analytic geometric remainder (1−p̂)^{K−1}.
        assert_eq!(b_cf, 7.0);
        let want_tail = (12.0f64 / 14.0).powi(255);
        assert!((cf.tail_mass() - want_tail).abs() < 1e-12 * want_tail);
        assert_eq!(cf.prob(0), 0.0);

        // Degenerate truncations carry all mass in the tail.
        let (tiny, _) = conditional_law_closed_form(&env, 6, 1).unwrap();
        assert_eq!(tiny.tail_mass(), 1.0);

        // n = 0 conditions on nothing: δ_1 with unit mean.
        let (zero, b0) = conditional_law_closed_form(&env, 0, 8).unwrap();
        assert_eq!(b0, 1.0);
        assert_eq!(zero.prob(1), 1.0);

        // Family guard: a non-linear-fractional generation refuses.
        let sym = symmetric_power_env(0.5, 8);
        assert!(matches!(
            conditional_law_closed_form(&sym, 3, 64),
            Err(ExactError::FamilyMismatch { n: 3 })
        ));
    }

    #[test]
    fn conditional_tolerance_is_forwarded() {
        let env = lf_half(8);
        // K = 32 at n = 6 leaves a visible geometric tail: the default
        // tolerance rejects it, a loose one accepts it.
        assert!(matches!(
            conditional_law_with_tol(&env, 6, 32, 1e-8),
            Err(ExactError::Truncation { .. })
        ));
        let (law, b) = conditional_law_with_tol(&env, 6, 32, 0.5).unwrap();
        assert_eq!(law.prob(0), 0.0);
        assert!((b - 7.0).abs() < 1e-10);
    }

    #[test]
    fn equilibrium_hand_values() {
        let delta1 = TruncatedPmf::new(vec![0.0, 1.0], 0.0, Provenance::ClosedForm).unwrap();
        // Equilibrium of δ_1 is Uniform[0, 1].
        assert!((equilibrium_cdf(&delta1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(equilibrium_cdf(&delta1, 0.0).unwrap(), 0.0);
        assert_eq!(equilibrium_cdf(&delta1, 2.0).unwrap(), 1.0);

        let uniform12 =
            TruncatedPmf::new(vec![0.0, 0.5, 0.5], 0.0, Provenance::ClosedForm).unwrap();
        let cdf = EquilibriumCdf::new(&uniform12).unwrap();
        assert!((cdf.eval(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cdf.mean() - 1.5).abs() < 1e-15);
        assert_eq!(cdf.eval(2.0), 1.0);
    }

    #[test]
    fn shape_function_hand_values() {
        // f(s) = s²: φ(s) = 1/(2(1+s)).
        let two = crate::env::OffspringLaw::explicit(vec![0.0, 0.0, 1.0]).unwrap();
        assert!((shape_function(&two, 0.0).unwrap().value - 0.5).abs() < 1e-15);
        assert!((shape_function(&two, 1.0).unwrap().value - 0.25).abs() < 1e-15);

        let poisson1 = crate::env::OffspringLaw::poisson(1.0).unwrap();
        assert!((shape_function(&poisson1, 1.0).unwrap().value - 0.5).abs() < 1e-15);

        // δ_1 has φ ≡ 0 (exact cancellation, not degeneracy).
        let d1 = crate::env::OffspringLaw::delta_one();
        assert_eq!(shape_function(&d1, 0.3).unwrap().value, 0.0);
    }

    #[test]
    fn composed_shape_hand_values() {
        let env = lf_half(8);
        // Direct: 1/(1 − f_{0,3}(0)) − μ_0/(μ_3·1) = 4 − 1 = 3.
        let sum = composed_shape(&env, 0, 3, 0.0).unwrap();
        let direct = composed_shape_direct(&env, 0, 3, 0.0).unwrap();
        assert!((sum - 3.0).abs() < 1e-12);
        assert!((direct - 3.0).abs() < 1e-12);

        // Single-term case k = n−1: the sum is φ_n(s) itself.
        let env = poisson_increasing_env(4);
        let law1 = env.law_at(1).unwrap();
        let phi = shape_function(&law1, 0.4).unwrap().value;
        assert!((composed_shape(&env, 0, 1, 0.4).unwrap() - phi).abs() < 1e-15);
    }

    #[test]
    fn composed_shape_limit_matches_ledger() {
        // φ_{0,n}(s) → ρ_{0,n}/2 as s → 1.
        for env in [
            lf_half(12),
            poisson_increasing_env(12),
            symmetric_power_env(0.5, 12),
        ] {
            let track = moment_sequences(&env, 12).unwrap();
            let phi = composed_shape(&env, 0, 12, 1.0 - 1e-9).unwrap();
            let want = track.rho(12) / 2.0;
            assert!(
                (phi - want).abs() < 1e-6 * want.max(1.0),
                "{env:?}: {phi} vs {want}"
            );
        }
    }

    proptest! {
        /// DFT path and convolution oracle agree to TV < 1e−10 across the
        /// built-in families (small sizes here; the full sweep is in the
        /// acceptance suite).
        #[test]
        fn dft_matches_convolution(pick in 0usize..4, n in 0u64..8) {
            let env = match pick {
                0 => symmetric_power_env(1.0, 8),
                1 => symmetric_power_env(0.5, 8),
                2 => poisson_increasing_env(8),
                _ => lf_half(8),
            };
            let k = 256;
            let dft = law_of_zn_with_tol(&env, n, k, 1.0).unwrap();
            let conv = law_of_zn_conv_with_tol(&env, n, k, 1.0).unwrap();
            prop_assert!(tv(&dft, &conv) < 1e-10, "{env:?} n={n}");
        }

        /// Truncated moments reproduce the ledger: mean vs μ_n and second
        /// factorial moment vs ρ_{0,n}μ_n², up to truncation displacement.
        #[test]
        fn law_moments_match_ledger(pick in 0usize..3, n in 1u64..10) {
            let env = match pick {
                0 => symmetric_power_env(0.5, 10),
                1 => poisson_increasing_env(10),
                _ => lf_half(10),
            };
            let k = 1024;
            let law = law_of_zn(&env, n, k).unwrap();
            let track = moment_sequences(&env, n).unwrap();
            let tail = law.tail_mass();
            let mu = track.mu(n);
            prop_assert!((law.mean() - mu).abs() <= 1e-8 * mu + tail * k as f64);
            let second = track.rho(n) * mu * mu;
            prop_assert!(
                (law.second_factorial() - second).abs()
                    <= 1e-8 * second + tail * (k * k) as f64
            );
        }

        /// The classical two-sided envelope φ(1) ≤ φ(s) ≤ 2·φ(1) on a grid
        /// (tight at s = 1, and at s = 0 for f(s) = p₀ + p_d·s^d), plus
        /// φ(0) > 0 exactly when f''(1) > 0.  Note φ(s) ≤ φ(1) alone is
        /// false: f(s) = (1 + s²)/2 has φ(s) = 1/(1 + s), so φ(0) = 2φ(1).
        #[test]
        fn shape_bounded_by_limit(pick in 0usize..4, step in 0u64..11) {
            let law = match pick {
                0 => crate::env::OffspringLaw::poisson(1.3).unwrap(),
                1 => crate::env::OffspringLaw::linear_fractional(0.7, 0.4).unwrap(),
                2 => crate::env::OffspringLaw::symmetric(0.6).unwrap(),
                _ => crate::env::OffspringLaw::explicit(
                        alloc::vec![0.2, 0.3, 0.1, 0.4]).unwrap(),
            };
            let s = step as f64 / 10.0;
            let phi = shape_function(&law, s).unwrap().value;
            let phi1 = shape_function(&law, 1.0).unwrap().value;
            prop_assert!(
                phi <= 2.0 * phi1 + 1e-12,
                "{law:?}: φ({s}) = {phi} > 2·φ(1) = {}",
                2.0 * phi1
            );
            prop_assert!(
                phi >= phi1 * (1.0 - 1e-9) - 1e-15,
                "{law:?}: φ({s}) = {phi} < φ(1) = {phi1}"
            );
            if law.moments().f2 > 0.0 {
                prop_assert!(shape_function(&law, 0.0).unwrap().value > 0.0);
            }
        }

        /// Sum formula vs direct definition of the composed shape.
        #[test]
        fn composed_shape_routes_agree(
            pick in 0usize..4,
            k in 0u64..49,
            n in 1u64..50,
            s in 0.0f64..0.95,
        ) {
            prop_assume!(k < n);
            let env = match pick {
                0 => symmetric_power_env(0.5, 50),
                1 => poisson_increasing_env(50),
                2 => poisson_sqrt_decay_env(50),
                _ => lf_half(50),
            };
            let a = composed_shape(&env, k, n, s).unwrap();
            let b = composed_shape_direct(&env, k, n, s).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }

        /// survival_prob is literally 1 − compose_pgf(·, 0): same bits.
        #[test]
        fn survival_is_compose_at_zero(pick in 0usize..3, j in 0u64..12, n in 0u64..12) {
            prop_assume!(j <= n);
            let env = match pick {
                0 => symmetric_power_env(0.5, 12),
                1 => poisson_increasing_env(12),
                _ => lf_half(12),
            };
            let s = survival_prob(&env, j, n).unwrap();
            let z = compose_pgf(&env, j, n, Complex64::new(0.0, 0.0)).unwrap();
            prop_assert_eq!(s.to_bits(), (1.0 - z.re).to_bits());
        }
    }

    #[test]
    fn dft_tail_bound_is_honest() {
        // The Chernoff aliasing bound must dominate the true truncated mass:
        // compare against the closed-form geometric tail.
        let env = lf_half(64);
        for (n, k) in [(10u64, 256usize), (20, 512), (50, 4096)] {
            let dft = law_of_zn(&env, n, k).unwrap();
            let closed = law_of_zn_closed_form(&env, n, k).unwrap();
            assert!(
                dft.tail_mass() >= closed.tail_mass() * (1.0 - 1e-9),
                "n={n} K={k}: {} < {}",
                dft.tail_mass(),
                closed.tail_mass()
            );
        }
    }

    #[test]
    fn poisson_family_lacks_closed_form_but_conv_agrees_deeply() {
        // Deeper convolution cross-check on a family with unbounded support.
        let env = poisson_sqrt_decay_env(6);
        let dft = law_of_zn(&env, 6, 256).unwrap();
        let conv = law_of_zn_conv(&env, 6, 256).unwrap();
        assert!(tv(&dft, &conv) < 1e-10);
        if let Provenance::Dft { max_clip } = dft.provenance() {
            assert!(*max_clip <= 1e-12);
        } else {
            panic!("wrong provenance");
        }
    }
}
