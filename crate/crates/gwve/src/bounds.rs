//! Moment ledger and explicit convergence-rate bound shapes.
//!
//! For an environment `q_1, q_2, …` with per-generation factorial moments
//! `f_n'(1), f_n''(1), f_n'''(1)`, the ledger tracks
//!
//! ```text
//! μ_0 = 1,   μ_n = f_1'(1)⋯f_n'(1)            (cumulative mean)
//! ν_n = f_n''(1)/f_n'(1)²                      (normalized second factorial moment)
//! ρ_{0,n} = Σ_{k=0}^{n−1} ν_{k+1}/μ_k          (accumulated reproductive variance)
//! 𝔐_n = sup_{1≤k≤n} f_k'(1)
//! ```
//!
//! and from it the explicit rate quantities
//!
//! ```text
//! r_n = Σ_{j=1}^{n−1} (ν_j/μ_{j−1})(1+f_j'(1)) / (μ_j(ρ_{0,n}−ρ_{0,j}))
//!       + (ν_n/μ_{n−1})(1+f_n'(1))                                   (n ≥ 2)
//! s_n = Σ_{k=2}^{n−1} (log(ρ_{0,k}μ_k) + log f_k'(1))·|1/μ_{k−2} − 1/μ_k|   (n ≥ 3)
//! ```
//!
//! plus four bound *shapes* for the Wasserstein distance between the scaled
//! conditioned population and the standard exponential.  Their unknown
//! multiplicative constants are fixed to 1 — reports are about growth rates,
//! not absolute domination — except for the linear-fractional family, whose
//! bound `4/(2+μ_nρ_{0,n})` is exact with the constant included.
//!
//! `s_n` terms are computed exactly as written, including log factors that
//! can be negative for ledgers with `ρ_{0,k}μ_k f_k'(1) < 1`; monotonicity
//! of `s_n` is only guaranteed (and only tested) when that product stays
//! at or above 1.
//!
//! Numerics: `μ` and `ρ` are accumulated both in plain double precision and
//! in log space (log-sum-exp for `ρ`).  Quantities switch to the log-space
//! representation when the plain one leaves `[1e−300, 1e300]`, so products
//! like `μ_nρ_{0,n}` stay meaningful for environments that drive `μ_n`
//! toward the double-precision floor.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
// f64 math in no_std; shadowed by std's inherent methods under cfg(test).
#[allow(unused_imports)]
use num_traits::Float;

use crate::env::{EnvError, Environment};

/// Plain-f64 comfort zone; outside it, ledger math goes through logs.
const PLAIN_RANGE: core::ops::RangeInclusive<f64> = 1e-300..=1e300;

/// Default floor under which the five-factor shape's hypothesis
/// `inf_n f_n''(1) > 0` is flagged as failing.
pub const DEFAULT_F2_FLOOR: f64 = 1e-6;

// ── errors ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsError {
    Env(EnvError),
    /// `ρ_{0,n} = ρ_{0,j}` while the `j`-th summand of `r_n` is nonzero.
    DivisionByZero { n: u64, j: u64 },
    /// `μ_nρ_{0,n} ≤ 0`, outside the domain of the logarithmic shapes.
    Domain { n: u64, mu_rho: f64 },
    /// The exact closed-form bound applies only to linear-fractional laws.
    FamilyMismatch { n: u64 },
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::Env(e) => write!(f, "environment: {e}"),
            BoundsError::DivisionByZero { n, j } => write!(
                f,
                "r_{n} is undefined: rho gap to generation {j} vanishes under nonzero mass"
            ),
            BoundsError::Domain { n, mu_rho } => {
                write!(f, "mu_{n}·rho_{{0,{n}}} = {mu_rho} is outside (0, ∞)")
            }
            BoundsError::FamilyMismatch { n } => write!(
                f,
                "exact bound requires linear-fractional laws through generation {n}"
            ),
        }
    }
}

impl core::error::Error for BoundsError {}

impl From<EnvError> for BoundsError {
    fn from(e: EnvError) -> Self {
        BoundsError::Env(e)
    }
}

// ── the ledger ──────────────────────────────────────────────────────────

/// Immutable moment ledger over generations `1..=horizon`.
///
/// Built once by [`moment_sequences`], then freely shareable: every accessor
/// is pure.  Per-generation vectors (`f1`, `nu`, `mmax`) are indexed by
/// `n ∈ [1, horizon]`; cumulative vectors (`mu`, `rho`) also carry the
/// `n = 0` base entries `μ_0 = 1`, `ρ_{0,0} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrack {
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    nu: Vec<f64>,
    mmax: Vec<f64>,
    mu: Vec<f64>,
    log_mu: Vec<f64>,
    rho: Vec<f64>,
    log_rho: Vec<f64>,
}

impl MomentTrack {
    pub fn horizon(&self) -> u64 {
        self.f1.len() as u64
    }

    /// `f_n'(1)`, `n ≥ 1`.
    pub fn f1(&self, n: u64) -> f64 {
        self.f1[(n - 1) as usize]
    }

    /// `f_n''(1)`, `n ≥ 1`.
    pub fn f2(&self, n: u64) -> f64 {
        self.f2[(n - 1) as usize]
    }

    /// `f_n'''(1)`, `n ≥ 1`.
    pub fn f3(&self, n: u64) -> f64 {
        self.f3[(n - 1) as usize]
    }

    /// `ν_n = f_n''(1)/f_n'(1)²`, `n ≥ 1`.
    pub fn nu(&self, n: u64) -> f64 {
        self.nu[(n - 1) as usize]
    }

    /// `𝔐_n = sup_{1≤k≤n} f_k'(1)`, `n ≥ 1`.
    pub fn mmax(&self, n: u64) -> f64 {
        self.mmax[(n - 1) as usize]
    }

    /// `μ_n` in plain double precision (`μ_0 = 1`).  May round to `0` or
    /// `∞` on extreme horizons; [`MomentTrack::log_mu`] stays reliable.
    pub fn mu(&self, n: u64) -> f64 {
        self.mu[n as usize]
    }

    /// `log μ_n`, accumulated term by term; always finite.
    pub fn log_mu(&self, n: u64) -> f64 {
        self.log_mu[n as usize]
    }

    /// `ρ_{0,n}` in plain double precision (`ρ_{0,0} = 0`).
    pub fn rho(&self, n: u64) -> f64 {
        self.rho[n as usize]
    }

    /// `log ρ_{0,n}` via log-sum-exp; `−∞` exactly when `ρ_{0,n} = 0`.
    pub fn log_rho(&self, n: u64) -> f64 {
        self.log_rho[n as usize]
    }

    /// `μ_n·ρ_{0,n}`, rescued through log space when the plain product
    /// degenerates to `0·∞` or saturates spuriously.
    pub fn mu_rho(&self, n: u64) -> f64 {
        let plain = self.mu(n) * self.rho(n);
        let log_val = self.log_mu(n) + self.log_rho(n);
        if plain.is_nan()
            || (plain == 0.0 && log_val > f64::MIN_POSITIVE.ln())
            || (plain.is_infinite() && log_val < f64::MAX.ln())
        {
            log_val.exp()
        } else {
            plain
        }
    }

    /// `log(μ_nρ_{0,n})`, exact even when the plain product is out of range.
    pub fn log_mu_rho(&self, n: u64) -> f64 {
        self.log_mu(n) + self.log_rho(n)
    }

    /// `x/μ_idx` with a log-space detour when `μ_idx` left the plain range.
    fn over_mu(&self, x: f64, idx: u64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let m = self.mu(idx);
        if PLAIN_RANGE.contains(&m) {
            x / m
        } else {
            x * (-self.log_mu(idx)).exp()
        }
    }

    /// `1/μ_idx`, same convention.
    fn inv_mu(&self, idx: u64) -> f64 {
        self.over_mu(1.0, idx)
    }
}

/// Builds the moment ledger for generations `1..=horizon` by the exact
/// recursions `μ_n = μ_{n−1}f_n'(1)` and `ρ_{0,n} = ρ_{0,n−1} + ν_n/μ_{n−1}`.
pub fn moment_sequences(env: &Environment, horizon: u64) -> Result<MomentTrack, EnvError> {
    assert!(horizon >= 1, "ledger needs at least one generation");
    let n = horizon as usize;
    let mut track = MomentTrack {
        f1: Vec::with_capacity(n),
        f2: Vec::with_capacity(n),
        f3: Vec::with_capacity(n),
        nu: Vec::with_capacity(n),
        mmax: Vec::with_capacity(n),
        mu: Vec::with_capacity(n + 1),
        log_mu: Vec::with_capacity(n + 1),
        rho: Vec::with_capacity(n + 1),
        log_rho: Vec::with_capacity(n + 1),
    };
    track.mu.push(1.0);
    track.log_mu.push(0.0);
    track.rho.push(0.0);
    track.log_rho.push(f64::NEG_INFINITY);

    for g in 1..=horizon {
        let m = env.law_at(g)?.moments();
        let nu = m.f2 / (m.f1 * m.f1);
        let mu_prev = track.mu[(g - 1) as usize];
        let log_mu_prev = track.log_mu[(g - 1) as usize];

        let term = if nu == 0.0 {
            0.0
        } else if PLAIN_RANGE.contains(&mu_prev) {
            nu / mu_prev
        } else {
            (nu.ln() - log_mu_prev).exp()
        };
        let log_term = if nu == 0.0 {
            f64::NEG_INFINITY
        } else {
            nu.ln() - log_mu_prev
        };

        track.f1.push(m.f1);
        track.f2.push(m.f2);
        track.f3.push(m.f3);
        track.nu.push(nu);
        track
            .mmax
            .push(track.mmax.last().copied().unwrap_or(0.0).max(m.f1));
        track.mu.push(mu_prev * m.f1);
        track.log_mu.push(log_mu_prev + m.f1.ln());
        track.rho.push(track.rho[(g - 1) as usize] + term);
        track
            .log_rho
            .push(log_sum_exp(track.log_rho[(g - 1) as usize], log_term));
    }
    Ok(track)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

// ── rate quantities ─────────────────────────────────────────────────────

/// `r_n` by direct summation, `2 ≤ n ≤ horizon`.  Errors when a gap
/// `ρ_{0,n} − ρ_{0,j}` vanishes under a nonzero numerator (possible only
/// when `ν_{j+1..n}` are all zero).
pub fn rn(track: &MomentTrack, n: u64) -> Result<f64, BoundsError> {
    assert!((2..=track.horizon()).contains(&n), "r_n needs 2 <= n <= horizon");
    let rho_n = track.rho(n);
    let mut sum = 0.0;
    for j in 1..n {
        let numerator = track.over_mu(track.nu(j), j - 1) * (1.0 + track.f1(j));
        if numerator == 0.0 {
            continue;
        }
        let gap = rho_n - track.rho(j);
        if gap <= 0.0 {
            return Err(BoundsError::DivisionByZero { n, j });
        }
        sum += track.over_mu(numerator, j) / gap;
    }
    Ok(sum + track.over_mu(track.nu(n), n - 1) * (1.0 + track.f1(n)))
}

/// `r_2..r_{n_max}` in one pass; element `i` holds `r_{i+2}`.
/// O(n_max²) total, matching the direct sum term for term.
pub fn rn_all(track: &MomentTrack, n_max: u64) -> Result<Vec<f64>, BoundsError> {
    (2..=n_max).map(|n| rn(track, n)).collect()
}

/// `s_n` by direct summation; `s_1 = s_2 = 0` by convention (the defining
/// sum is empty below `n = 3`).  Errors when some `ρ_{0,k}μ_k ≤ 0`.
pub fn sn(track: &MomentTrack, n: u64) -> Result<f64, BoundsError> {
    assert!((1..=track.horizon()).contains(&n), "s_n needs 1 <= n <= horizon");
    let mut sum = 0.0;
    for k in 2..n {
        sum += sn_term(track, k)?;
    }
    Ok(sum)
}

/// `s_1..s_{n_max}` by the incremental update `s_{n+1} = s_n + term(n)`;
/// element `i` holds `s_{i+1}`.
pub fn sn_all(track: &MomentTrack, n_max: u64) -> Result<Vec<f64>, BoundsError> {
    assert!((1..=track.horizon()).contains(&n_max));
    let mut out = Vec::with_capacity(n_max as usize);
    let mut acc = 0.0;
    for n in 1..=n_max {
        if n >= 3 {
            acc += sn_term(track, n - 1)?;
        }
        out.push(acc);
    }
    Ok(out)
}

fn sn_term(track: &MomentTrack, k: u64) -> Result<f64, BoundsError> {
    let mu_rho = track.mu_rho(k);
    if !(mu_rho > 0.0) {
        return Err(BoundsError::Domain { n: k, mu_rho });
    }
    let log_factor = track.log_mu_rho(k) + track.f1(k).ln();
    let weight = (track.inv_mu(k - 2) - track.inv_mu(k)).abs();
    Ok(log_factor * weight)
}

// ── bound shapes ────────────────────────────────────────────────────────

/// A bound-shape value together with a hypothesis-validity flag; the value
/// is always computed, warning or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValue {
    pub value: f64,
    pub hypothesis_warning: bool,
}

/// First bound shape: `1/(μ_nρ_{0,n}) + r_n/ρ_{0,n}`, constant fixed to 1.
pub fn theorem4_shape(track: &MomentTrack, r_n: f64, n: u64) -> f64 {
    debug_assert!(n >= 2);
    let rho = track.rho(n);
    debug_assert!(rho > 0.0);
    1.0 / track.mu_rho(n) + r_n / rho
}

/// Logarithmic bound shape with the `(1+𝔐_n)^5` prefactor:
/// `(1+𝔐_n)^5·((log(μ_nρ_{0,n}) + log f_n'(1))/(μ_nρ_{0,n}) + s_n/ρ_{0,n})`.
///
/// The underlying estimate assumes reproduction stays uniformly
/// non-degenerate (`inf_n f_n''(1) > 0`); when the observed minimum of
/// `f''(1)` over `1..=n` falls below `f2_floor`, the value is still
/// returned but flagged.
pub fn theorem5_shape(
    track: &MomentTrack,
    s_n: f64,
    n: u64,
    f2_floor: f64,
) -> Result<ShapeValue, BoundsError> {
    let mu_rho = track.mu_rho(n);
    if !(mu_rho > 0.0) {
        return Err(BoundsError::Domain { n, mu_rho });
    }
    let prefactor = (1.0 + track.mmax(n)).powi(5);
    let log_term = (track.log_mu_rho(n) + track.f1(n).ln()) / mu_rho;
    let value = prefactor * (log_term + s_n / track.rho(n));
    let f2_min = (1..=n).map(|k| track.f2(k)).fold(f64::INFINITY, f64::min);
    Ok(ShapeValue {
        value,
        hypothesis_warning: f2_min < f2_floor,
    })
}

/// Logarithmic bound shape without the prefactor:
/// `log(μ_nρ_{0,n})/(μ_nρ_{0,n}) + s_n/ρ_{0,n}`.
///
/// Valid when `f'(1)` and `f''(1)` stay within a band `[band_lo, band_hi]`
/// bounded away from zero and infinity; excursions are flagged, not fatal.
pub fn corollary_shape(
    track: &MomentTrack,
    s_n: f64,
    n: u64,
    band_lo: f64,
    band_hi: f64,
) -> Result<ShapeValue, BoundsError> {
    let mu_rho = track.mu_rho(n);
    if !(mu_rho > 0.0) {
        return Err(BoundsError::Domain { n, mu_rho });
    }
    let value = track.log_mu_rho(n) / mu_rho + s_n / track.rho(n);
    let out_of_band = (1..=n).any(|k| {
        let band = band_lo..=band_hi;
        !band.contains(&track.f1(k)) || !band.contains(&track.f2(k))
    });
    Ok(ShapeValue {
        value,
        hypothesis_warning: out_of_band,
    })
}

/// Exact Wasserstein bound `4/(2+μ_nρ_{0,n})` for environments that are
/// linear-fractional through generation `n` — the one family where the
/// constant is known (and equal to 1).
pub fn linear_fractional_bound(
    env: &Environment,
    track: &MomentTrack,
    n: u64,
) -> Result<f64, BoundsError> {
    if !env.all_linear_fractional_upto(n) {
        return Err(BoundsError::FamilyMismatch { n });
    }
    Ok(4.0 / (2.0 + track.mu_rho(n)))
}

// ── consolidated report ─────────────────────────────────────────────────

/// One generation's worth of rate quantities.  `r_n`/`thm4_shape` are
/// `None` at `n = 1` (outside their domain); the exact linear-fractional
/// bound is present only when the environment is linear-fractional.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBoundRow {
    pub n: u64,
    pub r_n: Option<f64>,
    pub s_n: f64,
    pub thm4_shape: Option<f64>,
    pub thm5_shape: f64,
    pub cor_shape: f64,
    pub lf_exact_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBoundReport {
    pub rows: Vec<RateBoundRow>,
    /// `inf f''(1)` fell below the five-factor shape's floor.
    pub thm5_f2_warning: bool,
    /// `f'(1)` or `f''(1)` left the corollary band.
    pub cor_band_warning: bool,
    pub warnings: Vec<String>,
}

/// Computes every rate quantity for `n = 1..=n_max` in one pass.
pub fn rate_bound_report(
    env: &Environment,
    n_max: u64,
    f2_floor: f64,
    band_lo: f64,
    band_hi: f64,
) -> Result<RateBoundReport, BoundsError> {
    assert!(n_max >= 1);
    let track = moment_sequences(env, n_max)?;
    let r_all = rn_all(&track, n_max)?;
    let s_all = sn_all(&track, n_max)?;
    let lf = env.all_linear_fractional_upto(n_max);

    let mut rows = Vec::with_capacity(n_max as usize);
    let mut thm5_f2_warning = false;
    let mut cor_band_warning = false;
    for n in 1..=n_max {
        let r_n = (n >= 2).then(|| r_all[(n - 2) as usize]);
        let s_n = s_all[(n - 1) as usize];
        let thm5 = theorem5_shape(&track, s_n, n, f2_floor)?;
        let cor = corollary_shape(&track, s_n, n, band_lo, band_hi)?;
        thm5_f2_warning |= thm5.hypothesis_warning;
        cor_band_warning |= cor.hypothesis_warning;
        rows.push(RateBoundRow {
            n,
            r_n,
            s_n,
            thm4_shape: r_n.map(|r| theorem4_shape(&track, r, n)),
            thm5_shape: thm5.value,
            cor_shape: cor.value,
            lf_exact_bound: lf.then(|| 4.0 / (2.0 + track.mu_rho(n))),
        });
    }

    let mut warnings = Vec::new();
    if thm5_f2_warning {
        let f2_min = (1..=n_max).map(|k| track.f2(k)).fold(f64::INFINITY, f64::min);
        warnings.push(format!(
            "five-factor shape assumes inf f''(1) > 0, but the observed minimum {f2_min:e} \
             is below the floor {f2_floor:e}; values are reported anyway"
        ));
    }
    if cor_band_warning {
        warnings.push(format!(
            "log-shape validity band [{band_lo}, {band_hi}] is violated by f'(1) or f''(1) \
             at some generation; values are reported anyway"
        ));
    }
    Ok(RateBoundReport {
        rows,
        thm5_f2_warning,
        cor_band_warning,
        warnings,
    })
}
