//! Conditional-law helpers shared by the distance commands: closed-form
//! dispatch for linear-fractional environments and adaptive transform
//! sizing for everything else.

use gwve::env::Environment;
use gwve::exact::{self, ExactError, TruncatedPmf};

/// Largest transform the adaptive path will try.
pub const K_CAP: usize = 1 << 21;

/// Conditional-tail target for adaptively sized laws: one order of
/// magnitude under the distance computation's admissible ceiling.
pub const COND_TAIL_TARGET: f64 = 1e-7;

/// A conditional law `Y_n` ready for the distance computation.
pub struct CondLaw {
    pub pmf: TruncatedPmf,
    pub b: f64,
    pub k_used: usize,
}

/// `Y_n` at a caller-fixed truncation point.  Linear-fractional
/// environments take the closed form (exact analytic tail); other
/// environments go through the transform with tail tolerance `tol` on the
/// law of `Z_n`.
pub fn conditional_fixed_k(
    env: &Environment,
    n: u64,
    k: usize,
    tol: f64,
) -> Result<CondLaw, ExactError> {
    if env.all_linear_fractional_upto(n) {
        let (pmf, b) = exact::conditional_law_closed_form(env, n, k)?;
        // The closed form cannot fail on truncation; enforce the caller's
        // tolerance on the underlying Z_n law for a uniform contract.
        let survival = if n == 0 { 1.0 } else { 1.0 / b_to_inv_survival(env, n)? };
        let zn_tail = pmf.tail_mass() * survival;
        if zn_tail > tol {
            return Err(ExactError::Truncation { tail_mass: zn_tail, tol });
        }
        return Ok(CondLaw { pmf, b, k_used: k });
    }
    let (pmf, b) = exact::conditional_law_with_tol(env, n, k, tol)?;
    Ok(CondLaw { pmf, b, k_used: k })
}

/// `1/P[Z_n > 0]` on the closed-form path (`n ≥ 1`).
fn b_to_inv_survival(env: &Environment, n: u64) -> Result<f64, ExactError> {
    let track = gwve::bounds::moment_sequences(env, n)?;
    Ok(1.0 / track.mu(n) + track.rho(n) / 2.0)
}

/// `Y_n` with the truncation point grown from `k_start` (rounded up to a
/// power of two) until the conditional tail falls below
/// [`COND_TAIL_TARGET`], up to `k_cap`.
///
/// The returned law always satisfies the distance computation's tail
/// ceiling; the final truncation failure is surfaced if the cap is hit.
pub fn conditional_adaptive(
    env: &Environment,
    n: u64,
    k_start: usize,
    k_cap: usize,
) -> Result<CondLaw, ExactError> {
    let mut k = k_start.clamp(2, k_cap).next_power_of_two();
    if env.all_linear_fractional_upto(n) {
        loop {
            let (pmf, b) = exact::conditional_law_closed_form(env, n, k)?;
            if pmf.tail_mass() <= COND_TAIL_TARGET {
                return Ok(CondLaw { pmf, b, k_used: k });
            }
            if k >= k_cap {
                return Err(ExactError::Truncation {
                    tail_mass: pmf.tail_mass(),
                    tol: COND_TAIL_TARGET,
                });
            }
            k *= 2;
        }
    }

    // Aim the Z_n tail tolerance so the conditional tail lands on target;
    // the floor keeps the demand self-consistent with the happy case where
    // survival is tiny but the transform still resolves the law.
    let survival = exact::survival_prob(env, 0, n)?;
    if survival <= 1e-300 {
        return Err(ExactError::VanishingSurvival { survival });
    }
    let tol = (COND_TAIL_TARGET * survival).max(1e-14);
    loop {
        match exact::conditional_law_with_tol(env, n, k, tol) {
            Ok((pmf, b)) => return Ok(CondLaw { pmf, b, k_used: k }),
            Err(ExactError::Truncation { .. }) if k < k_cap => k *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// First power of two past the point where a geometric-type conditional
/// tail `e^{−K/b}` reaches the adaptive target — a good starting size when
/// the conditioned mean `b` is known or estimable.
pub fn suggest_k(b: f64) -> usize {
    let need = (b.max(1.0) * (1.0 / COND_TAIL_TARGET).ln() * 1.3).ceil();
    (need as usize).clamp(64, K_CAP).next_power_of_two()
}
