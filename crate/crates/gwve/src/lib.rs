//! Numerics for critical Galton-Watson processes in varying environments.
//!
//! A Galton-Watson process in a varying environment (GWVE) starts from a
//! single ancestor, `Z_0 = 1`, and lets every individual of generation `n−1`
//! reproduce independently according to a generation-dependent offspring law
//! `q_n`:
//!
//! ```text
//! Z_n = sum_{i=1}^{Z_{n-1}} X_i^{(n)},     X^{(n)} ~ q_n.
//! ```
//!
//! Writing `f_n` for the probability generating function of `q_n`, the law of
//! `Z_n` is encoded by the composition `f_{0,n} = f_1 ∘ f_2 ∘ … ∘ f_n`.  In
//! the critical regime the process dies out, yet conditioned on survival and
//! rescaled by its conditional mean `b_n = E[Z_n | Z_n > 0]` it converges to
//! a standard exponential (the Yaglom limit).  This crate computes all the
//! finite-`n` quantities needed to watch that happen at machine precision and
//! to quantify the convergence rate in Wasserstein distance:
//!
//! - [`seqexpr`] — a tiny expression language (`n`, arithmetic, `sqrt`,
//!   `exp`, `log`, `pow`) for specifying environment parameters such as
//!   `δ_n = n^{-a}` or `λ_n = exp(-sqrt(n))/exp(-sqrt(n-1))`.
//! - [`env`] — offspring laws (explicit pmf, Poisson, linear-fractional,
//!   symmetric perturbation of `δ_1`), environment sequences, and the
//!   criticality / third-moment diagnostics.
//! - [`exact`] — the exact engine: pgf compositions, truncated laws of `Z_n`
//!   recovered from root-of-unity evaluations (with a convolution oracle and
//!   a closed-form linear-fractional path), survival probabilities,
//!   conditional laws, size-biased and equilibrium transforms, and shape
//!   functions.
//! - [`bounds`] — the moment ledger `μ_n, ν_n, ρ_{0,n}, 𝔐_n` and every
//!   explicit rate quantity (`r_n`, `s_n`, the bound shapes, the exact
//!   linear-fractional bound `4/(2+μ_n ρ_{0,n})`).
//! - [`wasserstein`] — exact piecewise Wasserstein-1 distances between
//!   rescaled discrete laws and `Exp(1)`, the empirical-CDF variant, and
//!   total-variation helpers.
//! - [`spine`] — reproducible Monte Carlo: forward GWVE paths and the
//!   one-spine size-biased tree, with estimators for the distributional
//!   identities and inequality checks that drive the rate analysis.
//!
//! Everything here is `no_std` (with `alloc`); IO, file formats and the
//! command-line front end live in the companion `gwve-cli` crate.
//!
//! # Conventions
//!
//! Generations are indexed from 1: `q_n` is the law governing births *into*
//! generation `n`.  Truncated distributions never get renormalized — the mass
//! beyond the truncation point is carried explicitly and failures are loud
//! (see [`exact::TruncatedPmf`]).  All arithmetic is IEEE binary64.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod env;
pub mod exact;
pub mod seqexpr;
pub mod spine;
pub mod wasserstein;

mod fft;
