//! Monte Carlo simulation of the branching process and of its one-spine
//! size-biased tree, with estimators that validate the distributional
//! identities and inequalities the rate analysis is built on.
//!
//! The size-biased tree carries one marked line (the spine).  At each
//! generation `j` the marked particle reproduces by the size-biased law
//! `q̇_j[k] = k·q_j[k]/f_j'(1)`, one child is marked uniformly at random,
//! and the unmarked siblings found ordinary subtrees evolving under the
//! remaining environment.  Writing `L_{n,j}`/`R_{n,j}` for the number of
//! generation-`n` descendants of the siblings to the left/right of the
//! mark at the split in generation `j`,
//!
//! * `Ż_n = L_n + R_n` with `L_n = Σ_j L_{n,j}`, `R_n = 1 + Σ_j R_{n,j}`;
//! * `Ż_n` is distributed as the size-bias of `Z_n`;
//! * conditioned on `L_n = 0`, `Ż_n` recovers `Z_n | Z_n > 0`;
//! * `R_n − U` (with `U` uniform, independent) has the equilibrium
//!   distribution of `Z_n | Z_n > 0`.
//!
//! All samplers are deterministic functions of an [`RngStream`]: the same
//! `(seed, stream_id)` reproduces identical sample paths bit for bit, and
//! estimators consume fixed-size chunks per stream so results do not
//! depend on how work is scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};

use crate::bounds;
use crate::env::{EnvError, Environment, LawKind, OffspringLaw};
use crate::exact::{self, EquilibriumCdf, ExactError, TruncatedPmf};

/// Default ceiling on any simulated population (per path).
pub const DEFAULT_POPULATION_CAP: u64 = 1_000_000_000;

/// Retries allowed when drawing a split conditioned on left-side extinction.
pub const REJECTION_BUDGET: u64 = 10_000;

/// Samples drawn from one RNG stream before advancing to the next; fixed so
/// that estimator results are independent of worker scheduling.
pub const SAMPLES_PER_STREAM: usize = 1 << 15;

/// Errors from simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SpineError {
    /// Environment failed to produce a law.
    Env(EnvError),
    /// An exact-law computation backing an estimator failed.
    Exact(ExactError),
    /// A simulated population exceeded the configured ceiling.
    Cap { generation: u64, cap: u64 },
    /// Size-biasing needs a law with positive mean.
    ZeroMean,
}

impl fmt::Display for SpineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Env(e) => write!(f, "environment error: {e}"),
            Self::Exact(e) => write!(f, "exact-law error: {e}"),
            Self::Cap { generation, cap } => {
                write!(f, "population exceeded cap {cap} at generation {generation}")
            }
            Self::ZeroMean => write!(f, "size-biasing requires a positive-mean law"),
        }
    }
}

impl core::error::Error for SpineError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Self::Env(e) => Some(e),
            Self::Exact(e) => Some(e),
            _ => None,
        }
    }
}

impl From<EnvError> for SpineError {
    fn from(e: EnvError) -> Self {
        Self::Env(e)
    }
}

impl From<ExactError> for SpineError {
    fn from(e: ExactError) -> Self {
        Self::Exact(e)
    }
}

/// A reproducible random source: distinct `(seed, stream_id)` pairs give
/// statistically independent streams, identical pairs give bit-identical
/// sample paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One-generation offspring sampler, specialised per family so that the
/// per-draw cost inside population loops stays constant.
enum Sampler<'a> {
    Explicit { probs: &'a [f64], fallback: u64 },
    Poisson(Poisson<f64>),
    LinearFractional { a: f64, geometric: Geometric },
    Symmetric { delta: f64 },
}

impl Sampler<'_> {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Sampler::Explicit { probs, fallback } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u64;
                    }
                }
                *fallback
            }
            Sampler::Poisson(poisson) => poisson.sample(rng) as u64,
            Sampler::LinearFractional { a, geometric } => {
                if rng.random::<f64>() < *a {
                    1 + geometric.sample(rng)
                } else {
                    0
                }
            }
            Sampler::Symmetric { delta } => {
                let u: f64 = rng.random();
                if u < delta / 2.0 {
                    0
                } else if u < *delta {
                    2
                } else {
                    1
                }
            }
        }
    }
}

fn sampler_for(law: &OffspringLaw) -> Sampler<'_> {
    match law.kind() {
        LawKind::Explicit { probs } => Sampler::Explicit {
            probs,
            fallback: probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64,
        },
        LawKind::Poisson { lambda } => Sampler::Poisson(
            Poisson::new(*lambda).expect("validated law has positive rate"),
        ),
        LawKind::LinearFractional { a, p } => Sampler::LinearFractional {
            a: *a,
            geometric: Geometric::new(*p).expect("validated law has p in (0,1)"),
        },
        LawKind::Symmetric { delta } => Sampler::Symmetric { delta: *delta },
    }
}

/// Draw one offspring count from the law.
///
/// Explicit pmfs use inverse-CDF on the stored vector; Poisson uses an
/// exact standard sampler; linear-fractional uses its two-stage closed form
/// (Bernoulli(a), then a geometric number of extra children); the symmetric
/// family is a three-way split.
pub fn sample_offspring<R: Rng + ?Sized>(law: &OffspringLaw, rng: &mut R) -> u64 {
    sampler_for(law).draw(rng)
}

/// Draw `(total, marked_index)` for a marked split: `total` follows the
/// size-biased law `q̇[k] = k·q[k]/f'(1)` and `marked_index` is uniform on
/// `{1, …, total}`.
pub fn sample_size_biased_offspring<R: Rng + ?Sized>(
    law: &OffspringLaw,
    rng: &mut R,
) -> Result<(u64, u64), SpineError> {
    let mean = law.mean();
    if !(mean > 0.0) {
        return Err(SpineError::ZeroMean);
    }
    let total = match law.kind() {
        LawKind::Explicit { probs } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut out = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64;
            for (k, &p) in probs.iter().enumerate() {
                acc += k as f64 * p / mean;
                if u < acc {
                    out = k as u64;
                    break;
                }
            }
            out
        }
        // Size-bias of Poisson(λ) is 1 + Poisson(λ).
        LawKind::Poisson { lambda } => {
            1 + Poisson::new(*lambda)
                .expect("validated law has positive rate")
                .sample(rng) as u64
        }
        // Size-bias of linear-fractional is a sum of two unit-shifted
        // geometrics minus one: P[total = k] = k p² (1−p)^{k−1}.
        LawKind::LinearFractional { a: _, p } => {
            let geo = Geometric::new(*p).expect("validated law has p in (0,1)");
            1 + geo.sample(rng) + geo.sample(rng)
        }
        // k·q[k] vanishes except at 1 and 2: total = 2 with probability δ.
        LawKind::Symmetric { delta } => {
            if rng.random::<f64>() < *delta {
                2
            } else {
                1
            }
        }
    };
    let marked = rng.random_range(1..=total);
    Ok((total, marked))
}

/// Evolve `start` independent lines from generation `from` to generation
/// `to` (laws `q_{from+1} … q_to`), individual by individual, and return
/// the generation-`to` population.
fn evolve_population<R: Rng + ?Sized>(
    env: &Environment,
    from: u64,
    to: u64,
    start: u64,
    cap: u64,
    rng: &mut R,
) -> Result<u64, SpineError> {
    let mut pop = start;
    for g in from + 1..=to {
        if pop == 0 {
            return Ok(0);
        }
        let law = env.law_at(g)?;
        let sampler = sampler_for(&law);
        let mut next: u64 = 0;
        for _ in 0..pop {
            next += sampler.draw(rng);
            if next > cap {
                return Err(SpineError::Cap { generation: g, cap });
            }
        }
        pop = next;
    }
    Ok(pop)
}

/// Simulate one population path `Z_0 … Z_n` (`Z_0 = 1`) with the default
/// population ceiling.
pub fn sample_gw_path<R: Rng + ?Sized>(
    env: &Environment,
    n: u64,
    rng: &mut R,
) -> Result<Vec<u64>, SpineError> {
    sample_gw_path_with_cap(env, n, DEFAULT_POPULATION_CAP, rng)
}

/// Simulate one population path with an explicit population ceiling.
pub fn sample_gw_path_with_cap<R: Rng + ?Sized>(
    env: &Environment,
    n: u64,
    cap: u64,
    rng: &mut R,
) -> Result<Vec<u64>, SpineError> {
    let mut path = Vec::with_capacity(n as usize + 1);
    let mut pop: u64 = 1;
    path.push(pop);
    for g in 1..=n {
        pop = evolve_population(env, g - 1, g, pop, cap, rng)?;
        path.push(pop);
    }
    Ok(path)
}

/// Generation statistics of one sample of the size-biased tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpineSample {
    /// Horizon the tree was grown to.
    pub n: u64,
    /// Population at generation `n` (spine included): `Ż_n = L_n + R_n`.
    pub zdot: u64,
    /// Particles strictly left of the spine at generation `n`.
    pub l: u64,
    /// Spine plus particles right of it at generation `n`; always ≥ 1.
    pub r: u64,
    /// `L_{n,j}` per split generation `j = 1..=n` (index `j − 1`).
    pub lj: Vec<u64>,
    /// `R_{n,j}` per split generation.
    pub rj: Vec<u64>,
    /// `S_j`: number of (unmarked) siblings of the mark at each split.
    pub sj: Vec<u64>,
}

impl SpineSample {
    fn assemble(n: u64, lj: Vec<u64>, rj: Vec<u64>, sj: Vec<u64>) -> Self {
        let l: u64 = lj.iter().sum();
        let r: u64 = 1 + rj.iter().sum::<u64>();
        let sample = Self { n, zdot: l + r, l, r, lj, rj, sj };
        // Structural identities hold by construction; keep them checked on
        // every sample, as downstream estimators lean on them.
        assert_eq!(sample.zdot, sample.l + sample.r);
        assert_eq!(sample.r, 1 + sample.rj.iter().sum::<u64>());
        assert_eq!(sample.l, sample.lj.iter().sum::<u64>());
        assert!(sample.r >= 1);
        sample
    }
}

/// Grow one size-biased tree to generation `n` and record its generation
/// statistics (default population ceiling).
pub fn sample_spine_tree<R: Rng + ?Sized>(
    env: &Environment,
    n: u64,
    rng: &mut R,
) -> Result<SpineSample, SpineError> {
    sample_spine_tree_with_cap(env, n, DEFAULT_POPULATION_CAP, rng)
}

/// Grow one size-biased tree with an explicit population ceiling.
pub fn sample_spine_tree_with_cap<R: Rng + ?Sized>(
    env: &Environment,
    n: u64,
    cap: u64,
    rng: &mut R,
) -> Result<SpineSample, SpineError> {
    let len = n as usize;
    let (mut lj, mut rj, mut sj) = (vec![0u64; len], vec![0u64; len], vec![0u64; len]);
    for j in 1..=n {
        let law = env.law_at(j)?;
        let (total, marked) = sample_size_biased_offspring(&law, rng)?;
        let idx = (j - 1) as usize;
        sj[idx] = total - 1;
        lj[idx] = evolve_population(env, j, n, marked - 1, cap, rng)?;
        rj[idx] = evolve_population(env, j, n, total - marked, cap, rng)?;
    }
    Ok(SpineSample::assemble(n, lj, rj, sj))
}

/// Run `f` once per sample across fixed-size per-stream chunks, so results
/// are deterministic in `base` and independent of scheduling.
///
/// Chunk `w` (of [`SAMPLES_PER_STREAM`] samples) draws from the stream
/// `base.stream_id + w` under `base.seed`; a worker pool of any size that
/// assigns whole chunks and merges in chunk order replays the sequential
/// run bit for bit.  All estimators in this module consume randomness
/// through this function, and callers building their own statistics (for
/// example histograms over [`sample_spine_tree`] draws) should too, so
/// their results commute with the built-in ones.
pub fn for_each_sample<F>(base: RngStream, m: usize, mut f: F) -> Result<(), SpineError>
where
    F: FnMut(&mut ChaCha8Rng) -> Result<(), SpineError>,
{
    let mut done = 0usize;
    let mut worker = 0u64;
    while done < m {
        let take = SAMPLES_PER_STREAM.min(m - done);
        let mut rng = RngStream::new(base.seed, base.stream_id.wrapping_add(worker)).rng();
        for _ in 0..take {
            f(&mut rng)?;
        }
        done += take;
        worker += 1;
    }
    Ok(())
}

/// Exact conditional law of `Z_n` given survival, with the transform size
/// grown until the truncation tolerance is met.
fn adaptive_conditional_law(env: &Environment, n: u64) -> Result<(TruncatedPmf, f64), SpineError> {
    let mut k = 64usize;
    loop {
        match exact::conditional_law(env, n, k) {
            Ok(out) => return Ok(out),
            Err(ExactError::Truncation { .. }) if k < (1 << 21) => k *= 2,
            Err(e) => return Err(SpineError::Exact(e)),
        }
    }
}

/// Exact `P[some left sibling of the generation-`j` mark has descendants
/// at generation `n`]`, i.e. `P[A^c_{n,j}]` for `A_{n,j} = {L_{n,j} = 0}`.
///
/// With `g = f_{j,n}(0)` (per-line extinction by `n`) and the mark uniform
/// among `total` children, summing the geometric prefix over the
/// size-biased split gives `P[A_{n,j}] = (1 − f_j(g)) / (f_j'(1)(1 − g))`.
pub fn prob_left_survivors(env: &Environment, j: u64, n: u64) -> Result<f64, SpineError> {
    assert!(1 <= j && j <= n, "split generation must satisfy 1 ≤ j ≤ n");
    let g = 1.0 - exact::survival_prob(env, j, n)?;
    let law = env.law_at(j)?;
    if 1.0 - g < 1e-12 {
        // Degenerate limit: (1 − f(g))/(1 − g) → f'(1), so P[A] → 1.
        return Ok(0.0);
    }
    let p_all_die = (1.0 - law.pgf_real(g)) / (law.mean() * (1.0 - g));
    Ok((1.0 - p_all_die).clamp(0.0, 1.0))
}

/// Result of the equilibrium-identity check: the Kolmogorov–Smirnov gap
/// between the empirical law of `R_n − U` and the exact equilibrium CDF of
/// `Z_n | Z_n > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumIdentityReport {
    pub ks_gap: f64,
    pub samples: usize,
    /// Knots of the exact conditional law backing the comparison CDF.
    pub knots_used: usize,
}

/// Empirical check of `R_n − U =_(d) U·Ż_n` (equilibrium law of the
/// conditional population): draws `m` spine samples plus independent
/// uniforms and returns the sup-gap against the exact equilibrium CDF.
pub fn estimate_equilibrium_identity(
    env: &Environment,
    n: u64,
    m: usize,
    base: RngStream,
) -> Result<EquilibriumIdentityReport, SpineError> {
    assert!(m >= 10_000, "need at least 10^4 samples, got {m}");
    let (law, _b) = adaptive_conditional_law(env, n)?;
    let cdf = EquilibriumCdf::new(&law)?;
    let mut xs: Vec<f64> = Vec::with_capacity(m);
    for_each_sample(base, m, |rng| {
        let sample = sample_spine_tree(env, n, rng)?;
        let u: f64 = rng.random();
        xs.push(sample.r as f64 - u);
        Ok(())
    })?;
    xs.sort_unstable_by(f64::total_cmp);
    // The empirical CDF is flat between order statistics and the target CDF
    // is monotone, so the sup-gap is attained at a sample point, approached
    // from one side or the other.
    let mf = m as f64;
    let mut gap = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf.eval(x);
        gap = gap.max((f - i as f64 / mf).abs());
        gap = gap.max((f - (i + 1) as f64 / mf).abs());
    }
    Ok(EquilibriumIdentityReport { ks_gap: gap, samples: m, knots_used: law.len() })
}

/// Draw `R_{n,j}` conditioned on `{L_{n,j} = 0}` by redrawing the whole
/// generation-`j` split until the left side dies out by `n`.
/// Returns `None` when the retry budget is exhausted.
fn draw_right_given_left_dies<R: Rng + ?Sized>(
    env: &Environment,
    j: u64,
    n: u64,
    cap: u64,
    law: &OffspringLaw,
    rng: &mut R,
) -> Result<Option<u64>, SpineError> {
    for _ in 0..REJECTION_BUDGET {
        let (total, marked) = sample_size_biased_offspring(law, rng)?;
        if evolve_population(env, j, n, marked - 1, cap, rng)? == 0 {
            let right = evolve_population(env, j, n, total - marked, cap, rng)?;
            return Ok(Some(right));
        }
    }
    Ok(None)
}

/// Monte Carlo estimate of the distance bound's right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanYyeReport {
    /// Estimate of `(2/b_n)(E[U] + Σ_j E[R̃_{n,j}·1{A^c} + R_{n,j}·1{A^c}])`.
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Conditioned redraws whose rejection budget ran out (each contributes
    /// zero to its term, biasing the estimate low; nonzero counts flag the
    /// estimate as partial).
    pub rejection_failures: u64,
}

/// Estimate the coupling bound `(2/b_n)(E[U] + Σ_j E[R̃_{n,j}·1{A^c_{n,j}}
/// + R_{n,j}·1{A^c_{n,j}}])`, an upper bound for the Wasserstein distance
/// of the rescaled conditional law to the standard exponential.
///
/// `R̃_{n,j}` (the law of `R_{n,j}` given left-side extinction) is drawn by
/// rejection, independently of the tree sample; the estimator only needs
/// the marginals of each summand, so this coupling choice is sound.
pub fn estimate_meanyye_rhs(
    env: &Environment,
    n: u64,
    m: usize,
    base: RngStream,
) -> Result<MeanYyeReport, SpineError> {
    assert!(m >= 10_000, "need at least 10^4 samples, got {m}");
    let b = exact::b_n(env, n)?;
    let laws = env.laws_upto(n)?;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let mut failures = 0u64;
    for_each_sample(base, m, |rng| {
        let sample = sample_spine_tree(env, n, rng)?;
        let mut inner = 0.5f64; // E[U] contributes 1/2 exactly.
        for j in 1..=n {
            let idx = (j - 1) as usize;
            if sample.lj[idx] != 0 {
                inner += sample.rj[idx] as f64;
                match draw_right_given_left_dies(
                    env,
                    j,
                    n,
                    DEFAULT_POPULATION_CAP,
                    &laws[idx],
                    rng,
                )? {
                    Some(r_tilde) => inner += r_tilde as f64,
                    None => failures += 1,
                }
            }
        }
        let value = 2.0 / b * inner;
        sum += value;
        sumsq += value * value;
        Ok(())
    })?;
    let mf = m as f64;
    let mean = sum / mf;
    let var = ((sumsq - sum * sum / mf) / (mf - 1.0)).max(0.0);
    Ok(MeanYyeReport {
        estimate: mean,
        stderr: (var / mf).sqrt(),
        samples: m,
        rejection_failures: failures,
    })
}

/// One Monte Carlo row of a step check: estimated left side against the
/// exact right side, flagged when the estimate exceeds the bound by more
/// than three standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMcRow {
    pub j: u64,
    pub lhs: f64,
    pub stderr: f64,
    pub rhs: f64,
    pub violated: bool,
}

/// Deterministic survival sandwich for one split generation:
/// `lower ≤ P[Z^{(j)}_{n−j} > 0] ≤ upper` from the composed shape function
/// envelope (`φ ≤ 2φ(1)` gives the lower bound, `φ ≥ φ(1)` the upper).
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSandwichRow {
    pub j: u64,
    pub survival: f64,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

/// Outcome of the step-inequality batch check.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub n: u64,
    pub samples: usize,
    /// `E[R̃_{n,j}·1{A^c}] ≤ μ_n (ν_j/μ_{j−1}) P[A^c]` per `j`.
    pub step1: Vec<StepMcRow>,
    /// `E[R_{n,j}·1{A^c}] ≤ (μ_n/μ_j)((f_j'''+f_j'')/f_j') P[Z^{(j)}_{n−j}>0]`.
    pub step2: Vec<StepMcRow>,
    /// `P[A^c_{n,j}] ≤ (f_j''/f_j') P[Z^{(j)}_{n−j}>0]`.
    pub step3: Vec<StepMcRow>,
    /// Exact survival against its shape-envelope sandwich.
    pub step4: Vec<SurvivalSandwichRow>,
    pub rejection_failures: u64,
    /// Human-readable descriptions of every flagged row.
    pub violations: Vec<String>,
}

/// Monte Carlo + exact verification of the four inequalities behind the
/// rate bound, per split generation `j = 1..=n`.
pub fn check_step_inequalities(
    env: &Environment,
    n: u64,
    m: usize,
    base: RngStream,
) -> Result<StepReport, SpineError> {
    assert!(n >= 1, "need at least one generation");
    assert!(m >= 10_000, "need at least 10^4 samples, got {m}");
    let track = bounds::moment_sequences(env, n)?;
    let laws = env.laws_upto(n)?;
    let len = n as usize;

    // Accumulators per j: sums and sums of squares for R̃·1, R·1, 1{A^c}.
    let mut s1 = vec![0.0f64; len];
    let mut q1 = vec![0.0f64; len];
    let mut s2 = vec![0.0f64; len];
    let mut q2 = vec![0.0f64; len];
    let mut s3 = vec![0.0f64; len];
    let mut failures = 0u64;

    for_each_sample(base, m, |rng| {
        let sample = sample_spine_tree(env, n, rng)?;
        for j in 1..=n {
            let idx = (j - 1) as usize;
            if sample.lj[idx] != 0 {
                s3[idx] += 1.0;
                let r = sample.rj[idx] as f64;
                s2[idx] += r;
                q2[idx] += r * r;
                match draw_right_given_left_dies(
                    env,
                    j,
                    n,
                    DEFAULT_POPULATION_CAP,
                    &laws[idx],
                    rng,
                )? {
                    Some(r_tilde) => {
                        let rt = r_tilde as f64;
                        s1[idx] += rt;
                        q1[idx] += rt * rt;
                    }
                    None => failures += 1,
                }
            }
        }
        Ok(())
    })?;

    let mf = m as f64;
    let mean_se = |sum: f64, sumsq: f64| {
        let mean = sum / mf;
        let var = ((sumsq - sum * sum / mf) / (mf - 1.0)).max(0.0);
        (mean, (var / mf).sqrt())
    };

    let mu_n = track.mu(n);
    let mut report = StepReport {
        n,
        samples: m,
        step1: Vec::with_capacity(len),
        step2: Vec::with_capacity(len),
        step3: Vec::with_capacity(len),
        step4: Vec::with_capacity(len),
        rejection_failures: failures,
        violations: Vec::new(),
    };

    for j in 1..=n {
        let idx = (j - 1) as usize;
        let survival = exact::survival_prob(env, j, n)?;
        let p_ac = prob_left_survivors(env, j, n)?;
        let f1 = track.f1(j);
        let f2 = track.f2(j);
        let f3 = track.f3(j);

        let rhs1 = mu_n * track.nu(j) / track.mu(j - 1) * p_ac;
        let rhs2 = mu_n / track.mu(j) * ((f3 + f2) / f1) * survival;
        let rhs3 = f2 / f1 * survival;

        let (m1, se1) = mean_se(s1[idx], q1[idx]);
        let (m2, se2) = mean_se(s2[idx], q2[idx]);
        // Bernoulli indicator: exact variance estimate.
        let p_hat = s3[idx] / mf;
        let se3 = (p_hat * (1.0 - p_hat) / mf).sqrt();

        for (label, lhs, se, rhs, rows) in [
            ("I", m1, se1, rhs1, &mut report.step1),
            ("II", m2, se2, rhs2, &mut report.step2),
            ("III", p_hat, se3, rhs3, &mut report.step3),
        ] {
            let violated = lhs > rhs + 3.0 * se;
            if violated {
                report.violations.push(format!(
                    "step {label} j={j}: estimate {lhs:.6} exceeds bound {rhs:.6} \
                     by more than 3 standard errors ({se:.2e})"
                ));
            }
            rows.push(StepMcRow { j, lhs, stderr: se, rhs, violated });
        }

        let delta_rho = track.rho(n) - track.rho(j);
        let mu_j = track.mu(j);
        let lower = 1.0 / (mu_j / mu_n + mu_j * delta_rho);
        let upper = 1.0 / (mu_j / mu_n + mu_j * delta_rho / 2.0);
        let ok = survival >= lower * (1.0 - 1e-9) && survival <= upper * (1.0 + 1e-9);
        if !ok {
            report.violations.push(format!(
                "step IV j={j}: survival {survival:.6e} outside [{lower:.6e}, {upper:.6e}]"
            ));
        }
        report.step4.push(SurvivalSandwichRow { j, survival, lower, upper, ok });
    }
    Ok(report)
}
