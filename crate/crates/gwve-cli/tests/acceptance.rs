//! Acceptance gate: one integration test per advertised guarantee of the
//! workspace, each checked at its stated tolerance on the stated inputs.
//!
//! Every criterion prints a single `[PASS] criterion N: …` line carrying
//! the measured margins (visible under `cargo test --test acceptance --
//! --nocapture`); a failing criterion panics with the offending numbers,
//! which the harness reports as the failed test.  Criteria with a runtime
//! budget assert their own elapsed wall time.
//!
//! The Monte Carlo criteria (5–8) draw 10⁶ samples per run and dominate
//! the wall time; the whole gate fits in a few minutes on one core.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;

use gwve::bounds::moment_sequences;
use gwve::env::{
    lf_constant_env, poisson_increasing_env, poisson_sqrt_decay_env, symmetric_power_env,
    Environment, Extend, OffspringLaw,
};
use gwve::exact::{
    composed_shape, composed_shape_direct, conditional_law_closed_form, law_of_zn,
    law_of_zn_conv_with_tol, law_of_zn_with_tol, shape_function, size_biased_law, survival_prob,
    Provenance, TruncatedPmf,
};
use gwve::spine::{
    check_step_inequalities, estimate_equilibrium_identity, for_each_sample, sample_spine_tree,
    RngStream, SAMPLES_PER_STREAM,
};
use gwve::wasserstein::{dw_scaled_pmf_vs_exp, tv_distance};
use gwve_cli::exactlaw::suggest_k;
use gwve_cli::examples::{builtin_examples, example_rows};

// ── shared constructors ─────────────────────────────────────────────────

fn lf_half(h: u64) -> Environment {
    lf_constant_env(0.5, 0.5, h).expect("a = p = 1/2 is a valid critical law")
}

fn explicit_env(probs: &[f64], h: u64) -> Environment {
    Environment::constant(
        OffspringLaw::explicit(probs.to_vec()).expect("valid pmf"),
        h,
    )
}

fn mixed_list_env(h: u64) -> Environment {
    Environment::from_list(
        vec![
            OffspringLaw::linear_fractional(0.5, 0.5).unwrap(),
            OffspringLaw::symmetric(0.5).unwrap(),
            OffspringLaw::explicit(vec![0.3, 0.4, 0.3]).unwrap(),
        ],
        Extend::Cycle,
        h,
    )
    .expect("cycled critical list is valid")
}

/// Total variation between an empirical histogram (m draws) and an exact
/// truncated pmf, charging the exact law's truncated tail as fully missed.
fn empirical_tv(hist: &HashMap<u64, u64>, m: usize, exact: &TruncatedPmf) -> f64 {
    let hist_max = hist.keys().max().copied().unwrap_or(0) as usize;
    let len = exact.len().max(hist_max + 1);
    let mf = m as f64;
    let mut sum = 0.0;
    for k in 0..len {
        let e = hist.get(&(k as u64)).copied().unwrap_or(0) as f64 / mf;
        sum += (e - exact.prob(k)).abs();
    }
    0.5 * (sum + exact.tail_mass())
}

// ── criterion 1 ─────────────────────────────────────────────────────────

/// Constant linear-fractional a = p = 1/2: the exact Wasserstein distance
/// of `Y_n/b_n` to Exp(1) stays below the closed-form bound `4/(2+2n)`
/// (plus the reported truncation bound, itself < 1e−9 at K = 2^15) for
/// every n = 1..=200.  Budget: 60 s.
#[test]
fn criterion_01_linear_fractional_distance_within_exact_bound() {
    let t0 = Instant::now();
    let env = lf_half(200);
    let k = 1usize << 15;
    let mut max_ratio = 0.0f64;
    let mut max_tb = 0.0f64;
    for n in 1..=200u64 {
        let (pmf, b) = conditional_law_closed_form(&env, n, k).unwrap();
        let d = dw_scaled_pmf_vs_exp(&pmf, b).unwrap();
        let bound = 4.0 / (2.0 + 2.0 * n as f64);
        assert!(
            d.truncation_bound < 1e-9,
            "n = {n}: truncation bound {:e} ≥ 1e-9 at K = 2^15",
            d.truncation_bound
        );
        assert!(
            d.value <= bound + d.truncation_bound,
            "n = {n}: dw = {:.12e} exceeds 4/(2+2n) + tb = {:.12e}",
            d.value,
            bound + d.truncation_bound
        );
        max_ratio = max_ratio.max(d.value / bound);
        max_tb = max_tb.max(d.truncation_bound);
    }
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(60), "60 s budget exceeded: {dt:?}");
    println!(
        "[PASS] criterion 1: exact dw(Y_n/b_n, Exp(1)) ≤ 4/(2+2n) + tb for n = 1..=200 \
         at K = 2^15 (max dw/bound = {max_ratio:.4}, max tb = {max_tb:.2e}, {dt:.2?})"
    );
}

// ── criterion 2 ─────────────────────────────────────────────────────────

/// Cushion for ~10⁴ accumulated pgf round-offs in the survival recursion.
/// The bound itself is an exact identity, so the recursion can land a few
/// ulps on either side of it; the test prints the measured excess
/// (8.4e−12 on this toolchain — the constant keeps >10× headroom).
const SURVIVAL_FLOAT_SLACK: f64 = 1e-10;

/// Constant a = p = 1/2: survival decays at the classical critical rate,
/// `|n·P[Z_n > 0] − 1| ≤ 1/(n+1)` for every n ≤ 10^4 (the bound is an
/// exact identity here, so the check is tight up to float round-off).
/// Budget: 10 s.
#[test]
fn criterion_02_survival_decay_at_kolmogorov_rate() {
    let t0 = Instant::now();
    let law = OffspringLaw::linear_fractional(0.5, 0.5).unwrap();
    // Survival recursion s_n = 1 − f(1 − s_{n−1}).  Both subtractions are
    // exact (Sterbenz: the operands lie in [1/2, 1]), so the only error is
    // the pgf evaluation itself.
    let mut s = 1.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for n in 1..=10_000u64 {
        s = 1.0 - law.pgf_real(1.0 - s);
        let err = (n as f64 * s - 1.0).abs();
        let bound = 1.0 / (n as f64 + 1.0);
        worst_excess = worst_excess.max(err - bound);
        assert!(
            err <= bound + SURVIVAL_FLOAT_SLACK,
            "n = {n}: |n·P[Z_n>0] − 1| = {err:.15e} exceeds 1/(n+1) = {bound:.15e}"
        );
    }
    // Anchor the recursion against the composed-pgf route and the moment
    // ledger's closed form 1/(1/μ_n + ρ_{0,n}/2) at a few generations.
    let env = lf_half(10_000);
    let track = moment_sequences(&env, 10_000).unwrap();
    for &n in &[1u64, 10, 100, 1_000, 10_000] {
        let direct = survival_prob(&env, 0, n).unwrap();
        let ledger = 1.0 / (1.0 / track.mu(n) + track.rho(n) / 2.0);
        assert!(
            (direct - ledger).abs() <= 1e-11 * ledger,
            "n = {n}: composed-pgf survival {direct:e} vs ledger closed form {ledger:e}"
        );
    }
    let recursion_vs_composed =
        (s - survival_prob(&env, 0, 10_000).unwrap()).abs() / s;
    assert!(
        recursion_vs_composed <= 1e-9,
        "recursion and composed-pgf survival disagree at n = 10^4: rel {recursion_vs_composed:e}"
    );
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(10), "10 s budget exceeded: {dt:?}");
    println!(
        "[PASS] criterion 2: |n·P[Z_n>0] − 1| ≤ 1/(n+1) for n ≤ 10^4 \
         (worst excess over the exact bound = {worst_excess:.2e}, dual-route anchors ≤ 1e-11, {dt:.2?})"
    );
}

// ── criterion 3 ─────────────────────────────────────────────────────────

/// Law of `Z_n` by exhaustive enumeration of every offspring tuple of
/// every generation, memoized on (generation, population) — an oracle
/// independent of any transform or convolution.  Laws must have support
/// inside {0, 1, 2}.
fn enumeration_law(laws: &[[f64; 3]], n: usize) -> Vec<f64> {
    fn offspring_totals(z: usize, q: &[f64; 3]) -> Vec<f64> {
        fn walk(left: usize, q: &[f64; 3], p: f64, sum: usize, out: &mut [f64]) {
            if left == 0 {
                out[sum] += p;
                return;
            }
            for (c, &qc) in q.iter().enumerate() {
                if qc > 0.0 {
                    walk(left - 1, q, p * qc, sum + c, out);
                }
            }
        }
        let mut out = vec![0.0; 2 * z + 1];
        walk(z, q, 1.0, 0, &mut out);
        out
    }
    fn law_from(
        laws: &[[f64; 3]],
        gen: usize,
        z: usize,
        memo: &mut HashMap<(usize, usize), Vec<f64>>,
    ) -> Vec<f64> {
        let n = laws.len();
        if gen == n {
            let mut v = vec![0.0; z + 1];
            v[z] = 1.0;
            return v;
        }
        if let Some(v) = memo.get(&(gen, z)) {
            return v.clone();
        }
        let mut acc = vec![0.0; (z << (n - gen)) + 1];
        for (total, &pt) in offspring_totals(z, &laws[gen]).iter().enumerate() {
            if pt > 0.0 {
                for (k, &ps) in law_from(laws, gen + 1, total, memo).iter().enumerate() {
                    acc[k] += pt * ps;
                }
            }
        }
        memo.insert((gen, z), acc.clone());
        acc
    }
    law_from(laws, 0, 1, &mut HashMap::new())
}

/// The transform route and the direct-convolution route agree to
/// TV < 1e−10 on every law family (n ≤ 12, adaptive K ≤ 4096, tail target
/// 1e−12), and both agree with exhaustive tuple enumeration to TV < 1e−12
/// for support-{0,1,2} environments at n ≤ 4.  Budget: 120 s.
#[test]
fn criterion_03_transform_convolution_enumeration_agree() {
    let t0 = Instant::now();
    const TOL: f64 = 1e-12;

    let duals: Vec<(&str, Environment)> = vec![
        ("lf(1/2,1/2)", lf_half(12)),
        ("poisson increasing", poisson_increasing_env(12)),
        ("poisson sqrt decay", poisson_sqrt_decay_env(12)),
        ("symmetric a = 1/2", symmetric_power_env(0.5, 12)),
        ("symmetric a = 1", symmetric_power_env(1.0, 12)),
        ("explicit [1/4,1/2,1/4]", explicit_env(&[0.25, 0.5, 0.25], 12)),
        ("mixed list (cycled)", mixed_list_env(12)),
    ];
    let mut worst_dual = 0.0f64;
    for (name, env) in &duals {
        for n in 1..=12u64 {
            let mut k = 64usize;
            let (dft, conv) = loop {
                let a = law_of_zn_with_tol(env, n, k, TOL);
                let b = law_of_zn_conv_with_tol(env, n, k, TOL);
                if let (Ok(a), Ok(b)) = (a, b) {
                    break (a, b);
                }
                assert!(
                    k < 4096,
                    "{name}: n = {n}: no transform size ≤ 4096 met the 1e-12 tail target"
                );
                k *= 2;
            };
            let tv = tv_distance(&dft, &conv);
            assert!(tv < 1e-10, "{name}: n = {n}, K = {k}: route TV = {tv:e} ≥ 1e-10");
            worst_dual = worst_dual.max(tv);
        }
    }

    let sym = |d: f64| [d / 2.0, 1.0 - d, d / 2.0];
    let enums: Vec<(&str, Environment, Vec<[f64; 3]>)> = vec![
        (
            "explicit [1/4,1/2,1/4]",
            explicit_env(&[0.25, 0.5, 0.25], 4),
            vec![[0.25, 0.5, 0.25]; 4],
        ),
        (
            "point mass at 1",
            Environment::constant(OffspringLaw::delta_one(), 4),
            vec![[0.0, 1.0, 0.0]; 4],
        ),
        (
            "symmetric delta_n = 1/n",
            symmetric_power_env(1.0, 4),
            (1..=4).map(|j| sym(1.0 / j as f64)).collect(),
        ),
    ];
    let mut worst_enum = 0.0f64;
    for (name, env, laws) in &enums {
        for n in 1..=4u64 {
            let dft = law_of_zn(env, n, 32).unwrap();
            let mut probs = enumeration_law(&laws[..n as usize], n as usize);
            probs.resize(32, 0.0);
            let oracle = TruncatedPmf::new(probs, 0.0, Provenance::Convolution).unwrap();
            let tv = tv_distance(&dft, &oracle);
            assert!(tv < 1e-12, "{name}: n = {n}: enumeration TV = {tv:e} ≥ 1e-12");
            worst_enum = worst_enum.max(tv);
        }
    }

    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(120), "120 s budget exceeded: {dt:?}");
    println!(
        "[PASS] criterion 3: transform vs convolution TV < 1e-10 for 7 environments, n ≤ 12 \
         (worst {worst_dual:.2e}); both vs tuple enumeration TV < 1e-12 at n ≤ 4 \
         (worst {worst_enum:.2e}); {dt:.2?}"
    );
}

// ── criterion 4 ─────────────────────────────────────────────────────────

/// The truncated laws reproduce the moment ledger: `Σ k·p[k]` matches
/// `μ_n` and `Σ k(k−1)·p[k]` matches `ρ_{0,n}·μ_n²`, to relative error
/// below `1e−8` plus an explicit tail allowance, for every family and
/// every n ≤ 20.
#[test]
fn criterion_04_truncated_moments_match_ledger() {
    let cases: Vec<(&str, Environment)> = vec![
        ("lf(1/2,1/2)", lf_half(20)),
        ("poisson increasing", poisson_increasing_env(20)),
        ("poisson sqrt decay", poisson_sqrt_decay_env(20)),
        ("symmetric a = 1/2", symmetric_power_env(0.5, 20)),
        ("symmetric a = 1", symmetric_power_env(1.0, 20)),
        ("explicit [1/4,1/2,1/4]", explicit_env(&[0.25, 0.5, 0.25], 20)),
        ("point mass at 1", Environment::constant(OffspringLaw::delta_one(), 20)),
        ("mixed list (cycled)", mixed_list_env(20)),
    ];
    // Worst observed (relative error)/(allowance) ratios, for the report.
    let mut worst_mean = 0.0f64;
    let mut worst_second = 0.0f64;
    for (name, env) in &cases {
        let track = moment_sequences(env, 20).unwrap();
        for n in 1..=20u64 {
            let mut k = 64usize;
            let pmf = loop {
                match law_of_zn_with_tol(env, n, k, 1e-10) {
                    Ok(p) => break p,
                    Err(_) if k < (1 << 14) => k *= 2,
                    Err(e) => panic!("{name}: n = {n}: no K ≤ 2^14 met tail 1e-10: {e}"),
                }
            };
            let kf = pmf.len() as f64;
            let tail = pmf.tail_mass();
            let mu = track.mu(n);
            // A truncated atom at k ≥ K removes at least tail·K of mean
            // mass; 10× covers the certified geometric overshoot.
            let allow_mean = 1e-8 + 10.0 * tail * kf / mu;
            let rel_mean = (pmf.mean() - mu).abs() / mu;
            assert!(
                rel_mean < allow_mean,
                "{name}: n = {n}: truncated mean off μ_n by {rel_mean:e} (allowance {allow_mean:e})"
            );
            worst_mean = worst_mean.max(rel_mean / allow_mean);
            let target2 = track.rho(n) * mu * mu;
            if target2 > 0.0 {
                let allow2 = 1e-8 + 10.0 * tail * kf * kf / target2;
                let rel2 = (pmf.second_factorial() - target2).abs() / target2;
                assert!(
                    rel2 < allow2,
                    "{name}: n = {n}: second factorial off ρ_(0,n)μ_n² by {rel2:e} \
                     (allowance {allow2:e})"
                );
                worst_second = worst_second.max(rel2 / allow2);
            } else {
                // Deterministic one-child environment: both sides vanish.
                assert!(
                    pmf.second_factorial().abs() < 1e-10,
                    "{name}: n = {n}: second factorial should vanish, got {:e}",
                    pmf.second_factorial()
                );
            }
        }
    }
    println!(
        "[PASS] criterion 4: truncated mean vs μ_n and second factorial vs ρ_(0,n)·μ_n² \
         within 1e-8 + tail allowance for 8 environments, n ≤ 20 \
         (worst usage: {:.3}× / {:.3}× of allowance)",
        worst_mean, worst_second
    );
}

// ── criterion 5 ─────────────────────────────────────────────────────────

/// The population of the size-biased tree has the size-biased law of
/// `Z_n`: the empirical law of `Ż_n` over 10⁶ samples is within
/// TV < 0.005 of `k·P[Z_n = k]/μ_n`, at n = 6, for two families.
/// Budget: 5 min.
#[test]
fn criterion_05_spine_population_is_size_biased() {
    let t0 = Instant::now();
    const M: usize = 1_000_000;
    let cases: Vec<(&str, Environment, usize, u64)> = vec![
        ("lf(1/2,1/2)", lf_half(6), 1 << 11, 0xACCE_0501),
        ("symmetric delta_n = 1/n", symmetric_power_env(1.0, 6), 128, 0xACCE_0502),
    ];
    let mut parts = Vec::new();
    for (name, env, k, seed) in &cases {
        let exact = size_biased_law(&law_of_zn(env, 6, *k).unwrap()).unwrap();
        let mut hist: HashMap<u64, u64> = HashMap::new();
        for_each_sample(RngStream::new(*seed, 0), M, |rng| {
            let sample = sample_spine_tree(env, 6, rng)?;
            *hist.entry(sample.zdot).or_insert(0) += 1;
            Ok(())
        })
        .unwrap();
        let tv = empirical_tv(&hist, M, &exact);
        assert!(tv < 0.005, "{name}: empirical Ż_6 vs size-biased Z_6 TV = {tv} ≥ 0.005");
        parts.push(format!("{name}: TV = {tv:.5}"));
    }
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(300), "5 min budget exceeded: {dt:?}");
    println!(
        "[PASS] criterion 5: empirical Ż_6 matches k·P[Z_6=k]/μ_6 at M = 10^6 \
         ({}; both < 0.005, {dt:.2?})",
        parts.join("; ")
    );
}

// ── criterion 6 ─────────────────────────────────────────────────────────

/// Equilibrium identity `R_n − U =_d U·Ż_n`: the Kolmogorov–Smirnov gap
/// between the empirical left side and the exact equilibrium CDF stays
/// below 0.005 at M = 10⁶ — for the constant linear-fractional law at
/// n = 6 and for the deterministic one-child law (where both sides are
/// exactly Uniform(0,1)).
#[test]
fn criterion_06_equilibrium_identity_ks_gap() {
    const M: usize = 1_000_000;
    let lf = lf_half(6);
    let r_lf = estimate_equilibrium_identity(&lf, 6, M, RngStream::new(0xACCE_0601, 0)).unwrap();
    assert!(
        r_lf.ks_gap < 0.005,
        "lf(1/2,1/2): equilibrium ks_gap = {} ≥ 0.005",
        r_lf.ks_gap
    );
    let delta = Environment::constant(OffspringLaw::delta_one(), 6);
    let r_d =
        estimate_equilibrium_identity(&delta, 6, M, RngStream::new(0xACCE_0602, 0)).unwrap();
    assert!(
        r_d.ks_gap < 0.005,
        "point mass at 1: equilibrium ks_gap = {} ≥ 0.005 (both sides are exactly U(0,1))",
        r_d.ks_gap
    );
    println!(
        "[PASS] criterion 6: equilibrium identity ks_gap = {:.5} (lf) and {:.5} (δ_1, \
         exact uniform case) at M = 10^6, both < 0.005",
        r_lf.ks_gap, r_d.ks_gap
    );
}

// ── criterion 7 ─────────────────────────────────────────────────────────

/// Conditioning the size-biased tree on an empty left side of the spine
/// recovers the conditional law: the empirical law of `{Ż_6 | L_6 = 0}`
/// is within TV < 0.01 of the exact `Y_6` at M = 10⁶ total samples.
#[test]
fn criterion_07_left_extinction_conditioning_matches_conditional_law() {
    const M: usize = 1_000_000;
    let env = lf_half(6);
    let (exact_y, _b) = conditional_law_closed_form(&env, 6, 1 << 11).unwrap();
    let mut hist: HashMap<u64, u64> = HashMap::new();
    let mut kept = 0usize;
    for_each_sample(RngStream::new(0xACCE_0701, 0), M, |rng| {
        let sample = sample_spine_tree(&env, 6, rng)?;
        if sample.l == 0 {
            *hist.entry(sample.zdot).or_insert(0) += 1;
            kept += 1;
        }
        Ok(())
    })
    .unwrap();
    let tv = empirical_tv(&hist, kept, &exact_y);
    assert!(tv < 0.01, "{{Ż_6 | L_6 = 0}} vs exact Y_6: TV = {tv} ≥ 0.01");
    println!(
        "[PASS] criterion 7: {{Ż_6 | L_6 = 0}} matches exact Y_6, TV = {tv:.5} \
         over {kept} conditioned samples of 10^6 (< 0.01)"
    );
}

// ── criterion 8 ─────────────────────────────────────────────────────────

/// The four step inequalities behind the rate bound hold empirically: at
/// n = 8, M = 10⁶, no Monte Carlo estimate exceeds its exact right side
/// by more than 3 standard errors for any split generation j, and the
/// exact survival sits inside its shape-envelope sandwich — for both the
/// constant linear-fractional and a symmetric varying family.
#[test]
fn criterion_08_step_inequalities_within_three_sigma() {
    let t0 = Instant::now();
    const M: usize = 1_000_000;
    let cases: Vec<(&str, Environment, u64)> = vec![
        ("lf(1/2,1/2)", lf_half(8), 0xACCE_0801),
        ("symmetric delta_n = n^(-1/2)", symmetric_power_env(0.5, 8), 0xACCE_0802),
    ];
    let mut rows_checked = 0usize;
    for (name, env, seed) in &cases {
        let report = check_step_inequalities(env, 8, M, RngStream::new(*seed, 0)).unwrap();
        assert_eq!(
            report.rejection_failures, 0,
            "{name}: {} conditioned redraws exhausted their budget",
            report.rejection_failures
        );
        assert!(
            report.violations.is_empty(),
            "{name}: flagged rows: {:?}",
            report.violations
        );
        for rows in [&report.step1, &report.step2, &report.step3] {
            for row in rows {
                assert!(
                    !row.violated,
                    "{name}: j = {}: lhs {} > rhs {} + 3·{}",
                    row.j, row.lhs, row.rhs, row.stderr
                );
                rows_checked += 1;
            }
        }
        for row in &report.step4 {
            assert!(
                row.ok,
                "{name}: j = {}: survival {} outside sandwich [{}, {}]",
                row.j, row.survival, row.lower, row.upper
            );
            rows_checked += 1;
        }
    }
    let dt = t0.elapsed();
    println!(
        "[PASS] criterion 8: step I–IV inequalities hold within 3 standard errors \
         ({rows_checked} rows over 2 environments, n = 8, M = 10^6, no rejection-budget \
         exhaustion, {dt:.2?})"
    );
}

// ── criterion 9 ─────────────────────────────────────────────────────────

/// Rate-order reproduction on the built-in example grids: the scaled
/// diagnostic products (dw·√n, dw·log n, dw·√n/log √n, dw·(2+μρ)/4) each
/// stay within a factor 20 across their grid; rows where the exact
/// distance is out of certified floating-point reach fall back to the
/// first bound shape and are labeled.
#[test]
fn criterion_09_example_diagnostics_bounded() {
    let mut parts = Vec::new();
    for spec in builtin_examples() {
        let (rows, _warnings) = example_rows(&spec).unwrap();
        assert!(!rows.is_empty(), "{}: no rows", spec.slug);
        let min = rows.iter().map(|r| r.diagnostic).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r.diagnostic).fold(0.0f64, f64::max);
        assert!(min > 0.0, "{}: nonpositive diagnostic", spec.slug);
        let spread = max / min;
        assert!(
            spread < 20.0,
            "{}: diagnostic max/min = {spread} ≥ 20 over its grid",
            spec.slug
        );
        let fallbacks = rows.iter().filter(|r| r.basis != "dw").count();
        for row in &rows {
            assert!(
                row.basis == "dw" || row.basis == "thm4_shape",
                "{}: n = {}: unlabeled basis {:?}",
                spec.slug,
                row.n,
                row.basis
            );
            // A fallback row must be an honest label, never a silent blank.
            assert_eq!(row.dw.is_none(), row.basis == "thm4_shape");
        }
        parts.push(format!(
            "{} spread {spread:.3} ({fallbacks} fallback rows)",
            spec.slug
        ));
    }
    println!("[PASS] criterion 9: example diagnostics bounded (max/min < 20): {}", parts.join(", "));
}

// ── criterion 10 ────────────────────────────────────────────────────────

/// Constant critical law with finite third moment (a = p = 1/2): the
/// exact distance decays like log n/n at worst — dw·n/log n has
/// max/min < 20 over n ∈ {16, 32, …, 4096}.  The stronger observation
/// that dw·n itself stays bounded is recorded in the report line.
#[test]
fn criterion_10_constant_lf_rate_log_n_over_n() {
    let env = lf_half(4096);
    let mut prod_min = f64::INFINITY;
    let mut prod_max = 0.0f64;
    let mut dwn_max = 0.0f64;
    for e in 4..=12u32 {
        let n = 1u64 << e;
        let k = suggest_k((n + 1) as f64);
        let (pmf, b) = conditional_law_closed_form(&env, n, k).unwrap();
        let d = dw_scaled_pmf_vs_exp(&pmf, b).unwrap();
        assert!(
            d.truncation_bound < 1e-9,
            "n = {n}: truncation bound {:e} at K = {k}",
            d.truncation_bound
        );
        let nf = n as f64;
        let prod = d.value * nf / nf.ln();
        prod_min = prod_min.min(prod);
        prod_max = prod_max.max(prod);
        dwn_max = dwn_max.max(d.value * nf);
    }
    let spread = prod_max / prod_min;
    assert!(spread < 20.0, "dw·n/log n max/min = {spread} ≥ 20");
    assert!(dwn_max < 2.0, "dw·n = {dwn_max} should stay bounded below 2");
    println!(
        "[PASS] criterion 10: dw·n/log n spread = {spread:.3} (< 20) over n = 16..4096; \
         recorded: dw·n ≤ {dwn_max:.4} (bounded, as the constant-law theory predicts)"
    );
}

// ── criterion 11 ────────────────────────────────────────────────────────

/// Representative instances of the module invariants, re-run end to end:
/// shape-function envelope, composed-shape formula vs definition, pgf
/// derivative cross-check, spine-sample structural identities, and RNG
/// stream reproducibility (the full randomized property suites live in
/// the library's unit tests and run under `cargo test --workspace`).
#[test]
fn criterion_11_invariant_suite_representatives() {
    // (a) shape envelope φ(1) ≤ φ(s) ≤ 2·φ(1) on a grid of s.
    let laws = vec![
        OffspringLaw::poisson(1.3).unwrap(),
        OffspringLaw::linear_fractional(0.7, 0.4).unwrap(),
        OffspringLaw::symmetric(0.6).unwrap(),
        OffspringLaw::explicit(vec![0.2, 0.3, 0.1, 0.4]).unwrap(),
        OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap(),
    ];
    for law in &laws {
        let phi1 = shape_function(law, 1.0).unwrap().value;
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            let phi = shape_function(law, s).unwrap().value;
            assert!(phi <= 2.0 * phi1 + 1e-12, "{law:?}: φ({s}) = {phi} > 2φ(1) = {}", 2.0 * phi1);
            assert!(phi >= phi1 * (1.0 - 1e-9) - 1e-15, "{law:?}: φ({s}) = {phi} < φ(1) = {phi1}");
        }
    }

    // (b) composed shape: telescoping sum vs defining expression.
    let envs = [lf_half(10), poisson_increasing_env(10), symmetric_power_env(0.5, 10)];
    for env in &envs {
        for &(k, n) in &[(0u64, 10u64), (3, 7), (9, 10)] {
            for &s in &[0.0, 0.25, 0.5, 0.75, 0.99] {
                let sum = composed_shape(env, k, n, s).unwrap();
                let direct = composed_shape_direct(env, k, n, s).unwrap();
                assert!(
                    (sum - direct).abs() <= 1e-9 * direct.abs().max(1.0),
                    "composed shape routes disagree at (k, n, s) = ({k}, {n}, {s}): \
                     {sum} vs {direct}"
                );
            }
        }
    }

    // (c) factorial moments vs finite differences of the pgf at s = 1
    // (Richardson-extrapolated one-sided differences).
    for law in &laws {
        let m = law.moments();
        let g = |s: f64| law.pgf_real(s);
        let d1 = |h: f64| (g(1.0) - g(1.0 - h)) / h;
        let h = 1e-4;
        let f1_fd = 2.0 * d1(h / 2.0) - d1(h);
        assert!(
            (f1_fd - m.f1).abs() <= 1e-6 * m.f1.max(1.0),
            "{law:?}: f'(1) = {} vs finite difference {f1_fd}",
            m.f1
        );
        let d2 = |h: f64| (g(1.0) - 2.0 * g(1.0 - h) + g(1.0 - 2.0 * h)) / (h * h);
        let h = 1e-3;
        let f2_fd = 2.0 * d2(h / 2.0) - d2(h);
        assert!(
            (f2_fd - m.f2).abs() <= 1e-4 * m.f2.max(1.0),
            "{law:?}: f''(1) = {} vs finite difference {f2_fd}",
            m.f2
        );
    }

    // (d) spine-sample structural identities on live draws.
    for env in [lf_half(8), symmetric_power_env(1.0, 8)] {
        let mut checked = 0usize;
        for_each_sample(RngStream::new(0xACCE_1101, 0), 2_000, |rng| {
            let s = sample_spine_tree(&env, 8, rng)?;
            assert_eq!(s.n, 8);
            assert_eq!(s.lj.len(), 8);
            assert_eq!(s.rj.len(), 8);
            assert_eq!(s.sj.len(), 8);
            assert_eq!(s.zdot, s.l + s.r);
            assert_eq!(s.l, s.lj.iter().sum::<u64>());
            assert_eq!(s.r, 1 + s.rj.iter().sum::<u64>());
            assert!(s.r >= 1);
            for j in 0..8 {
                if s.sj[j] == 0 {
                    // No siblings at the split ⇒ nothing can branch off.
                    assert_eq!(s.lj[j], 0);
                    assert_eq!(s.rj[j], 0);
                }
            }
            checked += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(checked, 2_000);
    }

    // (e) RNG streams: same (seed, stream) replays bit for bit, distinct
    // streams differ, and the chunked driver equals its manual replay.
    let draw = |seed: u64, stream: u64, len: usize| -> Vec<u64> {
        let mut rng = RngStream::new(seed, stream).rng();
        (0..len).map(|_| rng.random::<u64>()).collect()
    };
    assert_eq!(draw(7, 3, 32), draw(7, 3, 32));
    assert_ne!(draw(7, 3, 32), draw(7, 4, 32));
    assert_ne!(draw(7, 3, 32), draw(8, 3, 32));

    let m = 70_000usize; // spans three per-stream chunks
    let mut auto = Vec::with_capacity(m);
    for_each_sample(RngStream::new(11, 5), m, |rng| {
        auto.push(rng.random::<u64>());
        Ok(())
    })
    .unwrap();
    let mut manual = Vec::with_capacity(m);
    let mut left = m;
    let mut w = 0u64;
    while left > 0 {
        let take = SAMPLES_PER_STREAM.min(left);
        let mut rng = RngStream::new(11, 5 + w).rng();
        for _ in 0..take {
            manual.push(rng.random::<u64>());
        }
        left -= take;
        w += 1;
    }
    assert_eq!(auto, manual, "chunked sample driver must equal its manual replay");

    println!(
        "[PASS] criterion 11: invariant representatives hold (shape envelope on 5 laws × \
         101 points, composed-shape dual route, pgf derivative cross-check, spine structural \
         identities on 2×2000 draws, RNG stream and chunk determinism)"
    );
}
