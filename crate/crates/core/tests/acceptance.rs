//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use ngls_core::approximation::approximate_family;
use ngls_core::approximation::{approximate_system, measure_convergence_check, project_frequency};
use ngls_core::dimension::{beta, cover_rate, dim_formula, eta, exact_cover_sum, flmw_dim};
use ngls_core::expansion::roundtrip_check;
use ngls_core::frequency::{digit_frequency_table, woven_sequence, ConditionalLaw, FrequencyVector};
use ngls_core::gls::{Layout, OrientationRule, ParametricRule};
use ngls_core::measure::{kappa1, kappa2, EaSampler, FibreBernoulli};
use ngls_core::rational::{frac, Rational};
use ngls_core::{Exec, Family, GlsSystem, OmegaRule, Symbol};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn eta_reproduction() -> Outcome {
    let horizon = 1 << 20;
    let mut worst: f64 = 0.0;
    let cases: Vec<(GlsSystem, f64)> =
        vec![(luroth(), 0.5), (power(2.0), 0.5), (power(3.0), 1.0 / 3.0), (power(5.0), 0.2)];
    for (sys, want) in cases {
        let (est, took) = timed(|| eta(&sys, horizon).unwrap());
        check((est.value - want).abs() <= 1e-3, format!("{}: {} vs {want}", sys.rule_name(), est.value))?;
        check(took < Duration::from_secs(1), format!("{} took {took:?}", sys.rule_name()))?;
        worst = worst.max((est.value - want).abs());
    }
    let (est, took) = timed(|| eta(&binary(), horizon).unwrap());
    check(est.value == 0.0, format!("finite eta = {}", est.value))?;
    check(took < Duration::from_secs(1), format!("finite took {took:?}"))?;
    Ok(format!("max |eta - eta*| = {worst:.2e}"))
}

fn finite_dimension() -> Outcome {
    let (fam, a) = single(binary(), ConditionalLaw::uniform(2).unwrap());
    let d = dim_formula(&fam, &a, 200).unwrap().dim;
    check(d == 1.0, format!("binary uniform dim = {d}"))?;

    let (fam, a) = single(binary(), ConditionalLaw::finite(vec![frac(1, 4), frac(3, 4)]).unwrap());
    let skewed = dim_formula(&fam, &a, 200).unwrap().dim;
    let oracle = finite_beta(&[0.5, 0.5], &[0.25, 0.75]);
    check((skewed - 0.811278).abs() <= 1e-6, format!("(1/4,3/4) dim = {skewed}"))?;
    check((skewed - oracle).abs() <= 1e-12, format!("(1/4,3/4) dim = {skewed}, entropy oracle {oracle}"))?;

    let (fam, a) = single(three_branch("T"), ConditionalLaw::uniform(3).unwrap());
    let d = dim_formula(&fam, &a, 200).unwrap().dim;
    let hand = 3f64.ln() / ((2f64.ln() + 3f64.ln() + 6f64.ln()) / 3.0);
    check((d - hand).abs() <= 1e-10, format!("3-branch dim = {d}, hand formula {hand}"))?;
    Ok(format!("(1/4,3/4) -> {skewed:.9}; 3-branch -> {d:.12}"))
}

fn universal_lower_bound() -> Outcome {
    let (fam, a) = single(luroth(), ConditionalLaw::dirac(1).unwrap());
    let r = dim_formula(&fam, &a, 200).unwrap();
    check(r.beta == 0.0, format!("beta = {}", r.beta))?;
    check(r.dim == 0.5, format!("dim = {}", r.dim))?;
    Ok("beta = 0, dim = 0.5".into())
}

fn singleton_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..20 {
        let law = if i % 2 == 0 {
            let d = rng.random_range(3..40i64);
            ConditionalLaw::geometric(frac(rng.random_range(1..d), d)).unwrap()
        } else {
            ConditionalLaw::power(rng.random_range(1.2..4.0)).unwrap()
        };
        let (fam, a) = single(luroth(), law.clone());
        let general = dim_formula(&fam, &a, 200).unwrap();
        let flmw = flmw_dim(&fam, &a, 200).unwrap();
        check(general.beta_trace == flmw.trace, format!("trace mismatch for {law:?}"))?;
        check(general.dim == flmw.value, format!("{} vs {} for {law:?}", general.dim, flmw.value))?;
    }
    Ok("20 random laws, traces identical".into())
}

fn cover_sum_instances() -> Vec<(Family, FrequencyVector)> {
    let mixed = Family::new(vec![luroth(), binary()]).unwrap();
    let mixed_alpha = FrequencyVector::new(
        &mixed,
        vec![frac(1, 2), frac(1, 2)],
        vec![ConditionalLaw::geometric(frac(1, 2)).unwrap(), ConditionalLaw::uniform(2).unwrap()],
    )
    .unwrap();
    let pair = Family::new(vec![three_branch("T"), binary()]).unwrap();
    let pair_alpha = FrequencyVector::new(
        &pair,
        vec![frac(1, 3), frac(2, 3)],
        vec![
            ConditionalLaw::finite(vec![frac(1, 2), frac(1, 4), frac(1, 4)]).unwrap(),
            ConditionalLaw::finite(vec![frac(1, 4), frac(3, 4)]).unwrap(),
        ],
    )
    .unwrap();
    vec![
        single(binary(), ConditionalLaw::finite(vec![frac(1, 4), frac(3, 4)]).unwrap()),
        single(three_branch("T"), ConditionalLaw::uniform(3).unwrap()),
        single(luroth(), ConditionalLaw::geometric(frac(1, 2)).unwrap()),
        (mixed, mixed_alpha),
        (pair, pair_alpha),
    ]
}

fn cover_sum_oracle() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for (fam, alpha) in cover_sum_instances() {
        for n in 1..=6 {
            let omega = OmegaRule::Weave { targets: alpha.weights().to_vec() }.prefix(n);
            for m in [1u64, 2, 3, 6] {
                for t in [0.5, 0.8, 1.0] {
                    for eps in [0.1, 0.3, 1.0] {
                        let lib = exact_cover_sum(&fam, &omega, &alpha, t, m, eps, Exec::Parallel);
                        let has_luroth = omega.iter().any(|&s| fam.system(s).rule_name() == "luroth");
                        if has_luroth && t <= 0.5 {
                            check(lib.is_err(), "divergent Lüroth tail accepted")?;
                            continue;
                        }
                        let lib = lib.map_err(|e| e.to_string())?.sum();
                        let brute = brute_force_cover_sum(&fam, &omega, &alpha, t, m, eps);
                        let rel = if brute == 0.0 { lib.abs() } else { ((lib - brute) / brute).abs() };
                        check(rel <= 1e-8, format!("n={n} m={m} t={t} eps={eps}: {lib} vs {brute}"))?;
                        if t == 1.0 && eps >= 1.0 {
                            check((lib - 1.0).abs() <= 1e-12, format!("partition of unity: {lib}"))?;
                        }
                        worst = worst.max(rel);
                        compared += 1;
                    }
                }
            }
        }
    }
    let took = start.elapsed();
    check(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!("{compared} instances, max rel err {worst:.1e}, {took:.2?}"))
}

fn sign_witness() -> Outcome {
    let cases = [
        single(binary(), ConditionalLaw::uniform(2).unwrap()),
        single(luroth(), ConditionalLaw::geometric(frac(1, 2)).unwrap()),
    ];
    let mut notes = Vec::new();
    for (i, (fam, a)) in cases.iter().enumerate() {
        let dim = dim_formula(fam, a, 200).unwrap().dim;
        let above = cover_rate(fam, a, dim + 0.05, 50).unwrap().rate;
        let below = cover_rate(fam, a, (dim - 0.05).max(0.0), 50).unwrap().rate;
        check(above < 0.0 && below > 0.0, format!("case {i}: g(dim+) = {above}, g(dim-) = {below}"))?;
        if i == 0 {
            let closed = 0.05 * std::f64::consts::LN_2;
            check((above + closed).abs() <= 1e-10, format!("binary g(1.05) = {above}"))?;
            check((below - closed).abs() <= 1e-10, format!("binary g(0.95) = {below}"))?;
        }
        notes.push(format!("{above:+.4}/{below:+.4}"));
    }
    Ok(notes.join(", "))
}

fn local_dimension() -> Outcome {
    let (took_ok, took) = timed(|| -> Result<String, String> {
        let cases = [
            (
                single(binary(), ConditionalLaw::finite(vec![frac(1, 4), frac(3, 4)]).unwrap()),
                finite_beta(&[0.5, 0.5], &[0.25, 0.75]),
            ),
            (single(luroth(), ConditionalLaw::geometric(frac(1, 2)).unwrap()), luroth_geometric_beta()),
        ];
        let mut worst: f64 = 0.0;
        for ((fam, a), target) in cases {
            let lib_beta = beta(&fam, &a, 200).unwrap().beta;
            check((lib_beta - target).abs() < 1e-6, format!("library beta {lib_beta} vs series {target}"))?;
            let m = FibreBernoulli::new(fam, a, OmegaRule::constant(0)).unwrap();
            let seeds: Vec<u64> = (0..10).collect();
            let ratios = Exec::Parallel.map(&seeds, |&seed| {
                let (omega, word) = m.sample_level_set(100_000, seed);
                m.local_dimension_trace(&omega, &word, 100_000).unwrap().last().unwrap().ratio
            });
            for (seed, r) in ratios.iter().enumerate() {
                check((r - target).abs() <= 0.02, format!("seed {seed}: ratio {r} vs beta {target}"))?;
                worst = worst.max((r - target).abs());
            }
        }
        Ok(format!("max |ratio - beta| = {worst:.4}"))
    });
    let msg = took_ok?;
    check(took < Duration::from_secs(30), format!("took {took:?}"))?;
    Ok(format!("{msg}, {took:.2?}"))
}

fn eta_lower_machinery() -> Outcome {
    check(kappa1(0.5, 0.5).unwrap() == 3, "kappa1(1/2,1/2) != 3")?;
    check(kappa2(&luroth(), 0.5, 1 << 20).unwrap() == 2, "Lüroth kappa2(1/2) != 2")?;
    let fam = Family::new(vec![luroth(), binary()]).unwrap();
    let alpha = FrequencyVector::new(
        &fam,
        vec![frac(3, 4), frac(1, 4)],
        vec![ConditionalLaw::dirac(1).unwrap(), ConditionalLaw::uniform(2).unwrap()],
    )
    .unwrap();
    let omega = OmegaRule::Weave { targets: alpha.weights().to_vec() }.prefix(2000);
    let k_max = 40;
    let sampler =
        EaSampler::new(&fam, &alpha, omega, 1.5, 0.9, 0.1, k_max, Exec::Parallel).map_err(|e| e.to_string())?;
    let depth = sampler.schedule.theta(k_max).ok_or("theta(40) beyond the prefix")?;
    let threshold = 0.9 * fam.eta_t() / 1.1 - 0.05;
    let seeds: Vec<u64> = (0..100).collect();
    let results = Exec::Parallel.map(&seeds, |&seed| -> Result<f64, String> {
        let word = sampler.sample(depth, seed).map_err(|e| e.to_string())?;
        for k in sampler.kappa..=k_max {
            let pos = sampler.schedule.theta(k).unwrap();
            let (lo, hi, _) = sampler.window(k);
            let b = word[pos - 1];
            let upper = 1u64 << k;
            let width = 2f64.powf(0.9 * k as f64);
            check(b <= upper && (b as f64) > upper as f64 - width, format!("seed {seed}, k {k}: digit {b}"))?;
            check((lo..=hi).contains(&b), format!("seed {seed}, k {k}: {b} outside [{lo}, {hi}]"))?;
        }
        let trace = sampler.eta_lower_trace(&word).map_err(|e| e.to_string())?;
        Ok(trace.last().ok_or("empty trace")?.ratio)
    });
    let mut worst = f64::INFINITY;
    for (seed, r) in results.into_iter().enumerate() {
        let r = r?;
        check(r >= threshold, format!("seed {seed}: final ratio {r:.4} < {threshold:.4}"))?;
        worst = worst.min(r);
    }
    Ok(format!("kappa = {}, worst final ratio {worst:.4} >= {threshold:.4}", sampler.kappa))
}

fn spectrum_construction() -> Outcome {
    let fam = Family::new(vec![binary(), luroth()]).unwrap();
    let alpha = FrequencyVector::new(
        &fam,
        vec![frac(2, 5), frac(3, 5)],
        vec![
            ConditionalLaw::finite(vec![frac(1, 4), frac(3, 4)]).unwrap(),
            ConditionalLaw::geometric(frac(1, 2)).unwrap(),
        ],
    )
    .unwrap();
    let (out, took) = timed(|| -> Result<f64, String> {
        let n = 1_000_000;
        let omega = OmegaRule::Weave { targets: alpha.weights().to_vec() }.prefix(n);
        let word = woven_sequence(&fam, &alpha, &omega, Exec::Parallel).map_err(|e| e.to_string())?;
        let table = digit_frequency_table(&fam, &alpha, &omega, &word, 64).map_err(|e| e.to_string())?;
        let worst = table.iter().filter(|r| r.alpha >= 1e-3).map(|r| r.deviation).fold(0.0, f64::max);
        check(table.iter().filter(|r| r.alpha >= 1e-3).count() >= 10, "too few digits checked")?;
        Ok(worst)
    });
    let worst = out?;
    check(worst < 1e-2, format!("max deviation {worst}"))?;
    check(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!("max deviation {worst:.2e}, {took:.2?}"))
}

fn approximation_suite() -> Outcome {
    let l1 = approximate_system(&luroth(), 1).unwrap().breakpoints().ok_or("inexact T^(1)")?;
    check(l1 == vec![frac(1, 2)], format!("T^(1) breakpoints {l1:?}"))?;
    let l2 = approximate_system(&luroth(), 2).unwrap().breakpoints().ok_or("inexact T^(2)")?;
    check(l2 == vec![frac(1, 3), frac(1, 2)], format!("T^(2) breakpoints {l2:?}"))?;

    let fam = Family::new(vec![luroth(), binary()]).unwrap();
    let alpha = FrequencyVector::new(
        &fam,
        vec![frac(1, 2), frac(1, 2)],
        vec![
            ConditionalLaw::geometric(frac(1, 3)).unwrap(),
            ConditionalLaw::finite(vec![frac(1, 4), frac(3, 4)]).unwrap(),
        ],
    )
    .unwrap();
    for m in 1..=50 {
        let approx = approximate_family(&fam, m).unwrap();
        let total: Option<Rational> = project_frequency(&fam, &alpha, &approx).unwrap().total_exact();
        check(total.as_ref().is_some_and(|t| t.is_one()), format!("m = {m}: total {total:?}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..100 {
        let len = rng.random_range(1..8usize);
        let omega: Vec<usize> = (0..len).map(|_| rng.random_range(0..2)).collect();
        let word: Vec<u64> =
            omega.iter().map(|&s| if s == 0 { rng.random_range(1..12) } else { rng.random_range(1..=2) }).collect();
        let top = word.iter().copied().max().unwrap();
        let table = measure_convergence_check(&fam, &omega, &alpha, &word, top + 1..=top + 4).unwrap();
        for row in &table.rows {
            check(row.equal && row.exact_match == Some(true), format!("word {i} {word:?}, m = {}: {row:?}", row.m))?;
        }
    }
    Ok("breakpoints exact, totals exact for m <= 50, 100 words stabilized".into())
}

fn roundtrip() -> Outcome {
    let alt = GlsSystem::parametric(
        Symbol::new("A"),
        ParametricRule::Luroth,
        Layout::Descending,
        OrientationRule::Alternating,
    )
    .unwrap();
    let geo = GlsSystem::parametric(
        Symbol::new("G"),
        ParametricRule::Geometric(frac(1, 3)),
        Layout::Ascending,
        OrientationRule::Decreasing,
    )
    .unwrap();
    let fam = Family::new(vec![luroth(), binary(), three_branch("T"), alt, geo]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q: i64 = 1_000_000_007;
    let mut failures = Vec::new();
    for i in 0..1000 {
        let x = frac(rng.random_range(1..q), q);
        let omega: Vec<usize> = (0..20).map(|_| rng.random_range(0..fam.len())).collect();
        match roundtrip_check(&fam, &omega, &x, 20) {
            Ok(r) if r.passed && r.residual <= r.ffi_length => {}
            Ok(r) => failures.push(format!("#{i}: residual {} > {}", r.residual, r.ffi_length)),
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    check(failures.is_empty(), format!("{} failures, first: {}", failures.len(), failures.first().map_or("", |s| s)))?;
    Ok("1000 pairs, 0 failures".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("eta reproduction", eta_reproduction),
        ("finite dimension formula", finite_dimension),
        ("universal lower bound 1/2", universal_lower_bound),
        ("singleton reduction", singleton_reduction),
        ("cover-sum oracle", cover_sum_oracle),
        ("upper-bound sign witness", sign_witness),
        ("beta lower bound via measures", local_dimension),
        ("eta lower-bound machinery", eta_lower_machinery),
        ("spectrum construction", spectrum_construction),
        ("approximation suite", approximation_suite),
        ("expansion roundtrip", roundtrip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
