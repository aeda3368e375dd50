//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use ngls_core::frequency::{ConditionalLaw, FrequencyVector};
use ngls_core::gls::{Layout, Orientation, OrientationRule, ParametricRule};
use ngls_core::rational::frac;
use ngls_core::{Digit, Family, GlsSystem, Symbol};

pub fn luroth() -> GlsSystem {
    GlsSystem::luroth(Symbol::new("L"))
}

pub fn binary() -> GlsSystem {
    GlsSystem::binary(Symbol::new("B"))
}

pub fn power(p: f64) -> GlsSystem {
    GlsSystem::parametric(Symbol::new("P"), ParametricRule::Power(p), Layout::Descending, OrientationRule::Increasing)
        .unwrap()
}

/// Lengths (1/2, 1/3, 1/6) with mixed orientations.
pub fn three_branch(symbol: &str) -> GlsSystem {
    GlsSystem::finite(
        Symbol::new(symbol),
        &[
            (frac(1, 2), Orientation::Decreasing),
            (frac(1, 3), Orientation::Increasing),
            (frac(1, 6), Orientation::Decreasing),
        ],
    )
    .unwrap()
}

pub fn single(system: GlsSystem, law: ConditionalLaw) -> (Family, FrequencyVector) {
    let fam = Family::singleton(system);
    let alpha = FrequencyVector::singleton(&fam, law).unwrap();
    (fam, alpha)
}

/// Binary coefficients of (1+u)^(−t), used for the Lüroth tail expansion.
fn binomial_neg(t: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (-t - j as f64) / (j as f64 + 1.0))
}

/// Σ_{b>m} (b(b+1))^(−t) for t > 1/2: direct sum to B, then the integral of
/// x^(−2t)(1+1/x)^(−t) expanded in powers of 1/x with Euler–Maclaurin corrections.
pub fn luroth_tail(t: f64, m: u64) -> f64 {
    assert!(t > 0.5);
    let big: u64 = 20_000.max(m + 1);
    let f = |x: f64| (x * (x + 1.0)).powf(-t);
    let direct: f64 = (m + 1..=big).map(|b| f(b as f64)).sum();
    let bf = big as f64;
    let integral: f64 =
        (0..40).map(|k| binomial_neg(t, k) * bf.powf(1.0 - 2.0 * t - k as f64) / (2.0 * t + k as f64 - 1.0)).sum();
    let h = 1e-3 * bf;
    let fprime = (f(bf + h) - f(bf - h)) / (2.0 * h);
    direct + integral - 0.5 * f(bf) - fprime / 12.0
}

/// T_s = Σ_{b>m} N_b^(−t) computed without the library's closed forms.
pub fn tail_oracle(system: &GlsSystem, t: f64, m: u64) -> f64 {
    match system.digit_count() {
        Some(k) => {
            (m + 1..=k).map(|b| system.length_exact(b).map(|r| ngls_core::rational::to_f64(&r)).unwrap().powf(t)).sum()
        }
        None => {
            assert_eq!(system.rule_name(), "luroth");
            luroth_tail(t, m)
        }
    }
}

/// Cover sum by enumerating every word over {1..m} ∪ {⋆} along ω, where ⋆
/// stands for any digit above m and carries the tail weight.
pub fn brute_force_cover_sum(
    family: &Family,
    omega: &[usize],
    alpha: &FrequencyVector,
    t: f64,
    m: u64,
    eps: f64,
) -> f64 {
    let n = omega.len();
    let cuts: Vec<u64> = family.systems().iter().map(|s| s.digit_count().map_or(m, |k| k.min(m))).collect();
    let tails: Vec<f64> = family.systems().iter().map(|s| tail_oracle(s, t, m)).collect();
    let mut digits: Vec<(usize, Digit)> = Vec::new();
    for (s, &c) in cuts.iter().enumerate() {
        for b in 1..=c {
            digits.push((s, b));
        }
    }
    let mut total = 0.0;
    let mut word = vec![0u64; n];
    loop {
        let mut weight = 1.0;
        for (i, &s) in omega.iter().enumerate() {
            weight *= if word[i] == 0 { tails[s] } else { family.system(s).length(word[i]).powf(t) };
        }
        let admissible = eps >= 1.0
            || digits.iter().all(|&(s, b)| {
                let count = omega.iter().zip(&word).filter(|&(&o, &w)| o == s && w == b).count();
                (count as f64 / n as f64 - alpha.alpha(s, b)).abs() < eps
            });
        if admissible {
            total += weight;
        }
        let mut i = 0;
        loop {
            if i == n {
                return total;
            }
            word[i] += 1;
            if word[i] <= cuts[omega[i]] {
                break;
            }
            word[i] = 0;
            i += 1;
        }
    }
}

/// β for Lüroth with α_k = 2^(−k): entropy 2 log 2 over Σ 2^(−k) log(k(k+1)).
pub fn luroth_geometric_beta() -> f64 {
    let entropy = 2.0 * std::f64::consts::LN_2;
    let lyapunov: f64 = (1..=200).map(|k| 0.5f64.powi(k) * ((k * (k + 1)) as f64).ln()).sum();
    entropy / lyapunov
}

/// Shannon entropy over Lyapunov exponent for a finite GLS.
pub fn finite_beta(lengths: &[f64], weights: &[f64]) -> f64 {
    let h: f64 = weights.iter().filter(|&&w| w > 0.0).map(|w| -w * w.ln()).sum();
    let l: f64 = weights.iter().zip(lengths).map(|(w, len)| -w * len.ln()).sum();
    h / l
}
