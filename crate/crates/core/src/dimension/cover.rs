use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frequency::{digits_up_to, FrequencyVector};
use crate::gls::{symbol_counts, Digit, Family};
use crate::special::{ln_factorial, log_sum_exp};

use super::beta::{require_compatible, x_log_x};

/// Upper bound on Π_d (number of admissible n_d) before enumeration starts.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// Count vectors (n_d)_{d∈D_m} admissible at level n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountVectors {
    pub n: usize,
    pub m: u64,
    pub epsilon: f64,
    /// D_m, in the coordinate order of `vectors`.
    pub digits: Vec<(usize, Digit)>,
    pub tau: Vec<u64>,
    pub vectors: Vec<Vec<u64>>,
}

/// |n_d/n − α_d| < ε, with ε ≥ 1 read as no constraint.
pub fn in_window(count: u64, n: usize, alpha_d: f64, epsilon: f64) -> bool {
    epsilon >= 1.0 || (count as f64 / n as f64 - alpha_d).abs() < epsilon
}

/// Exhaustive list of the vectors in the window with Σ_{b≤m} n_{(s,b)} ≤ τ_s.
pub fn enumerate_count_vectors(
    family: &Family,
    omega: &[usize],
    alpha: &FrequencyVector,
    m: u64,
    epsilon: f64,
    exec: Exec,
) -> Result<CountVectors> {
    require_compatible(family, alpha)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("cut m must be at least 1".into()));
    }
    for &s in omega {
        family.check_symbol(s)?;
    }
    let n = omega.len();
    let tau = symbol_counts(omega, family.len());
    let digits = digits_up_to(family, m);
    let allowed: Vec<Vec<u64>> = digits
        .iter()
        .map(|&(s, b)| {
            let a = alpha.alpha(s, b);
            (0..=tau[s]).filter(|&c| n > 0 && in_window(c, n, a, epsilon) || n == 0 && c == 0).collect()
        })
        .collect();
    let candidates: f64 = allowed.iter().map(|a| a.len() as f64).product();
    if candidates > ENUMERATION_CAP as f64 {
        return Err(Error::EnumerationCap { candidates, cap: ENUMERATION_CAP });
    }
    let vectors = if digits.is_empty() {
        vec![vec![]]
    } else {
        let first: Vec<u64> = allowed[0].clone();
        exec.map(&first, |&c0| {
            let mut used = vec![0u64; family.len()];
            used[digits[0].0] = c0;
            let mut out = Vec::new();
            let mut current = vec![c0];
            extend(&digits, &allowed, &tau, &mut used, &mut current, &mut out);
            out
        })
        .into_iter()
        .flatten()
        .collect()
    };
    Ok(CountVectors { n, m, epsilon, digits, tau, vectors })
}

fn extend(
    digits: &[(usize, Digit)],
    allowed: &[Vec<u64>],
    tau: &[u64],
    used: &mut [u64],
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    let i = current.len();
    if i == digits.len() {
        out.push(current.clone());
        return;
    }
    let s = digits[i].0;
    for &c in &allowed[i] {
        if used[s] + c > tau[s] {
            break;
        }
        used[s] += c;
        current.push(c);
        extend(digits, allowed, tau, used, current, out);
        current.pop();
        used[s] -= c;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverSum {
    /// log of the cover sum (−∞ when no vector is admissible).
    pub log_sum: f64,
    pub vectors: usize,
    pub tau: Vec<u64>,
    /// Σ_{b>m} N_{s,b}^{−t} per symbol.
    pub tail_sums: Vec<f64>,
}

impl CoverSum {
    pub fn sum(&self) -> f64 {
        self.log_sum.exp()
    }
}

fn tail_sums(family: &Family, t: f64, m: u64, needed: &[bool]) -> Result<Vec<f64>> {
    (0..family.len())
        .map(|s| match family.system(s).power_tail(t, m) {
            Some(v) => Ok(v),
            None if !needed[s] => Ok(f64::NAN),
            None => Err(Error::DivergentTail { symbol: family.symbol(s).to_string(), t }),
        })
        .collect()
}

/// Σ over admissible count vectors of Π N_d^{−t n_d} · Π_s T_s^{τ_s−n_s} ·
/// Π_s τ_s! / (Π_d n_d! Π_s (τ_s−n_s)!), in log space with exact log-factorials.
#[allow(clippy::too_many_arguments)]
pub fn exact_cover_sum(
    family: &Family,
    omega: &[usize],
    alpha: &FrequencyVector,
    t: f64,
    m: u64,
    epsilon: f64,
    exec: Exec,
) -> Result<CoverSum> {
    let cv = enumerate_count_vectors(family, omega, alpha, m, epsilon, exec)?;
    let needed: Vec<bool> = cv.tau.iter().map(|&t| t > 0).collect();
    let tails = tail_sums(family, t, m, &needed)?;
    let log_tails: Vec<f64> = tails.iter().map(|v| v.ln()).collect();
    let log_n: Vec<f64> = cv.digits.iter().map(|&(s, b)| family.system(s).log_n(b)).collect();
    let symbols = family.len();
    let terms = exec.map(&cv.vectors, |v| {
        let mut n_s = vec![0u64; symbols];
        let mut acc = 0.0;
        for (i, &c) in v.iter().enumerate() {
            n_s[cv.digits[i].0] += c;
            acc -= ln_factorial(c) + t * c as f64 * log_n[i];
        }
        for s in 0..symbols {
            let rest = cv.tau[s] - n_s[s];
            acc += ln_factorial(cv.tau[s]) - ln_factorial(rest);
            if rest > 0 {
                acc += rest as f64 * log_tails[s];
            }
        }
        acc
    });
    Ok(CoverSum { log_sum: log_sum_exp(&terms), vectors: cv.vectors.len(), tau: cv.tau, tail_sums: tails })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverRate {
    pub t: f64,
    pub m: u64,
    pub rate: f64,
    pub lyapunov: f64,
    pub entropy: f64,
    pub tail_term: f64,
}

/// Leading-order exponent g(t;m) of the cover sum.
pub fn cover_rate(family: &Family, alpha: &FrequencyVector, t: f64, m: u64) -> Result<CoverRate> {
    require_compatible(family, alpha)?;
    if m == 0 {
        return Err(Error::InvalidParameter("cut m must be at least 1".into()));
    }
    let mut lyapunov = 0.0;
    let mut entropy: f64 = (0..family.len()).map(|s| x_log_x(alpha.weight(s))).sum();
    let mut tail_term = 0.0;
    for s in 0..family.len() {
        let sys = family.system(s);
        for b in 1..=sys.cut(m) {
            let a = alpha.alpha(s, b);
            if a > 0.0 {
                lyapunov += a * sys.log_n(b);
                entropy -= a * a.ln();
            }
        }
        let tail_alpha = alpha.tail_mass(s, m);
        let tail_sum = sys.power_tail(t, m);
        match tail_sum {
            None => return Err(Error::DivergentTail { symbol: family.symbol(s).to_string(), t }),
            Some(ts) if tail_alpha > 0.0 => tail_term += tail_alpha * ts.ln() - tail_alpha * tail_alpha.ln(),
            Some(_) => {}
        }
    }
    Ok(CoverRate { t, m, rate: -t * lyapunov + tail_term + entropy, lyapunov, entropy, tail_term })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateResidual {
    pub n: usize,
    /// (1/n) log of the cover sum.
    pub normalized_log_sum: f64,
    pub rate: f64,
    /// Sum of the correction terms dropped from the leading order.
    pub residual: f64,
}

/// Compares (1/n) log of the exact cover sum against g(t;m).
pub fn rate_residual(
    family: &Family,
    omega: &[usize],
    alpha: &FrequencyVector,
    t: f64,
    m: u64,
    epsilon: f64,
    exec: Exec,
) -> Result<RateResidual> {
    let n = omega.len().max(1);
    let sum = exact_cover_sum(family, omega, alpha, t, m, epsilon, exec)?;
    let rate = cover_rate(family, alpha, t, m)?.rate;
    let normalized_log_sum = sum.log_sum / n as f64;
    Ok(RateResidual { n, normalized_log_sum, rate, residual: normalized_log_sum - rate })
}
