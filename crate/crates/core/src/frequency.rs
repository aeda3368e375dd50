//! Frequency vectors, digit counters, the greedy frequency sequence and weaving.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gls::{symbol_counts, Digit, Family, OmegaRule};
use crate::rational::{self, Rational};
use crate::special::{hurwitz_zeta, simpson, zeta};

/// Terms summed directly before the log-power tail switches to quadrature.
const LOG_POWER_DIRECT: usize = 10_000;

/// Shape of the conditional law beyond the explicit head.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    Zero,
    /// j ↦ (1−r) r^{j−1}
    Geometric(Rational),
    /// j ↦ j^{−p}/ζ(p), p > 1
    Power(f64),
    /// j ↦ 1/(j (log(j+2))^q) normalized, q > 1
    LogPower(f64),
}

#[derive(Clone, Debug)]
enum Shape {
    Zero,
    Geometric { r: Rational, r_f64: f64 },
    Power { p: f64, zeta_p: f64 },
    LogPower { q: f64, total: f64, prefix: Arc<Vec<f64>> },
}

impl Shape {
    fn new(tail: &Tail) -> Result<Shape> {
        Ok(match tail {
            Tail::Zero => Shape::Zero,
            Tail::Geometric(r) => {
                if !r.is_positive() || *r >= Rational::one() {
                    return Err(Error::InvalidFrequency(format!(
                        "geometric tail needs r in (0,1), got {}",
                        rational::format(r)
                    )));
                }
                Shape::Geometric { r: r.clone(), r_f64: rational::to_f64(r) }
            }
            Tail::Power(p) => {
                if !(p.is_finite() && *p > 1.0) {
                    return Err(Error::InvalidFrequency(format!("power tail needs p > 1, got {p}")));
                }
                Shape::Power { p: *p, zeta_p: zeta(*p) }
            }
            Tail::LogPower(q) => {
                if !(q.is_finite() && *q > 1.0) {
                    return Err(Error::InvalidFrequency(format!("log-power tail needs q > 1, got {q}")));
                }
                let mut prefix = Vec::with_capacity(LOG_POWER_DIRECT + 1);
                let mut acc = 0.0;
                prefix.push(0.0);
                for j in 1..=LOG_POWER_DIRECT {
                    acc += log_power_term(*q, j as f64);
                    prefix.push(acc);
                }
                let total = acc + log_power_remainder(*q, LOG_POWER_DIRECT as f64 + 1.0);
                Shape::LogPower { q: *q, total, prefix: Arc::new(prefix) }
            }
        })
    }

    /// Probability of tail position j ≥ 1 (log).
    fn log_weight(&self, j: u64) -> f64 {
        let x = j as f64;
        match self {
            Shape::Zero => f64::NEG_INFINITY,
            Shape::Geometric { r_f64, .. } => (1.0 - r_f64).ln() + (x - 1.0) * r_f64.ln(),
            Shape::Power { p, zeta_p } => -p * x.ln() - zeta_p.ln(),
            Shape::LogPower { q, total, .. } => -x.ln() - q * (x + 2.0).ln().ln() - total.ln(),
        }
    }

    /// Σ_{j>k} weight(j).
    fn beyond(&self, k: u64) -> f64 {
        match self {
            Shape::Zero => 0.0,
            Shape::Geometric { r_f64, .. } => r_f64.powf(k as f64),
            Shape::Power { p, zeta_p } => {
                if k == 0 {
                    1.0
                } else {
                    hurwitz_zeta(*p, k as f64 + 1.0) / zeta_p
                }
            }
            Shape::LogPower { q, total, prefix } => {
                if (k as usize) < prefix.len() {
                    (total - prefix[k as usize]) / total
                } else {
                    log_power_remainder(*q, k as f64 + 1.0) / total
                }
            }
        }
    }

    /// Smallest j ≥ 1 with Σ_{i≤j} weight(i) > v.
    fn invert(&self, v: f64) -> u64 {
        match self {
            Shape::Zero => 1,
            Shape::Geometric { r_f64, .. } => {
                let j = 1.0 + ((1.0 - v).ln() / r_f64.ln()).floor();
                if j.is_finite() && j >= 1.0 {
                    j.min(9.0e18) as u64
                } else {
                    1
                }
            }
            _ => {
                let target = 1.0 - v;
                let mut hi = 1u64;
                while self.beyond(hi) >= target {
                    hi = hi.saturating_mul(2);
                    if hi == u64::MAX {
                        return hi;
                    }
                }
                let mut lo = 1u64;
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.beyond(mid) < target {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                lo
            }
        }
    }
}

fn log_power_term(q: f64, x: f64) -> f64 {
    1.0 / (x * (x + 2.0).ln().powf(q))
}

/// Σ_{j≥m} 1/(j log(j+2)^q) via Euler–Maclaurin. The integral splits as
/// 1/((x+2)L^q), which integrates in closed form, plus 2/(x(x+2)L^q),
/// integrated numerically after x = m/u.
fn log_power_remainder(q: f64, m: f64) -> f64 {
    let l = (m + 2.0).ln();
    let closed = l.powf(1.0 - q) / (q - 1.0);
    let correction =
        simpson(|u| if u == 0.0 { 0.0 } else { 2.0 / ((m + 2.0 * u) * (m / u + 2.0).ln().powf(q)) }, 0.0, 1.0, 4000);
    let g = log_power_term(q, m);
    let dg = -g * (1.0 / m + q / ((m + 2.0) * l));
    closed + correction + 0.5 * g - dg / 12.0
}

/// Per-symbol digit law b ↦ α_{(s,b)}/α_s: an explicit rational head on
/// digits 1..=m₀ and a tail carrying the remaining mass.
#[derive(Clone, Debug)]
pub struct ConditionalLaw {
    head: Vec<Rational>,
    head_f64: Vec<f64>,
    head_cdf: Vec<f64>,
    tail: Tail,
    shape: Shape,
    tail_mass: Rational,
    tail_mass_f64: f64,
}

impl PartialEq for ConditionalLaw {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.tail == other.tail
    }
}

impl ConditionalLaw {
    pub fn new(head: Vec<Rational>, tail: Tail) -> Result<Self> {
        if let Some(i) = head.iter().position(|h| h.is_negative()) {
            return Err(Error::InvalidFrequency(format!("negative mass on digit {}", i + 1)));
        }
        let head_total = head.iter().fold(Rational::zero(), |a, h| a + h);
        let tail_mass = Rational::one() - &head_total;
        if tail_mass.is_negative() {
            return Err(Error::InvalidFrequency(format!("head mass {} exceeds 1", rational::format(&head_total))));
        }
        if tail == Tail::Zero && !tail_mass.is_zero() {
            return Err(Error::InvalidFrequency(format!(
                "masses sum to {} with no tail",
                rational::format(&head_total)
            )));
        }
        let shape = Shape::new(&tail)?;
        let head_f64: Vec<f64> = head.iter().map(rational::to_f64).collect();
        let mut acc = Rational::zero();
        let head_cdf = head
            .iter()
            .map(|h| {
                acc += h;
                rational::to_f64(&acc)
            })
            .collect();
        let tail_mass_f64 = rational::to_f64(&tail_mass);
        Ok(ConditionalLaw { head, head_f64, head_cdf, tail, shape, tail_mass, tail_mass_f64 })
    }

    pub fn finite(head: Vec<Rational>) -> Result<Self> {
        Self::new(head, Tail::Zero)
    }

    pub fn dirac(b: Digit) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidFrequency("digits start at 1".into()));
        }
        let mut head = vec![Rational::zero(); b as usize];
        head[b as usize - 1] = Rational::one();
        Self::finite(head)
    }

    pub fn uniform(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidFrequency("uniform law needs at least one digit".into()));
        }
        Self::finite(vec![rational::frac(1, k as i64); k as usize])
    }

    /// b ↦ (1−r) r^{b−1}.
    pub fn geometric(r: Rational) -> Result<Self> {
        Self::new(vec![], Tail::Geometric(r))
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(vec![], Tail::Power(p))
    }

    pub fn log_power(q: f64) -> Result<Self> {
        Self::new(vec![], Tail::LogPower(q))
    }

    pub fn head(&self) -> &[Rational] {
        &self.head
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn head_len(&self) -> u64 {
        self.head.len() as u64
    }

    fn has_tail(&self) -> bool {
        !matches!(self.shape, Shape::Zero) && !self.tail_mass.is_zero()
    }

    /// Largest digit of positive mass when the support is finite.
    pub fn support_max(&self) -> Option<Digit> {
        if self.has_tail() {
            None
        } else {
            Some(self.head.iter().rposition(|h| h.is_positive()).map_or(0, |i| i as Digit + 1))
        }
    }

    pub fn prob(&self, b: Digit) -> f64 {
        let m0 = self.head_len();
        if b <= m0 {
            self.head_f64[(b - 1) as usize]
        } else if self.has_tail() {
            self.tail_mass_f64 * self.shape.log_weight(b - m0).exp()
        } else {
            0.0
        }
    }

    pub fn log_prob(&self, b: Digit) -> f64 {
        let m0 = self.head_len();
        if b <= m0 {
            self.head_f64[(b - 1) as usize].ln()
        } else if self.has_tail() {
            self.tail_mass_f64.ln() + self.shape.log_weight(b - m0)
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn prob_exact(&self, b: Digit) -> Option<Rational> {
        let m0 = self.head_len();
        if b <= m0 {
            return Some(self.head[(b - 1) as usize].clone());
        }
        if !self.has_tail() {
            return Some(Rational::zero());
        }
        match &self.shape {
            Shape::Geometric { r, .. } if b - m0 <= crate::gls::EXACT_GEOMETRIC_DIGIT => {
                Some(&self.tail_mass * (Rational::one() - r) * rational::pow(r, b - m0 - 1))
            }
            _ => None,
        }
    }

    /// Σ_{b>m} p(b).
    pub fn mass_above(&self, m: u64) -> f64 {
        let m0 = self.head_len();
        let tail = if self.has_tail() { self.tail_mass_f64 * self.shape.beyond(m.saturating_sub(m0)) } else { 0.0 };
        if m >= m0 {
            tail
        } else {
            self.head_f64[m as usize..].iter().sum::<f64>() + tail
        }
    }

    pub fn mass_above_exact(&self, m: u64) -> Option<Rational> {
        let m0 = self.head_len();
        let tail = if !self.has_tail() {
            Rational::zero()
        } else {
            match &self.shape {
                Shape::Geometric { r, .. } if m.saturating_sub(m0) <= crate::gls::EXACT_GEOMETRIC_DIGIT => {
                    &self.tail_mass * rational::pow(r, m.saturating_sub(m0))
                }
                _ => return None,
            }
        };
        Some(if m >= m0 { tail } else { self.head[m as usize..].iter().fold(tail, |a, h| a + h) })
    }

    /// Inverse-CDF sample from u ∈ [0,1).
    pub fn sample(&self, u: f64) -> Digit {
        let idx = self.head_cdf.partition_point(|&c| c <= u);
        if idx < self.head.len() {
            return idx as Digit + 1;
        }
        if !self.has_tail() {
            return self.support_max().unwrap_or(1).max(1);
        }
        let base = self.head_cdf.last().copied().unwrap_or(0.0);
        let v = ((u - base) / self.tail_mass_f64).clamp(0.0, 1.0 - f64::EPSILON);
        self.head_len() + self.shape.invert(v)
    }

    /// Largest probability and the smallest digit attaining it.
    fn max_weight(&self) -> f64 {
        let head = self.head_f64.iter().copied().fold(0.0, f64::max);
        if self.has_tail() {
            head.max(self.prob(self.head_len() + 1))
        } else {
            head
        }
    }
}

/// α over D = {(s,b)}: symbol weights α_s times conditional laws.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyVector {
    weights: Vec<Rational>,
    weights_f64: Vec<f64>,
    laws: Vec<ConditionalLaw>,
}

impl FrequencyVector {
    pub fn new(family: &Family, weights: Vec<Rational>, laws: Vec<ConditionalLaw>) -> Result<Self> {
        if weights.len() != family.len() || laws.len() != family.len() {
            return Err(Error::InvalidFrequency(format!(
                "{} weights and {} laws for {} symbols",
                weights.len(),
                laws.len(),
                family.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidFrequency("negative symbol weight".into()));
        }
        let total = weights.iter().fold(Rational::zero(), |a, w| a + w);
        if !total.is_one() {
            return Err(Error::InvalidFrequency(format!("symbol weights sum to {}", rational::format(&total))));
        }
        for (s, law) in laws.iter().enumerate() {
            if let Some(n) = family.system(s).digit_count() {
                match law.support_max() {
                    Some(top) if top <= n => {}
                    _ => {
                        return Err(Error::InvalidFrequency(format!(
                            "law for symbol {} puts mass beyond its {n} digits",
                            family.symbol(s)
                        )))
                    }
                }
            }
        }
        let weights_f64 = weights.iter().map(rational::to_f64).collect();
        Ok(FrequencyVector { weights, weights_f64, laws })
    }

    pub fn singleton(family: &Family, law: ConditionalLaw) -> Result<Self> {
        Self::new(family, vec![Rational::one()], vec![law])
    }

    pub fn symbols(&self) -> usize {
        self.weights.len()
    }

    /// α_s.
    pub fn weight(&self, s: usize) -> f64 {
        self.weights_f64[s]
    }

    pub fn weight_exact(&self, s: usize) -> &Rational {
        &self.weights[s]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights_f64
    }

    pub fn law(&self, s: usize) -> &ConditionalLaw {
        &self.laws[s]
    }

    /// α_{(s,b)}.
    pub fn alpha(&self, s: usize, b: Digit) -> f64 {
        self.weights_f64[s] * self.laws[s].prob(b)
    }

    pub fn log_alpha(&self, s: usize, b: Digit) -> f64 {
        self.weights_f64[s].ln() + self.laws[s].log_prob(b)
    }

    pub fn alpha_exact(&self, s: usize, b: Digit) -> Option<Rational> {
        self.laws[s].prob_exact(b).map(|p| &self.weights[s] * p)
    }

    /// Σ_{b>m} α_{(s,b)}.
    pub fn tail_mass(&self, s: usize, m: u64) -> f64 {
        self.weights_f64[s] * self.laws[s].mass_above(m)
    }

    pub fn tail_mass_exact(&self, s: usize, m: u64) -> Option<Rational> {
        self.laws[s].mass_above_exact(m).map(|t| &self.weights[s] * t)
    }

    /// Σ_d α_d, exactly, when every tail has a rational closed form.
    pub fn total_exact(&self) -> Option<Rational> {
        (0..self.symbols()).try_fold(Rational::zero(), |acc, s| self.tail_mass_exact(s, 0).map(|t| acc + t))
    }
}

/// Condition (†): every symbol carries positive mass.
pub fn check_dagger(alpha: &FrequencyVector) -> bool {
    alpha.weights_f64.iter().all(|&w| w > 0.0)
}

/// τ_d and τ_s counters along a word.
#[derive(Clone, Debug, Default)]
pub struct TauCounter {
    symbols: Vec<u64>,
    digits: Vec<HashMap<Digit, u64>>,
    n: u64,
}

impl TauCounter {
    pub fn new(symbols: usize) -> Self {
        TauCounter { symbols: vec![0; symbols], digits: vec![HashMap::new(); symbols], n: 0 }
    }

    pub fn from_word(symbols: usize, omega: &[usize], word: &[Digit]) -> Self {
        let mut c = Self::new(symbols);
        for (&s, &b) in omega.iter().zip(word) {
            c.push(s, b);
        }
        c
    }

    pub fn push(&mut self, s: usize, b: Digit) {
        self.symbols[s] += 1;
        *self.digits[s].entry(b).or_insert(0) += 1;
        self.n += 1;
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tau_symbol(&self, s: usize) -> u64 {
        self.symbols[s]
    }

    pub fn tau_digit(&self, s: usize, b: Digit) -> u64 {
        self.digits[s].get(&b).copied().unwrap_or(0)
    }
}

/// Greedy deficit sequence: at step k pick the digit maximizing k·w_d − count_d
/// among digits with w_d ≥ min(1/k², max w), ties to the smallest digit.
pub fn frequency_sequence(law: &ConditionalLaw, n: usize) -> Vec<Digit> {
    let mut counts: Vec<u64> = Vec::new();
    let mut out = Vec::with_capacity(n);
    let w_max = law.max_weight();
    let m0 = law.head_len();
    let tail = law.has_tail();
    for k in 1..=n {
        let kf = k as f64;
        let threshold = (1.0 / (kf * kf)).min(w_max);
        let count = |d: Digit, counts: &Vec<u64>| counts.get(d as usize - 1).copied().unwrap_or(0) as f64;
        let mut best = f64::NEG_INFINITY;
        let mut best_d = 0;
        for (i, &w) in law.head_f64.iter().enumerate() {
            let d = i as Digit + 1;
            if w > 0.0 && w >= threshold {
                let score = kf * w - count(d, &counts);
                if score > best {
                    best = score;
                    best_d = d;
                }
            }
        }
        if tail {
            // tail weights decrease, so the scan stops once neither activation
            // nor the score bound k·w_d can be met
            let mut d = m0 + 1;
            loop {
                let w = law.prob(d);
                if w < threshold || w == 0.0 || kf * w <= best {
                    break;
                }
                let score = kf * w - count(d, &counts);
                if score > best {
                    best = score;
                    best_d = d;
                }
                d += 1;
            }
        }
        let idx = best_d as usize - 1;
        if counts.len() <= idx {
            counts.resize(idx + 1, 0);
        }
        counts[idx] += 1;
        out.push(best_d);
    }
    out
}

/// b_n = the τ_{ω_n}(ω,n)-th element of stream ω_n.
pub fn weave(family: &Family, omega: &[usize], streams: &[Vec<Digit>]) -> Result<Vec<Digit>> {
    let mut used = vec![0usize; streams.len()];
    omega
        .iter()
        .map(|&s| {
            let stream = streams.get(s).ok_or_else(|| Error::UnknownSymbol(format!("#{s}")))?;
            let b = *stream.get(used[s]).ok_or_else(|| Error::StreamExhausted(family.symbol(s).to_string()))?;
            used[s] += 1;
            Ok(b)
        })
        .collect()
}

/// Weave of per-symbol greedy frequency sequences along an ω prefix.
pub fn woven_sequence(family: &Family, alpha: &FrequencyVector, omega: &[usize], exec: Exec) -> Result<Vec<Digit>> {
    let tau = symbol_counts(omega, family.len());
    let symbols: Vec<usize> = (0..family.len()).collect();
    let streams = exec.map(&symbols, |&s| frequency_sequence(alpha.law(s), tau[s] as usize));
    weave(family, omega, &streams)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumVerdict {
    pub consistent: bool,
    pub horizon: usize,
    pub tolerance: f64,
    /// (n, |τ_s(ω,n)/n − α_s| per symbol)
    pub checkpoints: Vec<(usize, Vec<f64>)>,
    pub final_max_deviation: f64,
}

/// Finite-horizon witness for ω ∈ Ω_T(α).
pub fn omega_in_spectrum(
    family: &Family,
    alpha: &FrequencyVector,
    omega: &OmegaRule,
    horizon: usize,
    tol: f64,
) -> Result<SpectrumVerdict> {
    if horizon == 0 {
        return Err(Error::Horizon("spectrum horizon must be at least 1".into()));
    }
    let prefix = omega.prefix(horizon);
    let mut counts = vec![0u64; family.len()];
    let mut checkpoints = Vec::new();
    let mut next = 1usize;
    for (i, &s) in prefix.iter().enumerate() {
        family.check_symbol(s)?;
        counts[s] += 1;
        let n = i + 1;
        if n == next || n == horizon {
            let devs: Vec<f64> =
                counts.iter().enumerate().map(|(s, &c)| (c as f64 / n as f64 - alpha.weight(s)).abs()).collect();
            checkpoints.push((n, devs));
            if n == next {
                next *= 2;
            }
        }
    }
    let final_max_deviation = checkpoints.last().map_or(0.0, |(_, d)| d.iter().copied().fold(0.0, f64::max));
    Ok(SpectrumVerdict {
        consistent: final_max_deviation < tol,
        horizon,
        tolerance: tol,
        checkpoints,
        final_max_deviation,
    })
}

/// D_m = {(s,b) : b ≤ m} in symbol-major order.
pub fn digits_up_to(family: &Family, m: u64) -> Vec<(usize, Digit)> {
    (0..family.len()).flat_map(|s| (1..=family.system(s).cut(m)).map(move |b| (s, b))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipRow {
    pub n: usize,
    pub max_deviation: f64,
}

/// max_{d∈D_m} |τ_d/n − α_d| at n = 1, 2, 4, … and the full length.
pub fn level_set_membership_trace(
    family: &Family,
    alpha: &FrequencyVector,
    omega: &[usize],
    word: &[Digit],
    m: u64,
) -> Result<Vec<MembershipRow>> {
    family.check_word(omega, word)?;
    let digits = digits_up_to(family, m);
    let mut counter = TauCounter::new(family.len());
    let mut rows = Vec::new();
    let mut next = 1;
    for (i, (&s, &b)) in omega.iter().zip(word).enumerate() {
        counter.push(s, b);
        let n = i + 1;
        if n == next || n == word.len() {
            let max_deviation = digits
                .iter()
                .map(|&(s, b)| (counter.tau_digit(s, b) as f64 / n as f64 - alpha.alpha(s, b)).abs())
                .fold(0.0, f64::max);
            rows.push(MembershipRow { n, max_deviation });
            if n == next {
                next *= 2;
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub n: usize,
    pub symbol: String,
    pub digit: Digit,
    pub count: u64,
    pub frequency: f64,
    pub alpha: f64,
    pub deviation: f64,
}

/// Per-digit counts of a word against α for d ∈ D_m.
pub fn digit_frequency_table(
    family: &Family,
    alpha: &FrequencyVector,
    omega: &[usize],
    word: &[Digit],
    m: u64,
) -> Result<Vec<FrequencyRow>> {
    family.check_word(omega, word)?;
    let counter = TauCounter::from_word(family.len(), omega, word);
    let n = word.len();
    Ok(digits_up_to(family, m)
        .into_iter()
        .map(|(s, b)| {
            let count = counter.tau_digit(s, b);
            let frequency = if n == 0 { 0.0 } else { count as f64 / n as f64 };
            let a = alpha.alpha(s, b);
            FrequencyRow {
                n,
                symbol: family.symbol(s).to_string(),
                digit: b,
                count,
                frequency,
                alpha: a,
                deviation: (frequency - a).abs(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gls::{GlsSystem, Symbol};
    use crate::rational::frac;

    #[test]
    fn greedy_half_half() {
        let law = ConditionalLaw::uniform(2).unwrap();
        assert_eq!(frequency_sequence(&law, 4), vec![1, 2, 1, 2]);
    }

    #[test]
    fn greedy_dirac_is_constant() {
        let law = ConditionalLaw::dirac(1).unwrap();
        assert!(frequency_sequence(&law, 50).iter().all(|&b| b == 1));
        let law = ConditionalLaw::dirac(3).unwrap();
        assert!(frequency_sequence(&law, 50).iter().all(|&b| b == 3));
    }

    #[test]
    fn weave_interleaves() {
        let fam = Family::new(vec![GlsSystem::binary(Symbol::new("A")), GlsSystem::binary(Symbol::new("B"))]).unwrap();
        let streams = vec![vec![11, 12, 13], vec![21, 22, 23]];
        assert_eq!(weave(&fam, &[0, 1, 0, 1], &streams).unwrap(), vec![11, 21, 12, 22]);
        assert_eq!(weave(&fam, &[0, 0, 1], &streams).unwrap(), vec![11, 12, 21]);
        assert_eq!(weave(&fam, &[0, 0, 0, 0], &streams), Err(Error::StreamExhausted("A".into())));
    }

    #[test]
    fn geometric_law_masses() {
        let law = ConditionalLaw::geometric(frac(1, 2)).unwrap();
        assert_eq!(law.prob_exact(3), Some(frac(1, 8)));
        assert_eq!(law.mass_above_exact(1), Some(frac(1, 2)));
        assert!((law.prob(3) - 0.125).abs() < 1e-16);
        assert_eq!(law.sample(0.0), 1);
        assert_eq!(law.sample(0.6), 2);
    }

    #[test]
    fn log_power_normalizes() {
        let law = ConditionalLaw::log_power(2.0).unwrap();
        let direct: f64 = (1..=200_000u64).map(|b| law.prob(b)).sum();
        let rest = law.mass_above(200_000);
        assert!((direct + rest - 1.0).abs() < 1e-9, "{}", direct + rest);
        let b = law.sample(0.9);
        assert!(law.mass_above(b) < 0.1 + 1e-12 && law.mass_above(b - 1) >= 0.1 - 1e-12);
    }

    #[test]
    fn dagger() {
        let fam = Family::new(vec![GlsSystem::binary(Symbol::new("A")), GlsSystem::luroth(Symbol::new("L"))]).unwrap();
        let all_first = FrequencyVector::new(
            &fam,
            vec![Rational::one(), Rational::zero()],
            vec![ConditionalLaw::uniform(2).unwrap(), ConditionalLaw::geometric(frac(1, 2)).unwrap()],
        )
        .unwrap();
        assert!(!check_dagger(&all_first));
        let both = FrequencyVector::new(
            &fam,
            vec![frac(1, 2), frac(1, 2)],
            vec![
                ConditionalLaw::geometric(frac(1, 2)).unwrap_or_else(|_| unreachable!()),
                ConditionalLaw::geometric(frac(1, 3)).unwrap(),
            ],
        );
        // a geometric law has infinite support, which the binary system cannot carry
        assert!(both.is_err());
    }

    #[test]
    fn frequency_vector_rejects_bad_weights() {
        let fam = Family::singleton(GlsSystem::binary(Symbol::new("B")));
        assert!(FrequencyVector::new(&fam, vec![frac(1, 2)], vec![ConditionalLaw::uniform(2).unwrap()]).is_err());
        assert!(FrequencyVector::singleton(&fam, ConditionalLaw::uniform(3).unwrap()).is_err());
    }
}
