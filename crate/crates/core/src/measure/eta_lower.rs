use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frequency::{woven_sequence, FrequencyVector};
use crate::gls::{Digit, Family, GlsSystem};
use crate::special::zeta;

pub const DEFAULT_GAMMA: f64 = 1.5;
pub const DEFAULT_DELTA: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// ⌈v⌉ that ignores floating noise just above an integer.
fn ceil_robust(v: f64) -> u64 {
    (v - 1e-9 * v.max(1.0)).ceil().max(0.0) as u64
}

/// Positions (1-based) j_k of a chosen symbol in ω and θ(k) = j_{⌈k^γ⌉}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaSchedule {
    pub varsigma: usize,
    pub gamma: f64,
    pub positions: Vec<usize>,
    /// θ(1), θ(2), …
    pub theta: Vec<usize>,
}

impl ThetaSchedule {
    /// Materializes θ(1..=k_max) from an ω prefix.
    pub fn build(omega: &[usize], varsigma: usize, gamma: f64, k_max: u64) -> Result<Self> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in (1,2), got {gamma}")));
        }
        let positions: Vec<usize> =
            omega.iter().enumerate().filter(|&(_, &s)| s == varsigma).map(|(i, _)| i + 1).collect();
        let theta = (1..=k_max)
            .map(|k| {
                let idx = ceil_robust((k as f64).powf(gamma)) as usize;
                positions.get(idx - 1).copied().ok_or_else(|| {
                    Error::Horizon(format!(
                        "theta({k}) needs occurrence {idx} of the symbol, prefix of length {} has {}",
                        omega.len(),
                        positions.len()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        Ok(ThetaSchedule { varsigma, gamma, positions, theta })
    }

    pub fn theta(&self, k: u64) -> Option<usize> {
        self.theta.get((k as usize).checked_sub(1)?).copied()
    }

    pub fn k_max(&self) -> u64 {
        self.theta.len() as u64
    }

    /// κ(n) = min{k ≥ κ : θ(k) > n}, `None` past the materialized table.
    pub fn kappa_of(&self, kappa: u64, n: usize) -> Option<u64> {
        let k = self.theta.partition_point(|&t| t <= n) as u64 + 1;
        let k = k.max(kappa);
        (k <= self.k_max()).then_some(k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kappa {
    pub kappa1: u64,
    pub kappa2: u64,
    pub kappa: u64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// Least k with 2^k − 2^{δk} > 2^{(1−ε)k}; the inequality is monotone in k.
pub fn kappa1(epsilon: f64, delta: f64) -> Result<u64> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    (1..=4096u64)
        .find(|&k| {
            let k = k as f64;
            2f64.powf(k) - 2f64.powf(delta * k) > 2f64.powf((1.0 - epsilon) * k)
        })
        .ok_or_else(|| Error::Horizon("kappa1 not reached by k = 4096".into()))
}

/// Least n from which N_n^η ≤ n^{1+ε} holds for good; 1 for finite systems.
pub fn kappa2(system: &GlsSystem, epsilon: f64, horizon: u64) -> Result<u64> {
    check_unit("epsilon", epsilon)?;
    if system.is_finite() {
        return Ok(1);
    }
    let eta = system.eta_analytic();
    let k = match system.rule_name() {
        "geometric" => Some(1),
        "power" => {
            // ζ(p)^{1/p} n ≤ n^{1+ε}
            let p = 1.0 / eta;
            Some(ceil_robust(zeta(p).powf(1.0 / (p * epsilon))).max(1))
        }
        // n + 1 ≤ n^{1+2ε}, monotone in n
        "luroth" => (1..=horizon).find(|&n| (n as f64 + 1.0).ln() <= (1.0 + 2.0 * epsilon) * (n as f64).ln()),
        _ => None,
    };
    k.filter(|&k| k <= horizon)
        .ok_or_else(|| Error::Horizon(format!("no kappa2 for symbol {} within {horizon}", system.symbol().as_str())))
}

/// κ = max(κ₁, max over infinite systems of κ₂).
pub fn kappa_thresholds(family: &Family, epsilon: f64, delta: f64, horizon: u64) -> Result<Kappa> {
    let kappa1 = kappa1(epsilon, delta)?;
    let mut kappa2_all = 1;
    for sys in family.systems().iter().filter(|s| !s.is_finite()) {
        kappa2_all = kappa2_all.max(kappa2(sys, epsilon, horizon)?);
    }
    Ok(Kappa { kappa1, kappa2: kappa2_all, kappa: kappa1.max(kappa2_all) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseSequence {
    pub digits: Vec<Digit>,
    /// 1-based positions changed by the perfect-square rule.
    pub perturbed: Vec<usize>,
    /// min η over the infinite systems.
    pub eta: f64,
    /// max_{n≥2} (log N_{ω_n,a_n} − ((1+ε)/η) log n); `None` when η = 0.
    pub log_excess: Option<f64>,
    /// Least N with N_{ω_n,a_n} ≤ n^{(1+ε)/η} for all N ≤ n ≤ length.
    pub bound_from: Option<usize>,
}

/// Woven greedy sequence with the digit at each perfect-square position
/// replaced by the smallest other digit.
pub fn build_base_sequence(
    family: &Family,
    alpha: &FrequencyVector,
    omega: &[usize],
    epsilon: f64,
    exec: Exec,
) -> Result<BaseSequence> {
    check_unit("epsilon", epsilon)?;
    if omega.is_empty() {
        return Err(Error::Horizon("base sequence needs a non-empty prefix".into()));
    }
    let mut digits = woven_sequence(family, alpha, omega, exec)?;
    let mut perturbed = Vec::new();
    let mut r = 1usize;
    while r * r <= digits.len() {
        let n = r * r;
        let sys = family.system(omega[n - 1]);
        if sys.digit_count() != Some(1) {
            let old = digits[n - 1];
            digits[n - 1] = if old == 1 { 2 } else { 1 };
            perturbed.push(n);
        }
        r += 1;
    }
    let eta =
        family.systems().iter().filter(|s| !s.is_finite()).map(GlsSystem::eta_analytic).fold(f64::INFINITY, f64::min);
    let eta = if eta.is_finite() { eta } else { 0.0 };
    let (log_excess, bound_from) = if eta > 0.0 {
        let c = (1.0 + epsilon) / eta;
        let excess: Vec<f64> = digits
            .iter()
            .zip(omega)
            .enumerate()
            .map(|(i, (&b, &s))| family.system(s).log_n(b) - c * ((i + 1) as f64).ln())
            .collect();
        let max = excess.iter().skip(1).copied().fold(f64::NEG_INFINITY, f64::max);
        let from = excess.iter().rposition(|&e| e > 1e-12).map_or(1, |i| i + 2);
        (Some(max), (from <= digits.len()).then_some(from))
    } else {
        (None, None)
    };
    Ok(BaseSequence { digits, perturbed, eta, log_excess, bound_from })
}

/// Uniform choice in the dyadic windows at θ(k), k ≥ κ, and the base digit elsewhere.
#[derive(Clone, Debug)]
pub struct EaSampler {
    pub family: Family,
    pub omega: Vec<usize>,
    pub base: Vec<Digit>,
    pub schedule: ThetaSchedule,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaLowerRow {
    pub n: usize,
    pub log_mass: f64,
    pub log_length: f64,
    pub ratio: f64,
    pub comparator: f64,
    /// Share of −log|FFI| coming from scheduled positions.
    pub schedule_share: f64,
}

impl EaSampler {
    /// Builds base sequence, schedule and thresholds on the ω prefix. The
    /// distinguished symbol is the first one attaining η_T.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        family: &Family,
        alpha: &FrequencyVector,
        omega: Vec<usize>,
        gamma: f64,
        delta: f64,
        epsilon: f64,
        k_max: u64,
        exec: Exec,
    ) -> Result<Self> {
        let eta_t = family.eta_t();
        if eta_t <= 0.0 {
            return Err(Error::InvalidParameter("the family has no system with positive eta".into()));
        }
        let varsigma = (0..family.len()).find(|&s| family.system(s).eta_analytic() == eta_t).unwrap_or(0);
        let kappa = kappa_thresholds(family, epsilon, delta, omega.len() as u64)?.kappa;
        if kappa > k_max {
            return Err(Error::Horizon(format!("k_max = {k_max} is below kappa = {kappa}")));
        }
        if k_max > 62 {
            return Err(Error::InvalidParameter("k_max above 62 overflows the digit type".into()));
        }
        let schedule = ThetaSchedule::build(&omega, varsigma, gamma, k_max)?;
        let base = build_base_sequence(family, alpha, &omega, epsilon, exec)?.digits;
        Ok(EaSampler { family: family.clone(), omega, base, schedule, delta, epsilon, kappa })
    }

    /// Inclusive digit window ℕ ∩ (2^k − 2^{δk}, 2^k] and its size ⌈2^{δk}⌉.
    pub fn window(&self, k: u64) -> (Digit, Digit, u64) {
        let count = ceil_robust(2f64.powf(self.delta * k as f64));
        let hi = 1u64 << k;
        (hi - count + 1, hi, count)
    }

    fn scheduled_k(&self, n: usize) -> Option<u64> {
        let idx = self.schedule.theta.binary_search(&n).ok()?;
        let k = idx as u64 + 1;
        (k >= self.kappa).then_some(k)
    }

    pub fn max_depth(&self) -> usize {
        self.base.len()
    }

    pub fn sample(&self, depth: usize, seed: u64) -> Result<Vec<Digit>> {
        if depth > self.base.len() {
            return Err(Error::Horizon(format!("depth {depth} exceeds the base prefix {}", self.base.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut word = self.base[..depth].to_vec();
        for k in self.kappa..=self.schedule.k_max() {
            let pos = self.schedule.theta[k as usize - 1];
            if pos > depth {
                break;
            }
            let (lo, hi, _) = self.window(k);
            word[pos - 1] = rng.random_range(lo..=hi);
        }
        Ok(word)
    }

    /// Whether `word` lies in the support: windows at scheduled positions, base elsewhere.
    pub fn in_support(&self, word: &[Digit]) -> bool {
        word.len() <= self.base.len()
            && word.iter().enumerate().all(|(i, &b)| match self.scheduled_k(i + 1) {
                Some(k) => {
                    let (lo, hi, _) = self.window(k);
                    (lo..=hi).contains(&b)
                }
                None => b == self.base[i],
            })
    }

    /// −Σ_{κ≤k<κ(n)} log⌈2^{δk}⌉ for prefixes in the support, −∞ otherwise.
    pub fn log_mass(&self, word: &[Digit]) -> Result<f64> {
        if !self.in_support(word) {
            return Ok(f64::NEG_INFINITY);
        }
        let upper = self.schedule.kappa_of(self.kappa, word.len()).ok_or_else(|| {
            Error::Horizon(format!("prefix length {} reaches past the last scheduled index", word.len()))
        })?;
        Ok(-(self.kappa..upper).map(|k| (self.window(k).2 as f64).ln()).sum::<f64>())
    }

    pub fn comparator(&self) -> f64 {
        self.delta * self.family.eta_t() / (1.0 + self.epsilon)
    }

    /// Ratio log μ_a / log |FFI| for prefixes from θ(κ) on.
    pub fn eta_lower_trace(&self, word: &[Digit]) -> Result<Vec<EtaLowerRow>> {
        self.family.check_word(&self.omega, word)?;
        if !self.in_support(word) {
            return Err(Error::ZeroMass(word.len()));
        }
        let start = self.schedule.theta(self.kappa).unwrap_or(usize::MAX);
        let comparator = self.comparator();
        let mut log_length = 0.0;
        let mut scheduled = 0.0;
        let mut log_mass = 0.0;
        let mut rows = Vec::new();
        for (i, (&s, &b)) in self.omega.iter().zip(word).enumerate() {
            let n = i + 1;
            let ln = self.family.system(s).log_n(b);
            log_length -= ln;
            if let Some(k) = self.scheduled_k(n) {
                scheduled += ln;
                log_mass -= (self.window(k).2 as f64).ln();
            }
            if n >= start {
                rows.push(EtaLowerRow {
                    n,
                    log_mass,
                    log_length,
                    ratio: log_mass / log_length,
                    comparator,
                    schedule_share: scheduled / -log_length,
                });
            }
        }
        Ok(rows)
    }
}
