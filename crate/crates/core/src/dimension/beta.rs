use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::{check_dagger, ConditionalLaw, FrequencyVector, Tail};
use crate::gls::{Family, LogGrowth};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaRow {
    pub m: u64,
    pub numerator: f64,
    pub denominator: f64,
    /// `None` while the Lyapunov part is still zero.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaReport {
    pub trace: Vec<BetaRow>,
    /// max(0, window minimum of R_m).
    pub beta: f64,
    pub window_min: f64,
    /// max − min of R_m over the window.
    pub oscillation: f64,
    pub window: (u64, u64),
    pub lyapunov_divergent: bool,
    /// Σ_{d∈D_M} α_d log N_d.
    pub lyapunov_partial: f64,
}

pub(crate) fn x_log_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Window minimum over m ∈ [⌈M/2⌉, M] of the defined ratios.
pub(crate) fn window_liminf(trace: &[BetaRow], max_m: u64) -> (f64, f64, (u64, u64)) {
    let lo = max_m.div_ceil(2).max(1);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for r in trace.iter().filter(|r| r.m >= lo) {
        if let Some(v) = r.ratio {
            min = min.min(v);
            max = max.max(v);
        }
    }
    if min.is_infinite() {
        (0.0, 0.0, (lo, max_m))
    } else {
        (min, max - min, (lo, max_m))
    }
}

/// Whether Σ_b p(b) log N_b diverges, decided from the tail shape against the
/// growth of log N_b.
pub fn lyapunov_diverges(growth: LogGrowth, law: &ConditionalLaw) -> bool {
    if law.support_max().is_some() {
        return false;
    }
    match (growth, law.tail()) {
        (LogGrowth::Bounded, _) | (_, Tail::Zero) | (_, Tail::Geometric(_)) => false,
        (LogGrowth::Logarithmic(_), Tail::Power(_)) => false,
        (LogGrowth::Linear(_), Tail::Power(p)) => *p <= 2.0,
        (LogGrowth::Logarithmic(_), Tail::LogPower(q)) => *q <= 2.0,
        (LogGrowth::Linear(_), Tail::LogPower(_)) => true,
    }
}

pub(crate) fn require_dagger(alpha: &FrequencyVector) -> Result<()> {
    if check_dagger(alpha) {
        Ok(())
    } else {
        Err(Error::InvalidFrequency("every symbol needs positive weight".into()))
    }
}

pub(crate) fn require_compatible(family: &Family, alpha: &FrequencyVector) -> Result<()> {
    if alpha.symbols() != family.len() {
        return Err(Error::InvalidFrequency(format!(
            "frequency vector has {} symbols, family has {}",
            alpha.symbols(),
            family.len()
        )));
    }
    Ok(())
}

/// R_m for m = 1..=M with the liminf window estimate and the divergence flag.
pub fn beta(family: &Family, alpha: &FrequencyVector, max_m: u64) -> Result<BetaReport> {
    require_compatible(family, alpha)?;
    require_dagger(alpha)?;
    if max_m == 0 {
        return Err(Error::InvalidParameter("beta needs M >= 1".into()));
    }
    let symbol_entropy: f64 = (0..family.len()).map(|s| x_log_x(alpha.weight(s))).sum();
    let mut digit_entropy = 0.0;
    let mut lyapunov = 0.0;
    let mut trace = Vec::with_capacity(max_m as usize);
    for m in 1..=max_m {
        for s in 0..family.len() {
            let sys = family.system(s);
            if !sys.has_digit(m) {
                continue;
            }
            let a = alpha.alpha(s, m);
            if a > 0.0 {
                digit_entropy += a * a.ln();
                lyapunov += a * sys.log_n(m);
            }
        }
        let numerator = symbol_entropy - digit_entropy;
        let ratio = (lyapunov > 0.0).then(|| numerator / lyapunov);
        trace.push(BetaRow { m, numerator, denominator: lyapunov, ratio });
    }
    let (window_min, oscillation, window) = window_liminf(&trace, max_m);
    let lyapunov_divergent =
        (0..family.len()).any(|s| alpha.weight(s) > 0.0 && lyapunov_diverges(family.system(s).growth(), alpha.law(s)));
    Ok(BetaReport {
        trace,
        beta: window_min.max(0.0),
        window_min,
        oscillation,
        window,
        lyapunov_divergent,
        lyapunov_partial: lyapunov,
    })
}
