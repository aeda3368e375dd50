//! η, β, the dimension formula max{η_T, β_T(α)} and cover-sum diagnostics.

mod beta;
mod cover;
mod eta;

use serde::Serialize;

pub use beta::{beta, lyapunov_diverges, BetaReport, BetaRow};
pub use cover::{
    cover_rate, enumerate_count_vectors, exact_cover_sum, in_window, rate_residual, CountVectors, CoverRate, CoverSum,
    RateResidual, ENUMERATION_CAP,
};
pub use eta::{eta, EtaEstimate};

use crate::error::{Error, Result};
use crate::frequency::FrequencyVector;
use crate::gls::Family;

/// Default cut M for the β trace.
pub const DEFAULT_MAX_CUT: u64 = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolEta {
    pub symbol: String,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub eta_per_symbol: Vec<SymbolEta>,
    pub eta_t: f64,
    pub beta_trace: Vec<BetaRow>,
    pub beta: f64,
    pub oscillation: f64,
    pub lyapunov_divergent: bool,
    pub dim: f64,
}

/// dim = η_T when the Lyapunov sum diverges, otherwise max{η_T, β}.
pub fn dim_formula(family: &Family, alpha: &FrequencyVector, max_m: u64) -> Result<DimensionReport> {
    let report = beta(family, alpha, max_m)?;
    let eta_per_symbol: Vec<SymbolEta> = family
        .systems()
        .iter()
        .map(|s| SymbolEta { symbol: s.symbol().as_str().to_string(), eta: s.eta_analytic() })
        .collect();
    let eta_t = family.eta_t();
    let dim = if report.lyapunov_divergent { eta_t } else { eta_t.max(report.beta) };
    Ok(DimensionReport {
        eta_per_symbol,
        eta_t,
        beta_trace: report.trace,
        beta: report.beta,
        oscillation: report.oscillation,
        lyapunov_divergent: report.lyapunov_divergent,
        dim,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlmwReport {
    pub eta: f64,
    pub trace: Vec<BetaRow>,
    pub liminf: f64,
    pub divergent: bool,
    pub value: f64,
}

/// Single-system formula max{η, liminf_m (−Σ_{k≤m} α_k log α_k)/(Σ_{k≤m} α_k log N_k)}.
pub fn flmw_dim(family: &Family, alpha: &FrequencyVector, max_m: u64) -> Result<FlmwReport> {
    if family.len() != 1 {
        return Err(Error::InvalidParameter(format!("single-system formula needs one system, got {}", family.len())));
    }
    if max_m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let sys = family.system(0);
    let law = alpha.law(0);
    let mut trace = Vec::with_capacity(max_m as usize);
    let (mut plogp, mut lyap) = (0.0f64, 0.0f64);
    for k in 1..=max_m {
        if sys.has_digit(k) {
            let p = law.prob(k);
            if p > 0.0 {
                plogp += p * p.ln();
                lyap += p * sys.log_n(k);
            }
        }
        let numerator = 0.0 - plogp;
        trace.push(BetaRow { m: k, numerator, denominator: lyap, ratio: (lyap > 0.0).then(|| numerator / lyap) });
    }
    let (liminf, _, _) = beta::window_liminf(&trace, max_m);
    let eta = sys.eta_analytic();
    let divergent = lyapunov_diverges(sys.growth(), law);
    let value = if divergent { eta } else { eta.max(liminf.max(0.0)) };
    Ok(FlmwReport { eta, trace, liminf, divergent, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::ConditionalLaw;
    use crate::gls::{GlsSystem, Symbol};
    use crate::rational::frac;

    fn luroth() -> Family {
        Family::singleton(GlsSystem::luroth(Symbol::new("L")))
    }

    #[test]
    fn eta_grid_values() {
        let e = eta(&GlsSystem::luroth(Symbol::new("L")), 1 << 20).unwrap();
        assert!((e.value - 0.5).abs() < 1e-3, "{e:?}");
        assert_eq!(eta(&GlsSystem::binary(Symbol::new("B")), 1 << 20).unwrap().value, 0.0);
        assert!(matches!(eta(&GlsSystem::luroth(Symbol::new("L")), 3), Err(Error::Horizon(_))));
    }

    #[test]
    fn luroth_geometric_beta() {
        let fam = luroth();
        let a = FrequencyVector::singleton(&fam, ConditionalLaw::geometric(frac(1, 2)).unwrap()).unwrap();
        let r = beta(&fam, &a, 200).unwrap();
        assert!((r.beta - 0.90994).abs() < 1e-4, "{}", r.beta);
        assert!(!r.lyapunov_divergent);
    }

    #[test]
    fn log_power_tail_diverges_on_luroth() {
        let fam = luroth();
        let a = FrequencyVector::singleton(&fam, ConditionalLaw::log_power(2.0).unwrap()).unwrap();
        let r = dim_formula(&fam, &a, 50).unwrap();
        assert!(r.lyapunov_divergent);
        assert_eq!(r.dim, 0.5);
        let a = FrequencyVector::singleton(&fam, ConditionalLaw::log_power(3.0).unwrap()).unwrap();
        assert!(!beta(&fam, &a, 50).unwrap().lyapunov_divergent);
    }

    #[test]
    fn flmw_requires_singleton() {
        let fam = Family::new(vec![GlsSystem::binary(Symbol::new("A")), GlsSystem::binary(Symbol::new("B"))]).unwrap();
        let a = FrequencyVector::new(
            &fam,
            vec![frac(1, 2), frac(1, 2)],
            vec![ConditionalLaw::uniform(2).unwrap(), ConditionalLaw::uniform(2).unwrap()],
        )
        .unwrap();
        assert!(flmw_dim(&fam, &a, 10).is_err());
    }

    #[test]
    fn count_vectors_binary_example() {
        let fam = Family::singleton(GlsSystem::binary(Symbol::new("B")));
        let a = FrequencyVector::singleton(&fam, ConditionalLaw::uniform(2).unwrap()).unwrap();
        let cv = enumerate_count_vectors(&fam, &[0; 4], &a, 2, 0.3, crate::Exec::Sequential).unwrap();
        assert_eq!(cv.vectors, vec![vec![1, 1], vec![1, 2], vec![1, 3], vec![2, 1], vec![2, 2], vec![3, 1]]);
    }
}
