use serde::Serialize;

use crate::error::{Error, Result};
use crate::gls::GlsSystem;
use crate::special::extrapolate_to_zero;

/// Points used for the polynomial extrapolation in h = 1/j.
const EXTRAPOLATION_POINTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaEstimate {
    /// Extrapolated estimate clamped to [0,1].
    pub value: f64,
    /// log n / log N_n at the largest grid point.
    pub last_ratio: f64,
    /// Change in the extrapolant when the oldest sample is dropped.
    pub error: f64,
    pub analytic: f64,
    pub horizon: u64,
    /// (n, log n / log N_n) on n = 2^j.
    pub grid: Vec<(u64, f64)>,
}

/// Exponent of convergence from the ratios log n / log N_n on n = 2, 4, …
pub fn eta(system: &GlsSystem, horizon: u64) -> Result<EtaEstimate> {
    if horizon < 4 {
        return Err(Error::Horizon(format!("eta needs horizon >= 4, got {horizon}")));
    }
    let analytic = system.eta_analytic();
    if system.is_finite() {
        return Ok(EtaEstimate { value: 0.0, last_ratio: 0.0, error: 0.0, analytic, horizon, grid: vec![] });
    }
    let top = 63 - horizon.leading_zeros();
    let grid: Vec<(u64, f64)> = (1..=top)
        .map(|j| {
            let n = 1u64 << j;
            (n, (n as f64).ln() / system.log_n(n))
        })
        .collect();
    let tail = &grid[grid.len().saturating_sub(EXTRAPOLATION_POINTS)..];
    let h: Vec<f64> = tail.iter().map(|&(n, _)| 1.0 / n.trailing_zeros() as f64).collect();
    let v: Vec<f64> = tail.iter().map(|&(_, r)| r).collect();
    let (est, error) = extrapolate_to_zero(&h, &v);
    Ok(EtaEstimate {
        value: est.clamp(0.0, 1.0),
        last_ratio: grid.last().map_or(0.0, |g| g.1),
        error,
        analytic,
        horizon,
        grid,
    })
}
