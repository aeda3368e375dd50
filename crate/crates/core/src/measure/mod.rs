//! Measures behind the lower bounds: the fibre Bernoulli measure μ_{ω,α}
//! and the window measure μ_a on E_a, with FFI-based local-dimension traces.

mod bernoulli;
mod eta_lower;

pub use bernoulli::{FibreBernoulli, LocalDimRow};
pub use eta_lower::{
    build_base_sequence, kappa1, kappa2, kappa_thresholds, BaseSequence, EaSampler, EtaLowerRow, Kappa, ThetaSchedule,
    DEFAULT_DELTA, DEFAULT_EPSILON, DEFAULT_GAMMA,
};
