//! Generalised Lüroth expansions driven by a symbol sequence: interval
//! families, digit expansions, frequency vectors, level-set dimensions,
//! the Bernoulli-type measures behind the lower bound, and finite
//! approximants.

pub mod approximation;
pub mod config;
pub mod dimension;
pub mod error;
pub mod exec;
pub mod expansion;
pub mod frequency;
pub mod gls;
pub mod measure;
pub mod rational;
pub mod special;

pub use error::{Error, Result};
pub use exec::Exec;
pub use gls::{Digit, Family, GlsSystem, OmegaRule, Symbol};
pub use rational::Rational;
