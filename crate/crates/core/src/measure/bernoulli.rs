use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frequency::FrequencyVector;
use crate::gls::{Digit, Family, OmegaRule};

/// Product measure along ω: position n draws b with probability α_{(ω_n,b)}/α_{ω_n}.
#[derive(Clone, Debug)]
pub struct FibreBernoulli {
    pub family: Family,
    pub alpha: FrequencyVector,
    pub omega: OmegaRule,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDimRow {
    pub n: usize,
    pub log_mass: f64,
    pub log_length: f64,
    pub ratio: f64,
}

impl FibreBernoulli {
    pub fn new(family: Family, alpha: FrequencyVector, omega: OmegaRule) -> Result<Self> {
        if alpha.symbols() != family.len() {
            return Err(Error::InvalidFrequency("frequency vector does not match the family".into()));
        }
        omega.validate(family.len())?;
        Ok(FibreBernoulli { family, alpha, omega })
    }

    /// log μ(⟨b₁⋯b_n⟩); −∞ when a digit carries no mass.
    pub fn mu_ffi(&self, omega: &[usize], word: &[Digit]) -> Result<f64> {
        self.family.check_word(omega, word)?;
        Ok(omega.iter().zip(word).map(|(&s, &b)| self.alpha.law(s).log_prob(b)).sum())
    }

    /// ω prefix and a word of length n drawn from the measure.
    pub fn sample_level_set(&self, n: usize, seed: u64) -> (Vec<usize>, Vec<Digit>) {
        let omega = self.omega.prefix(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let word = omega.iter().map(|&s| self.alpha.law(s).sample(rng.random::<f64>())).collect();
        (omega, word)
    }

    /// One sample per seed, in seed order.
    pub fn sample_many(&self, n: usize, seeds: &[u64], exec: Exec) -> Vec<Vec<Digit>> {
        exec.map(seeds, |&seed| self.sample_level_set(n, seed).1)
    }

    /// (n, log μ, log |FFI|, ratio) at every `every`-th prefix and the last one.
    pub fn local_dimension_trace(&self, omega: &[usize], word: &[Digit], every: usize) -> Result<Vec<LocalDimRow>> {
        self.family.check_word(omega, word)?;
        let every = every.max(1);
        let mut log_mass = 0.0;
        let mut log_length = 0.0;
        let mut rows = Vec::new();
        for (i, (&s, &b)) in omega.iter().zip(word).enumerate() {
            log_mass += self.alpha.law(s).log_prob(b);
            log_length -= self.family.system(s).log_n(b);
            let n = i + 1;
            if log_mass == f64::NEG_INFINITY {
                return Err(Error::ZeroMass(n));
            }
            if n % every == 0 || n == word.len() {
                let ratio = if log_length == 0.0 { f64::NAN } else { log_mass / log_length };
                rows.push(LocalDimRow { n, log_mass, log_length, ratio });
            }
        }
        Ok(rows)
    }
}
