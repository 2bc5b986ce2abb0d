use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{hashed_symmetric_unit, stream};

/// Scripted-reward corpus: per-sample base losses with an inflated corrupted tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedCorpusSpec {
    pub size: usize,
    #[serde(default = "defaults::difficulty_min")]
    pub difficulty_min: f64,
    #[serde(default = "defaults::difficulty_max")]
    pub difficulty_max: f64,
    #[serde(default)]
    pub corruption_rate: f64,
    #[serde(default = "defaults::inflation")]
    pub corruption_inflation: f64,
    /// Multiplicative loss reduction per training visit.
    #[serde(default = "defaults::decay")]
    pub decay: f64,
    /// Relative amplitude of the observation noise.
    #[serde(default = "defaults::noise")]
    pub noise: f64,
}

mod defaults {
    pub fn difficulty_min() -> f64 {
        0.05
    }
    pub fn difficulty_max() -> f64 {
        0.35
    }
    pub fn inflation() -> f64 {
        2.0
    }
    pub fn decay() -> f64 {
        0.97
    }
    pub fn noise() -> f64 {
        0.1
    }
}

impl ScriptedCorpusSpec {
    pub fn new(size: usize, corruption_rate: f64) -> Self {
        Self {
            size,
            difficulty_min: defaults::difficulty_min(),
            difficulty_max: defaults::difficulty_max(),
            corruption_rate,
            corruption_inflation: defaults::inflation(),
            decay: defaults::decay(),
            noise: defaults::noise(),
        }
    }

    pub fn check(&self) -> Vec<Error> {
        let mut errors = Vec::new();
        if self.size == 0 {
            errors.push(Error::field("size", "must be at least 1"));
        }
        if !(self.difficulty_min >= 0.0 && self.difficulty_min <= self.difficulty_max)
            || !(self.difficulty_max > 0.0)
            || !self.difficulty_max.is_finite()
        {
            errors.push(Error::field(
                "difficulty_min",
                "need 0 <= difficulty_min <= difficulty_max with difficulty_max > 0",
            ));
        }
        if !(0.0..=1.0).contains(&self.corruption_rate) {
            errors.push(Error::field("corruption_rate", "must lie in [0, 1]"));
        }
        if !(self.corruption_inflation > 1.0) || !self.corruption_inflation.is_finite() {
            errors.push(Error::field("corruption_inflation", "must exceed 1"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            errors.push(Error::field("decay", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            errors.push(Error::field("noise", "must lie in [0, 1]"));
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        match self.check().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Learning-curve model: reward of sample `i` after `v` visits is
/// `d_i * decay^v * (1 + noise * u)` with `u` in `[-1, 1)` fixed by `(seed, i, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedLearner {
    pub difficulty: Vec<f64>,
    pub decay: f64,
    pub noise: f64,
    pub seed: u64,
}

impl SimulatedLearner {
    pub fn len(&self) -> usize {
        self.difficulty.len()
    }

    pub fn is_empty(&self) -> bool {
        self.difficulty.is_empty()
    }

    pub fn simulated_reward(&self, sample_id: usize, visit_count: u64) -> Result<f64> {
        let d = *self.difficulty.get(sample_id).ok_or(Error::OutOfRange {
            id: sample_id,
            len: self.len(),
        })?;
        let jitter = if self.noise > 0.0 {
            self.noise * hashed_symmetric_unit(self.seed, sample_id as u64, visit_count)
        } else {
            0.0
        };
        let steps = i32::try_from(visit_count).unwrap_or(i32::MAX);
        Ok((d * self.decay.powi(steps) * (1.0 + jitter)).max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedCorpus {
    pub learner: SimulatedLearner,
    pub corrupted: Vec<bool>,
}

pub fn generate_scripted_corpus(spec: &ScriptedCorpusSpec, seed: u64) -> Result<ScriptedCorpus> {
    spec.validate()?;
    let m = spec.size;
    let mut rng = stream(seed, "scripted-difficulty");
    let mut difficulty: Vec<f64> = (0..m)
        .map(|_| {
            if spec.difficulty_max > spec.difficulty_min {
                rng.gen_range(spec.difficulty_min..spec.difficulty_max)
            } else {
                spec.difficulty_min
            }
        })
        .collect();

    let count = (m as f64 * spec.corruption_rate).round() as usize;
    let mut corrupted = vec![false; m];
    for id in index::sample(&mut stream(seed, "scripted-corruption"), m, count.min(m)) {
        corrupted[id] = true;
    }
    let max_clean = difficulty
        .iter()
        .zip(&corrupted)
        .filter(|(_, &c)| !c)
        .map(|(&d, _)| d)
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.max(d)))
        })
        .unwrap_or(spec.difficulty_max);
    for (d, &c) in difficulty.iter_mut().zip(&corrupted) {
        if c {
            *d = spec.corruption_inflation * max_clean;
        }
    }
    Ok(ScriptedCorpus {
        learner: SimulatedLearner {
            difficulty,
            decay: spec.decay,
            noise: spec.noise,
            seed,
        },
        corrupted,
    })
}
