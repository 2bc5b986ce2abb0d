//! Per-sample bandit statistics and the sample-selection policies.
//!
//! A [`BanditState`] is owned by a single training loop. Rewards are fed back
//! with [`BanditState::record_reward`]; once every sample has been scored once
//! in a phase, [`BanditState::freeze_phase`] fixes the initial scores together
//! with their mean and standard deviation until the next reset.

mod policy;
mod score;

pub use policy::{
    select_ohem, select_rucb, select_ucb, select_uniform, top_k_candidates, RucbPick,
};
pub use score::{
    classic_ucb_score, dynamic_k, exploration_term, normalize_reward, normalized_rewards,
    population_stats, ucb_score,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_ALPHA_BOUND: f64 = 3.0;
pub const DEFAULT_OHEM_POOL: usize = 8;

/// Selection record of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub sample_id: usize,
    pub count: u64,
    pub reward_sum: f64,
    pub mean_reward: f64,
}

impl SampleStats {
    pub fn new(sample_id: usize) -> Self {
        Self {
            sample_id,
            count: 0,
            reward_sum: 0.0,
            mean_reward: 0.0,
        }
    }

    fn add(&mut self, reward: f64) {
        self.count += 1;
        self.reward_sum += reward;
        self.mean_reward = self.reward_sum / self.count as f64;
    }

    fn clear(&mut self) {
        *self = Self::new(self.sample_id);
    }
}

/// Initial scores of a bootstrapping phase and their population statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub initial_scores: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    stats: Vec<SampleStats>,
    total: u64,
    beta: f64,
    phase: Option<PhaseStats>,
    scores: Vec<f64>,
}

impl BanditState {
    pub fn new(num_samples: usize, beta: f64) -> Result<Self> {
        if num_samples == 0 {
            return Err(Error::InvalidArgument(
                "corpus must contain at least one sample".into(),
            ));
        }
        if !(beta > 0.0) {
            return Err(Error::field("beta", "must be positive"));
        }
        Ok(Self {
            stats: (0..num_samples).map(SampleStats::new).collect(),
            total: 0,
            beta,
            phase: None,
            scores: vec![0.0; num_samples],
        })
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn stats(&self) -> &[SampleStats] {
        &self.stats
    }

    /// Total selections `n` since the last reset.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn phase(&self) -> Option<&PhaseStats> {
        self.phase.as_ref()
    }

    /// Live scores `q^(n)`. Only meaningful once every sample has been visited.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn mean_rewards(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.mean_reward).collect()
    }

    pub fn all_visited(&self) -> bool {
        self.stats.iter().all(|s| s.count > 0)
    }

    /// Adds a reward for `sample_id` and refreshes the live scores.
    ///
    /// Negative rewards are clamped to zero.
    pub fn record_reward(&mut self, sample_id: usize, reward: f64) -> Result<()> {
        let len = self.len();
        let entry = self
            .stats
            .get_mut(sample_id)
            .ok_or(Error::OutOfRange { id: sample_id, len })?;
        if reward.is_nan() {
            return Err(Error::InvalidArgument("reward is NaN".into()));
        }
        entry.add(reward.max(0.0));
        self.total += 1;
        if self.all_visited() {
            self.refresh_scores()?;
        }
        Ok(())
    }

    fn refresh_scores(&mut self) -> Result<()> {
        let normalized = normalized_rewards(&self.mean_rewards(), self.beta)?;
        for (q, (s, j)) in self
            .scores
            .iter_mut()
            .zip(self.stats.iter().zip(normalized))
        {
            *q = ucb_score(j, self.total, s.count)?;
        }
        Ok(())
    }

    /// Zeroes every statistic and invalidates the phase statistics.
    pub fn reset(&mut self) {
        self.stats.iter_mut().for_each(SampleStats::clear);
        self.total = 0;
        self.phase = None;
        self.scores.iter_mut().for_each(|q| *q = 0.0);
    }

    /// Computes the initial scores after a scoring pass and freezes `mu`/`sigma`.
    pub fn freeze_phase(&mut self) -> Result<&PhaseStats> {
        let initial = initial_scores(self)?;
        let (mu, sigma) = population_stats(&initial);
        self.scores.clone_from(&initial);
        self.phase = Some(PhaseStats {
            initial_scores: initial,
            mu,
            sigma,
        });
        Ok(self.phase.as_ref().expect("phase just set"))
    }

    /// Fails unless every sample has at least one recorded reward.
    pub(crate) fn require_visited(&self, what: &str) -> Result<()> {
        if self.all_visited() {
            Ok(())
        } else {
            Err(Error::InvalidState(format!(
                "{what} requires every sample to be scored at least once"
            )))
        }
    }
}

/// Initial scores `q_i^(M) = J~_i + sqrt(2 ln M)` after exactly one visit per sample.
pub fn initial_scores(state: &BanditState) -> Result<Vec<f64>> {
    if let Some(s) = state.stats.iter().find(|s| s.count != 1) {
        return Err(Error::InvalidState(format!(
            "initial scores need exactly one visit per sample; sample {} has {}",
            s.sample_id, s.count
        )));
    }
    let m = state.len() as u64;
    normalized_rewards(&state.mean_rewards(), state.beta)?
        .into_iter()
        .map(|j| ucb_score(j, m, 1))
        .collect()
}

/// How the relaxed policy sizes its candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RucbVariant {
    /// `alpha ~ U(0, a)` drawn every iteration.
    Dynamic,
    FixedAlpha(f64),
    FixedK(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_alpha_bound")]
    pub a: f64,
    #[serde(default = "default_variant")]
    pub variant: RucbVariant,
    /// Pool size of the hard-example-mining baseline; capped at the corpus size.
    #[serde(default = "default_ohem_pool")]
    pub ohem_pool: usize,
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_alpha_bound() -> f64 {
    DEFAULT_ALPHA_BOUND
}
fn default_variant() -> RucbVariant {
    RucbVariant::Dynamic
}
fn default_ohem_pool() -> usize {
    DEFAULT_OHEM_POOL
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            a: DEFAULT_ALPHA_BOUND,
            variant: RucbVariant::Dynamic,
            ohem_pool: DEFAULT_OHEM_POOL,
        }
    }
}

impl PolicyConfig {
    /// Checks the config against a corpus of `num_samples`; returns every violation.
    pub fn check(&self, num_samples: usize) -> Vec<Error> {
        let mut errors = Vec::new();
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            errors.push(Error::field("beta", "must be a positive finite number"));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            errors.push(Error::field("a", "must be a non-negative finite number"));
        }
        match self.variant {
            RucbVariant::Dynamic => {}
            RucbVariant::FixedAlpha(alpha) => {
                if !(alpha >= 0.0) || !alpha.is_finite() {
                    errors.push(Error::field("variant.fixed_alpha", "must be non-negative"));
                }
            }
            RucbVariant::FixedK(k) => {
                if k == 0 || k > num_samples {
                    errors.push(Error::field(
                        "variant.fixed_k",
                        format!("must lie in [1, {num_samples}]"),
                    ));
                }
            }
        }
        if self.ohem_pool == 0 {
            errors.push(Error::field("ohem_pool", "must be at least 1"));
        }
        errors
    }

    pub fn validate(&self, num_samples: usize) -> Result<()> {
        match self.check(num_samples).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
