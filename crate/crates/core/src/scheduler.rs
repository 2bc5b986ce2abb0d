//! Training schedule: an initial uniform phase, then bootstrapping phases of
//! reset, scoring pass and policy-driven training.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bandit::{
    select_ohem, select_rucb, select_ucb, select_uniform, BanditState, PolicyConfig,
};
use crate::error::{Error, Result};
use crate::reward_model::{DiceAccumulator, LabeledSlice, ToyPixelClassifier};
use crate::rng::{indexed_stream, stream, Rng};
use crate::testbed::{
    generate_held_out, generate_segmentation_corpus, ScriptedCorpus, SegmentationSpec,
    SimulatedLearner, FEATURE_DIM,
};

/// Something that can score and train on corpus samples by id.
pub trait Learner {
    fn num_samples(&self) -> usize;
    /// Reward of a sample without changing the learner.
    fn evaluate(&self, sample_id: usize) -> Result<f64>;
    /// One training step on a sample; returns the reward before the update.
    fn train(&mut self, sample_id: usize) -> Result<f64>;
}

/// [`SimulatedLearner`] plus the visit counts that drive its learning curve.
#[derive(Debug, Clone)]
pub struct SimulatedTrainer {
    pub learner: SimulatedLearner,
    pub visits: Vec<u64>,
}

impl SimulatedTrainer {
    pub fn new(learner: SimulatedLearner) -> Self {
        let visits = vec![0; learner.len()];
        Self { learner, visits }
    }
}

impl Learner for SimulatedTrainer {
    fn num_samples(&self) -> usize {
        self.learner.len()
    }

    fn evaluate(&self, sample_id: usize) -> Result<f64> {
        let visits = *self.visits.get(sample_id).ok_or(Error::OutOfRange {
            id: sample_id,
            len: self.visits.len(),
        })?;
        self.learner.simulated_reward(sample_id, visits)
    }

    fn train(&mut self, sample_id: usize) -> Result<f64> {
        let reward = self.evaluate(sample_id)?;
        self.visits[sample_id] += 1;
        Ok(reward)
    }
}

/// Toy classifier trained on a slice corpus.
#[derive(Debug, Clone)]
pub struct SegmentationTrainer<'a> {
    pub model: ToyPixelClassifier,
    pub slices: &'a [LabeledSlice],
}

impl Learner for SegmentationTrainer<'_> {
    fn num_samples(&self) -> usize {
        self.slices.len()
    }

    fn evaluate(&self, sample_id: usize) -> Result<f64> {
        let slice = self.slices.get(sample_id).ok_or(Error::OutOfRange {
            id: sample_id,
            len: self.slices.len(),
        })?;
        self.model.reward(slice)
    }

    fn train(&mut self, sample_id: usize) -> Result<f64> {
        let slice = self.slices.get(sample_id).ok_or(Error::OutOfRange {
            id: sample_id,
            len: self.slices.len(),
        })?;
        self.model.train_step(slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Uniform,
    Ohem,
    Ucb,
    Rucb,
}

impl Policy {
    /// Baselines first, relaxed UCB last.
    pub const ALL: [Policy; 4] = [Policy::Uniform, Policy::Ohem, Policy::Ucb, Policy::Rucb];

    pub fn label(self) -> &'static str {
        match self {
            Policy::Uniform => "Uniform",
            Policy::Ohem => "OHEM",
            Policy::Ucb => "UCB",
            Policy::Rucb => "RUCB",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Policy::Uniform => "uniform",
            Policy::Ohem => "ohem",
            Policy::Ucb => "ucb",
            Policy::Rucb => "rucb",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.key().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::field("policy", format!("unknown policy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePlan {
    #[serde(default = "default_iters")]
    pub initial_iters: u64,
    #[serde(default = "default_boot_phases")]
    pub num_boot_phases: usize,
    #[serde(default = "default_iters")]
    pub t_per_phase: u64,
    #[serde(default = "default_policy")]
    pub policy: Policy,
    #[serde(default)]
    pub policy_config: PolicyConfig,
}

fn default_iters() -> u64 {
    2000
}
fn default_boot_phases() -> usize {
    3
}
fn default_policy() -> Policy {
    Policy::Rucb
}

impl PhasePlan {
    /// 2000 uniform iterations followed by three phases of 2000.
    pub fn desk_scale(policy: Policy) -> Self {
        Self {
            initial_iters: 2000,
            num_boot_phases: 3,
            t_per_phase: 2000,
            policy,
            policy_config: PolicyConfig::default(),
        }
    }

    pub fn total_iterations(&self) -> u64 {
        self.initial_iters + self.num_boot_phases as u64 * self.t_per_phase
    }

    pub fn check(&self, num_samples: usize) -> Vec<Error> {
        let mut errors = self.policy_config.check(num_samples);
        if self.num_boot_phases > 0 && self.t_per_phase == 0 {
            errors.push(Error::field("t_per_phase", "must be at least 1"));
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

/// One training iteration. Phase 0 is the initial uniform phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub phase: usize,
    /// 1-based step within the phase.
    pub t: u64,
    /// 1-based step over the whole run.
    pub iteration: u64,
    pub sample_id: usize,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub reward: f64,
}

/// Rewards of a scoring pass and the statistics frozen from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringPass {
    pub phase: usize,
    pub rewards: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub log: Vec<IterationRecord>,
    pub scoring: Vec<ScoringPass>,
    pub resets: usize,
}

pub fn run_initial_phase<L: Learner>(
    learner: &mut L,
    iters: u64,
    rng: &mut Rng,
    log: &mut Vec<IterationRecord>,
) -> Result<()> {
    let m = learner.num_samples();
    for t in 1..=iters {
        let sample_id = select_uniform(m, rng)?;
        let reward = learner.train(sample_id)?;
        log.push(IterationRecord {
            phase: 0,
            t,
            iteration: log.len() as u64 + 1,
            sample_id,
            alpha: None,
            k: None,
            reward,
        });
    }
    Ok(())
}

/// Scores every sample once in id order without training, then freezes the
/// phase statistics.
pub fn run_scoring_pass<L: Learner>(
    learner: &L,
    state: &mut BanditState,
    phase: usize,
) -> Result<ScoringPass> {
    if state.total() != 0 {
        return Err(Error::InvalidState(
            "scoring pass requires freshly reset statistics".into(),
        ));
    }
    if state.len() != learner.num_samples() {
        return Err(Error::InvalidState(
            "bandit state and learner disagree on corpus size".into(),
        ));
    }
    let mut rewards = Vec::with_capacity(state.len());
    for id in 0..state.len() {
        let r = learner.evaluate(id)?;
        state.record_reward(id, r)?;
        rewards.push(r);
    }
    let frozen = state.freeze_phase()?;
    Ok(ScoringPass {
        phase,
        rewards,
        mu: frozen.mu,
        sigma: frozen.sigma,
    })
}

pub fn run_boot_phase<L: Learner>(
    learner: &mut L,
    state: &mut BanditState,
    plan: &PhasePlan,
    phase: usize,
    rng: &mut Rng,
    log: &mut Vec<IterationRecord>,
) -> Result<()> {
    if state.phase().is_none() {
        return Err(Error::InvalidState(
            "boot phase started before a scoring pass".into(),
        ));
    }
    let cfg = &plan.policy_config;
    for t in 1..=plan.t_per_phase {
        let (sample_id, alpha, k) = match plan.policy {
            Policy::Uniform => (select_uniform(state.len(), rng)?, None, None),
            Policy::Ohem => (select_ohem(state, cfg.ohem_pool, rng)?, None, None),
            Policy::Ucb => (select_ucb(state)?, None, None),
            Policy::Rucb => {
                let pick = select_rucb(state, cfg, rng)?;
                (pick.sample_id, pick.alpha, Some(pick.k))
            }
        };
        let reward = learner.train(sample_id)?;
        state.record_reward(sample_id, reward)?;
        log.push(IterationRecord {
            phase,
            t,
            iteration: log.len() as u64 + 1,
            sample_id,
            alpha,
            k,
            reward,
        });
    }
    Ok(())
}

/// Runs the whole schedule. Randomness comes from `seed` through the
/// `initial-phase` stream and one `policy` stream per boot phase.
pub fn run_experiment<L: Learner>(plan: &PhasePlan, learner: &mut L, seed: u64) -> Result<Trace> {
    let m = learner.num_samples();
    plan.validate(m)?;
    let mut trace = Trace::default();
    run_initial_phase(
        learner,
        plan.initial_iters,
        &mut stream(seed, "initial-phase"),
        &mut trace.log,
    )?;
    let mut state = BanditState::new(m, plan.policy_config.beta)?;
    for phase in 1..=plan.num_boot_phases {
        state.reset();
        trace.resets += 1;
        trace
            .scoring
            .push(run_scoring_pass(learner, &mut state, phase)?);
        let mut rng = indexed_stream(seed, "policy", phase as u64);
        run_boot_phase(learner, &mut state, plan, phase, &mut rng, &mut trace.log)?;
    }
    Ok(trace)
}

/// Selection counts over policy-driven (boot phase) iterations.
pub fn selection_histogram(log: &[IterationRecord], num_samples: usize) -> Vec<u64> {
    let mut counts = vec![0; num_samples];
    for rec in log.iter().filter(|r| r.phase > 0) {
        if let Some(c) = counts.get_mut(rec.sample_id) {
            *c += 1;
        }
    }
    counts
}

/// Fraction of corrupted selections in each phase, indexed by phase number.
pub fn corrupted_share_per_phase(log: &[IterationRecord], corrupted: &[bool]) -> Vec<f64> {
    let phases = log.iter().map(|r| r.phase + 1).max().unwrap_or(0);
    let mut hits = vec![0u64; phases];
    let mut totals = vec![0u64; phases];
    for rec in log {
        totals[rec.phase] += 1;
        hits[rec.phase] += u64::from(corrupted.get(rec.sample_id).copied().unwrap_or(false));
    }
    hits.iter()
        .zip(&totals)
        .map(|(&h, &n)| if n == 0 { 0.0 } else { h as f64 / n as f64 })
        .collect()
}

/// Fraction of corrupted selections over all boot phases.
pub fn boot_corrupted_share(log: &[IterationRecord], corrupted: &[bool]) -> f64 {
    let boot: Vec<_> = log.iter().filter(|r| r.phase > 0).collect();
    if boot.is_empty() {
        return 0.0;
    }
    let hits = boot
        .iter()
        .filter(|r| corrupted.get(r.sample_id).copied().unwrap_or(false))
        .count();
    hits as f64 / boot.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub policy: Policy,
    pub seed: u64,
    pub trace: Trace,
    pub histogram: Vec<u64>,
    pub corrupted: Vec<bool>,
    pub corrupted_share_per_phase: Vec<f64>,
    pub boot_corrupted_share: f64,
    /// Held-out Dice per organ class (classes `1..num_classes`), segmentation runs only.
    pub dsc: Option<Vec<f64>>,
    pub model: Option<ToyPixelClassifier>,
}

impl RunResult {
    fn from_trace(plan: &PhasePlan, seed: u64, trace: Trace, corrupted: Vec<bool>) -> Self {
        Self {
            policy: plan.policy,
            seed,
            histogram: selection_histogram(&trace.log, corrupted.len()),
            corrupted_share_per_phase: corrupted_share_per_phase(&trace.log, &corrupted),
            boot_corrupted_share: boot_corrupted_share(&trace.log, &corrupted),
            trace,
            corrupted,
            dsc: None,
            model: None,
        }
    }
}

pub fn run_scripted(plan: &PhasePlan, corpus: &ScriptedCorpus, seed: u64) -> Result<RunResult> {
    let mut trainer = SimulatedTrainer::new(corpus.learner.clone());
    let trace = run_experiment(plan, &mut trainer, seed)?;
    Ok(RunResult::from_trace(
        plan,
        seed,
        trace,
        corpus.corrupted.clone(),
    ))
}

/// Pooled held-out Dice of each organ class under `model`.
pub fn evaluate_dsc(model: &ToyPixelClassifier, held_out: &[LabeledSlice]) -> Result<Vec<f64>> {
    let mut acc = vec![DiceAccumulator::default(); model.num_classes - 1];
    for slice in held_out {
        let pred = model.predict(slice)?.argmax_labels();
        for (c, a) in acc.iter_mut().enumerate() {
            a.add(&pred, &slice.labels, (c + 1) as u8)?;
        }
    }
    Ok(acc.iter().map(DiceAccumulator::score).collect())
}

/// Generates the corpus for `seed`, trains from zero weights and scores the held-out split.
pub fn run_segmentation(plan: &PhasePlan, spec: &SegmentationSpec, seed: u64) -> Result<RunResult> {
    let slices = generate_segmentation_corpus(spec, seed)?;
    let held_out = generate_held_out(spec, seed)?;
    run_segmentation_on(plan, spec, &slices, &held_out, seed)
}

pub fn run_segmentation_on(
    plan: &PhasePlan,
    spec: &SegmentationSpec,
    slices: &[LabeledSlice],
    held_out: &[LabeledSlice],
    seed: u64,
) -> Result<RunResult> {
    let model = ToyPixelClassifier::new(FEATURE_DIM, spec.num_classes, spec.learning_rate)?;
    let mut trainer = SegmentationTrainer { model, slices };
    let trace = run_experiment(plan, &mut trainer, seed)?;
    let corrupted = slices.iter().map(|s| s.corrupted).collect();
    let mut result = RunResult::from_trace(plan, seed, trace, corrupted);
    result.dsc = Some(evaluate_dsc(&trainer.model, held_out)?);
    result.model = Some(trainer.model);
    Ok(result)
}
