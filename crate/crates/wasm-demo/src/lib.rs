//! Browser bindings for the selection simulator.
//!
//! Each export takes plain numbers and returns a JSON string so the page can
//! stay framework-free. The `*_json` functions are the same operations without
//! the JS boundary and are what the native tests exercise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rucb::bandit::{dynamic_k, exploration_term, BanditState, RucbVariant};
use rucb::report::emit_selection_report;
use rucb::rng::stream;
use rucb::scheduler::{
    run_initial_phase, run_scoring_pass, run_scripted, PhasePlan, Policy, SimulatedTrainer,
};
use rucb::testbed::{generate_scripted_corpus, ScriptedCorpusSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bounds that keep a single call interactive.
const MAX_SAMPLES: usize = 5_000;
const MAX_ITERATIONS: u64 = 200_000;

#[derive(Debug, Clone, Copy)]
pub struct CorpusParams {
    pub size: usize,
    pub corruption_rate: f64,
    pub inflation: f64,
    pub decay: f64,
    pub seed: u64,
}

impl CorpusParams {
    fn spec(&self) -> Result<ScriptedCorpusSpec, String> {
        if self.size > MAX_SAMPLES {
            return Err(format!("at most {MAX_SAMPLES} samples in the demo"));
        }
        let mut spec = ScriptedCorpusSpec::new(self.size, self.corruption_rate);
        spec.corruption_inflation = self.inflation;
        spec.decay = self.decay;
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Serialize)]
struct Selection {
    policy: &'static str,
    histogram: Vec<u64>,
    corrupted: Vec<bool>,
    share_per_phase: Vec<f64>,
    boot_share: f64,
    /// (window end, corrupted fraction) per 1000 iterations.
    share_series: Vec<(u64, f64)>,
    top: Vec<(usize, u64, bool)>,
    mean_k: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_selection_json(
    policy: &str,
    corpus: CorpusParams,
    initial_iters: u64,
    num_boot_phases: usize,
    t_per_phase: u64,
    a: f64,
    fixed_alpha: Option<f64>,
) -> Result<String, String> {
    let policy: Policy = policy.parse().map_err(|e: rucb::Error| e.to_string())?;
    let mut plan = PhasePlan {
        initial_iters,
        num_boot_phases,
        t_per_phase,
        policy,
        policy_config: Default::default(),
    };
    if plan.total_iterations() > MAX_ITERATIONS {
        return Err(format!("at most {MAX_ITERATIONS} iterations in the demo"));
    }
    plan.policy_config.a = a;
    if let Some(alpha) = fixed_alpha {
        plan.policy_config.variant = RucbVariant::FixedAlpha(alpha);
    }
    let data = generate_scripted_corpus(&corpus.spec()?, corpus.seed).map_err(|e| e.to_string())?;
    let run = run_scripted(&plan, &data, corpus.seed).map_err(|e| e.to_string())?;
    let report = emit_selection_report(&run.trace.log, corpus.size, Some(&data.corrupted))
        .map_err(|e| e.to_string())?;
    let ks: Vec<f64> = run
        .trace
        .log
        .iter()
        .filter_map(|r| r.k)
        .map(|k| k as f64)
        .collect();
    let out = Selection {
        policy: policy.label(),
        histogram: report.histogram,
        share_per_phase: run.corrupted_share_per_phase,
        boot_share: run.boot_corrupted_share,
        share_series: report
            .share_series
            .unwrap_or_default()
            .into_iter()
            .map(|w| (w.end, w.corrupted_fraction))
            .collect(),
        top: report
            .top
            .into_iter()
            .map(|t| (t.sample_id, t.count, t.corrupted.unwrap_or(false)))
            .collect(),
        mean_k: (!ks.is_empty()).then(|| ks.iter().sum::<f64>() / ks.len() as f64),
        corrupted: data.corrupted,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct KCurve {
    alpha: Vec<f64>,
    k: Vec<usize>,
    mu: f64,
    sigma: f64,
    /// Initial scores, largest first, with corruption flags.
    scores: Vec<(f64, bool)>,
}

/// Pool size K as a function of alpha after `initial_iters` uniform warm-up steps.
pub fn k_curve_json(
    corpus: CorpusParams,
    initial_iters: u64,
    a_max: f64,
    steps: usize,
) -> Result<String, String> {
    if initial_iters > MAX_ITERATIONS || steps == 0 || steps > 10_000 || !(a_max >= 0.0) {
        return Err(
            "need 1..=10000 steps, a non-negative alpha range and a bounded warm-up".into(),
        );
    }
    let data = generate_scripted_corpus(&corpus.spec()?, corpus.seed).map_err(|e| e.to_string())?;
    let mut trainer = SimulatedTrainer::new(data.learner.clone());
    run_initial_phase(
        &mut trainer,
        initial_iters,
        &mut stream(corpus.seed, "initial-phase"),
        &mut Vec::new(),
    )
    .map_err(|e| e.to_string())?;
    let mut state = BanditState::new(corpus.size, 2.0).map_err(|e| e.to_string())?;
    let pass = run_scoring_pass(&trainer, &mut state, 1).map_err(|e| e.to_string())?;
    let phase = state.phase().expect("scoring pass freezes the phase");
    let alpha: Vec<f64> = (0..=steps)
        .map(|i| a_max * i as f64 / steps as f64)
        .collect();
    let k = alpha
        .iter()
        .map(|&x| dynamic_k(&phase.initial_scores, pass.mu, pass.sigma, x))
        .collect();
    let mut scores: Vec<(f64, bool)> = phase
        .initial_scores
        .iter()
        .copied()
        .zip(data.corrupted)
        .collect();
    scores.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok(serde_json::to_string(&KCurve {
        alpha,
        k,
        mu: pass.mu,
        sigma: pass.sigma,
        scores,
    })
    .expect("serializable"))
}

#[derive(Serialize)]
struct Exploration {
    n: Vec<u64>,
    bonus: Vec<f64>,
}

/// `sqrt(2 ln n / n_i)` sampled at `points` values of n in `[n_min, n_max]`.
pub fn exploration_curve_json(
    n_min: u64,
    n_max: u64,
    n_i: u64,
    points: usize,
) -> Result<String, String> {
    if n_min == 0 || n_i == 0 || n_max < n_min || !(2..=2000).contains(&points) {
        return Err("need 1 <= n_min <= n_max, n_i >= 1 and 2..=2000 points".into());
    }
    let n: Vec<u64> = (0..points)
        .map(|i| n_min + ((n_max - n_min) as f64 * i as f64 / (points - 1) as f64).round() as u64)
        .collect();
    let bonus = n
        .iter()
        .map(|&x| exploration_term(x.max(n_i), n_i))
        .collect();
    Ok(serde_json::to_string(&Exploration { n, bonus }).expect("serializable"))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// `fixed_alpha < 0` means alpha is drawn from `U(0, a)` each step.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_selection(
    policy: &str,
    size: usize,
    corruption_rate: f64,
    inflation: f64,
    decay: f64,
    initial_iters: u32,
    num_boot_phases: u32,
    t_per_phase: u32,
    a: f64,
    fixed_alpha: f64,
    seed: u32,
) -> Result<String, JsError> {
    let corpus = CorpusParams {
        size,
        corruption_rate,
        inflation,
        decay,
        seed: u64::from(seed),
    };
    let fixed = (fixed_alpha >= 0.0).then_some(fixed_alpha);
    js(simulate_selection_json(
        policy,
        corpus,
        u64::from(initial_iters),
        num_boot_phases as usize,
        u64::from(t_per_phase),
        a,
        fixed,
    ))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn k_curve(
    size: usize,
    corruption_rate: f64,
    inflation: f64,
    decay: f64,
    initial_iters: u32,
    a_max: f64,
    steps: usize,
    seed: u32,
) -> Result<String, JsError> {
    let corpus = CorpusParams {
        size,
        corruption_rate,
        inflation,
        decay,
        seed: u64::from(seed),
    };
    js(k_curve_json(corpus, u64::from(initial_iters), a_max, steps))
}

#[wasm_bindgen]
pub fn exploration_curve(
    n_min: u32,
    n_max: u32,
    n_i: u32,
    points: usize,
) -> Result<String, JsError> {
    js(exploration_curve_json(
        u64::from(n_min),
        u64::from(n_max),
        u64::from(n_i),
        points,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn corpus() -> CorpusParams {
        CorpusParams {
            size: 100,
            corruption_rate: 0.05,
            inflation: 2.0,
            decay: 0.97,
            seed: 3,
        }
    }

    #[test]
    fn selection_output_shape() {
        let v: Value = serde_json::from_str(
            &simulate_selection_json("rucb", corpus(), 500, 2, 500, 3.0, None).unwrap(),
        )
        .unwrap();
        assert_eq!(v["histogram"].as_array().unwrap().len(), 100);
        assert_eq!(
            v["histogram"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .sum::<u64>(),
            1000
        );
        assert_eq!(v["share_per_phase"].as_array().unwrap().len(), 3);
        assert!(v["mean_k"].as_f64().unwrap() >= 1.0);
        let u: Value = serde_json::from_str(
            &simulate_selection_json("uniform", corpus(), 500, 2, 500, 3.0, None).unwrap(),
        )
        .unwrap();
        assert!(u["mean_k"].is_null());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(simulate_selection_json("greedy", corpus(), 10, 1, 10, 3.0, None).is_err());
        assert!(simulate_selection_json("ucb", corpus(), 10, 1, 1_000_000, 3.0, None).is_err());
        let mut big = corpus();
        big.size = MAX_SAMPLES + 1;
        assert!(k_curve_json(big, 10, 3.0, 10).is_err());
        assert!(exploration_curve_json(0, 10, 1, 5).is_err());
    }

    #[test]
    fn k_is_non_increasing_in_alpha() {
        let v: Value =
            serde_json::from_str(&k_curve_json(corpus(), 1000, 3.0, 60).unwrap()).unwrap();
        let k: Vec<u64> = v["k"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert_eq!(k.len(), 61);
        assert!(k.windows(2).all(|w| w[0] >= w[1]));
        assert!(k[60] >= 1);
    }

    #[test]
    fn exploration_curve_endpoints() {
        let v: Value =
            serde_json::from_str(&exploration_curve_json(20_000, 80_000, 1, 4).unwrap()).unwrap();
        let b = v["bonus"].as_array().unwrap();
        assert!((b[0].as_f64().unwrap() - exploration_term(20_000, 1)).abs() < 1e-12);
        assert_eq!(v["n"][3].as_u64().unwrap(), 80_000);
    }
}
