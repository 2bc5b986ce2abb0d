use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{dynamic_k, BanditState, PolicyConfig, RucbVariant};
use crate::error::{Error, Result};

/// Outcome of one relaxed-UCB draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RucbPick {
    pub sample_id: usize,
    /// Threshold multiplier used for this draw; `None` for the fixed-K variant.
    pub alpha: Option<f64>,
    pub k: usize,
}

/// Indices of the `k` largest scores, ordered by descending score then ascending id.
pub fn top_k_candidates(scores: &[f64], k: usize) -> Vec<usize> {
    let k = k.min(scores.len());
    let by_rank = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    if k == 0 {
        return Vec::new();
    }
    if k < ids.len() {
        ids.select_nth_unstable_by(k - 1, by_rank);
        ids.truncate(k);
    }
    ids.sort_unstable_by(by_rank);
    ids
}

/// Relaxed UCB selection.
///
/// Draw order on `rng` is part of the reproducibility contract: for the
/// dynamic variant one `f64` in `[0, 1)` scaled by `a`, then one index in
/// `[0, K)` into [`top_k_candidates`] of the live scores.
pub fn select_rucb<R: Rng + ?Sized>(
    state: &BanditState,
    config: &PolicyConfig,
    rng: &mut R,
) -> Result<RucbPick> {
    let phase = state.phase().ok_or_else(|| {
        Error::InvalidState("RUCB selection requires a completed scoring pass".into())
    })?;
    let (alpha, k) = match config.variant {
        RucbVariant::Dynamic => {
            let alpha = rng.gen::<f64>() * config.a;
            (
                Some(alpha),
                dynamic_k(&phase.initial_scores, phase.mu, phase.sigma, alpha),
            )
        }
        RucbVariant::FixedAlpha(alpha) => (
            Some(alpha),
            dynamic_k(&phase.initial_scores, phase.mu, phase.sigma, alpha),
        ),
        RucbVariant::FixedK(k) => {
            if k == 0 {
                return Err(Error::field("variant.fixed_k", "must be at least 1"));
            }
            (None, k.min(state.len()))
        }
    };
    let pool = top_k_candidates(state.scores(), k);
    let sample_id = pool[rng.gen_range(0..pool.len())];
    Ok(RucbPick {
        sample_id,
        alpha,
        k,
    })
}

/// Classic UCB: the sample with the largest live score, lowest id on ties.
pub fn select_ucb(state: &BanditState) -> Result<usize> {
    state.require_visited("UCB selection")?;
    Ok(top_k_candidates(state.scores(), 1)[0])
}

/// Hard-example mining baseline: uniform among the `pool` largest average rewards.
pub fn select_ohem<R: Rng + ?Sized>(
    state: &BanditState,
    pool: usize,
    rng: &mut R,
) -> Result<usize> {
    state.require_visited("OHEM selection")?;
    if pool == 0 {
        return Err(Error::field("ohem_pool", "must be at least 1"));
    }
    let candidates = top_k_candidates(&state.mean_rewards(), pool);
    Ok(candidates[rng.gen_range(0..candidates.len())])
}

pub fn select_uniform<R: Rng + ?Sized>(num_samples: usize, rng: &mut R) -> Result<usize> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument(
            "cannot sample from an empty corpus".into(),
        ));
    }
    Ok(rng.gen_range(0..num_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn state_with_means(means: &[f64]) -> BanditState {
        let mut s = BanditState::new(means.len(), 2.0).unwrap();
        for (i, &m) in means.iter().enumerate() {
            s.record_reward(i, m).unwrap();
        }
        s
    }

    #[test]
    fn top_k_orders_and_breaks_ties_by_id() {
        let scores = [0.5, 0.9, 0.9, 0.1, 0.9];
        assert_eq!(top_k_candidates(&scores, 2), vec![1, 2]);
        assert_eq!(top_k_candidates(&scores, 4), vec![1, 2, 4, 0]);
        assert_eq!(top_k_candidates(&scores, 10).len(), 5);
    }

    #[test]
    fn ucb_argmax_and_tie_break() {
        let s = state_with_means(&[0.1, 0.9, 0.5]);
        assert_eq!(select_ucb(&s).unwrap(), 1);
        let s = state_with_means(&[0.1, 0.2, 0.8, 0.2, 0.8]);
        assert_eq!(select_ucb(&s).unwrap(), 2);
    }

    #[test]
    fn baselines_require_scored_corpus() {
        let mut s = BanditState::new(3, 2.0).unwrap();
        s.record_reward(0, 0.1).unwrap();
        let mut rng = stream(1, "t");
        assert!(matches!(select_ucb(&s), Err(Error::InvalidState(_))));
        assert!(matches!(
            select_ohem(&s, 1, &mut rng),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            select_rucb(&s, &PolicyConfig::default(), &mut rng),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn ohem_pool_of_one_is_hardest_first() {
        let s = state_with_means(&[0.1, 0.3, 0.2]);
        let mut rng = stream(1, "ohem");
        for _ in 0..20 {
            assert_eq!(select_ohem(&s, 1, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn ohem_pool_of_two_is_even() {
        let s = state_with_means(&[0.5, 0.4, 0.1]);
        let mut rng = stream(11, "ohem");
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[select_ohem(&s, 2, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[2], 0);
        for c in &counts[..2] {
            assert!((*c as f64 / 10_000.0 - 0.5).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn ohem_full_pool_is_uniform() {
        let s = state_with_means(&[0.5, 0.4, 0.1, 0.3]);
        let mut rng = stream(5, "ohem");
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[select_ohem(&s, 4, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn uniform_draws() {
        let mut rng = stream(2, "u");
        assert_eq!(select_uniform(1, &mut rng).unwrap(), 0);
        assert!(select_uniform(0, &mut rng).is_err());
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[select_uniform(4, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.02, "{counts:?}");
        }
        let a: Vec<usize> = {
            let mut r = stream(9, "u");
            (0..50)
                .map(|_| select_uniform(7, &mut r).unwrap())
                .collect()
        };
        let b: Vec<usize> = {
            let mut r = stream(9, "u");
            (0..50)
                .map(|_| select_uniform(7, &mut r).unwrap())
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn rucb_k_one_is_argmax() {
        let mut s = state_with_means(&[0.1, 0.4, 0.2, 0.3]);
        s.freeze_phase().unwrap();
        let cfg = PolicyConfig {
            variant: RucbVariant::FixedK(1),
            ..PolicyConfig::default()
        };
        let mut rng = stream(3, "r");
        for _ in 0..10 {
            let pick = select_rucb(&s, &cfg, &mut rng).unwrap();
            assert_eq!(pick.sample_id, 1);
            assert_eq!(pick.alpha, None);
        }
    }

    #[test]
    fn rucb_alpha_above_all_scores_clamps_to_argmax() {
        let mut s = state_with_means(&[0.1, 0.4, 0.2, 0.3]);
        s.freeze_phase().unwrap();
        let cfg = PolicyConfig {
            variant: RucbVariant::FixedAlpha(100.0),
            ..PolicyConfig::default()
        };
        let pick = select_rucb(&s, &cfg, &mut stream(3, "r")).unwrap();
        assert_eq!((pick.sample_id, pick.k), (1, 1));
    }

    #[test]
    fn rucb_full_pool_is_uniform() {
        let mut s = state_with_means(&[0.1, 0.4, 0.2, 0.3, 0.05]);
        s.freeze_phase().unwrap();
        let cfg = PolicyConfig {
            variant: RucbVariant::FixedK(5),
            ..PolicyConfig::default()
        };
        let mut rng = stream(4, "r");
        let mut counts = [0usize; 5];
        for _ in 0..50_000 {
            counts[select_rucb(&s, &cfg, &mut rng).unwrap().sample_id] += 1;
        }
        for c in counts {
            assert!((c as f64 / 50_000.0 - 0.2).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn rucb_does_not_mutate_state() {
        let mut s = state_with_means(&[0.1, 0.4, 0.2]);
        s.freeze_phase().unwrap();
        let before = s.clone();
        select_rucb(&s, &PolicyConfig::default(), &mut stream(1, "r")).unwrap();
        assert_eq!(s, before);
    }
}
