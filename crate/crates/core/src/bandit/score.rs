//! Closed-form score functions shared by the UCB and RUCB policies.

use crate::error::{Error, Result};

/// Classic UCB1 index: `x_bar + sqrt(2 ln n / n_k)`.
pub fn classic_ucb_score(x_bar: f64, n: u64, n_k: u64) -> Result<f64> {
    if n_k == 0 {
        return Err(Error::InvalidArgument(
            "arm trial count n_k must be >= 1".into(),
        ));
    }
    if n < n_k {
        return Err(Error::InvalidArgument(format!(
            "total trials n = {n} is smaller than arm trials n_k = {n_k}"
        )));
    }
    Ok(x_bar + exploration_term(n, n_k))
}

/// `sqrt(2 ln n / n_i)`; callers guarantee `n >= 1` and `n_i >= 1`.
pub fn exploration_term(n: u64, n_i: u64) -> f64 {
    (2.0 * (n as f64).ln() / n_i as f64).sqrt()
}

fn corpus_mean(j_bar_all: &[f64]) -> f64 {
    j_bar_all.iter().sum::<f64>() / j_bar_all.len() as f64
}

fn normalize_with_mean(j_bar: f64, mean: f64, beta: f64) -> f64 {
    if mean > 0.0 {
        (0.5 * beta * j_bar / mean).min(beta)
    } else {
        0.0
    }
}

/// Normalized reward `min(beta, (beta / 2) * j_bar_i / mean(j_bar_all))`.
///
/// A corpus whose rewards are all zero normalizes to zero everywhere.
pub fn normalize_reward(j_bar_i: f64, j_bar_all: &[f64], beta: f64) -> Result<f64> {
    check_normalize_args(j_bar_all, beta)?;
    if j_bar_i < 0.0 {
        return Err(Error::InvalidArgument(
            "average reward must be non-negative".into(),
        ));
    }
    Ok(normalize_with_mean(j_bar_i, corpus_mean(j_bar_all), beta))
}

/// [`normalize_reward`] for every sample at once, computing the corpus mean once.
pub fn normalized_rewards(j_bar_all: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_normalize_args(j_bar_all, beta)?;
    let mean = corpus_mean(j_bar_all);
    Ok(j_bar_all
        .iter()
        .map(|&j| normalize_with_mean(j, mean, beta))
        .collect())
}

fn check_normalize_args(j_bar_all: &[f64], beta: f64) -> Result<()> {
    if j_bar_all.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    if j_bar_all.iter().any(|&j| !(j >= 0.0)) {
        return Err(Error::InvalidArgument(
            "average rewards must be non-negative".into(),
        ));
    }
    Ok(())
}

/// Relaxed UCB score `j_tilde + sqrt(2 ln n / n_i)`.
pub fn ucb_score(j_tilde: f64, n: u64, n_i: u64) -> Result<f64> {
    if n_i == 0 {
        return Err(Error::InvalidArgument(
            "sample selection count n_i must be >= 1".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "total selection count n must be >= 1".into(),
        ));
    }
    Ok(j_tilde + exploration_term(n, n_i))
}

/// Arithmetic mean and population standard deviation (divisor `M`).
pub fn population_stats(q: &[f64]) -> (f64, f64) {
    if q.is_empty() {
        return (0.0, 0.0);
    }
    let m = q.len() as f64;
    let mu = q.iter().sum::<f64>() / m;
    let var = q.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / m;
    (mu, var.sqrt())
}

/// Number of initial scores strictly above `mu + alpha * sigma`, at least 1.
pub fn dynamic_k(q_initial: &[f64], mu: f64, sigma: f64, alpha: f64) -> usize {
    let threshold = mu + alpha * sigma;
    q_initial.iter().filter(|&&q| q > threshold).count().max(1)
}
