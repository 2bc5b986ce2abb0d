use serde::{Deserialize, Serialize};

use super::slice::{LabeledSlice, ProbabilityMap};
use crate::error::{Error, Result};

/// Probabilities are floored here before taking logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Mean per-pixel cross-entropy `-(1/HW) Σ_j log p_{j, y_j}`.
pub fn cross_entropy_reward(probs: &ProbabilityMap, labels: &[u8]) -> Result<f64> {
    if labels.len() != probs.num_pixels() || probs.probs.len() != labels.len() * probs.num_classes {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {}x{} probability map",
            labels.len(),
            probs.height,
            probs.width
        )));
    }
    let mut total = 0.0;
    for (j, &label) in labels.iter().enumerate() {
        let p = *probs.pixel(j).get(usize::from(label)).ok_or_else(|| {
            Error::InvalidArgument(format!("label {label} outside probability map classes"))
        })?;
        total -= p.max(PROBABILITY_FLOOR).ln();
    }
    // -ln(1) is -0.0
    Ok((total / labels.len() as f64).max(0.0))
}

/// Linear-softmax pixel classifier standing in for a segmentation network.
///
/// Scores are `bias[c] + Σ_f x_f · weights[f * num_classes + c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyPixelClassifier {
    pub feature_dim: usize,
    pub num_classes: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub learning_rate: f64,
}

/// Gradient of the mean cross-entropy with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ToyPixelClassifier {
    pub fn new(feature_dim: usize, num_classes: usize, learning_rate: f64) -> Result<Self> {
        if feature_dim == 0 || num_classes < 2 {
            return Err(Error::InvalidArgument(
                "classifier needs at least one feature and two classes".into(),
            ));
        }
        if !(learning_rate >= 0.0) || !learning_rate.is_finite() {
            return Err(Error::field(
                "learning_rate",
                "must be a non-negative finite number",
            ));
        }
        Ok(Self {
            feature_dim,
            num_classes,
            weights: vec![0.0; feature_dim * num_classes],
            bias: vec![0.0; num_classes],
            learning_rate,
        })
    }

    fn check(&self, slice: &LabeledSlice) -> Result<()> {
        if slice.feature_dim != self.feature_dim || slice.num_classes != self.num_classes {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features / {} classes, slice has {} / {}",
                self.feature_dim, self.num_classes, slice.feature_dim, slice.num_classes
            )));
        }
        Ok(())
    }

    fn softmax_into(&self, x: &[f64], out: &mut [f64]) {
        let c = self.num_classes;
        out.copy_from_slice(&self.bias);
        for (f, &xf) in x.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(&self.weights[f * c..(f + 1) * c]) {
                *o += xf * w;
            }
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            z += *o;
        }
        for o in out.iter_mut() {
            *o /= z;
        }
    }

    pub fn predict(&self, slice: &LabeledSlice) -> Result<ProbabilityMap> {
        self.check(slice)?;
        let c = self.num_classes;
        let mut probs = vec![0.0; slice.num_pixels() * c];
        for (j, out) in probs.chunks_exact_mut(c).enumerate() {
            self.softmax_into(slice.pixel_features(j), out);
        }
        Ok(ProbabilityMap {
            height: slice.height,
            width: slice.width,
            num_classes: c,
            probs,
        })
    }

    /// Reward of `slice` under the current parameters.
    pub fn reward(&self, slice: &LabeledSlice) -> Result<f64> {
        cross_entropy_reward(&self.predict(slice)?, &slice.labels)
    }

    /// Reward and the analytic gradient of the (unfloored) mean cross-entropy.
    pub fn loss_and_gradient(&self, slice: &LabeledSlice) -> Result<(f64, Gradient)> {
        let map = self.predict(slice)?;
        let loss = cross_entropy_reward(&map, &slice.labels)?;
        let c = self.num_classes;
        let scale = 1.0 / slice.num_pixels() as f64;
        let mut grad = Gradient {
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; c],
        };
        let mut delta = vec![0.0; c];
        for (j, &label) in slice.labels.iter().enumerate() {
            delta.copy_from_slice(map.pixel(j));
            delta[usize::from(label)] -= 1.0;
            for (g, d) in grad.bias.iter_mut().zip(&delta) {
                *g += scale * d;
            }
            for (f, &xf) in slice.pixel_features(j).iter().enumerate() {
                for (g, d) in grad.weights[f * c..(f + 1) * c].iter_mut().zip(&delta) {
                    *g += scale * xf * d;
                }
            }
        }
        Ok((loss, grad))
    }

    /// One gradient-descent step on `slice`; returns the reward before the update.
    ///
    /// Parameters are left untouched when the loss, the gradient or the updated
    /// parameters are not finite.
    pub fn train_step(&mut self, slice: &LabeledSlice) -> Result<f64> {
        let (loss, grad) = self.loss_and_gradient(slice)?;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !loss.is_finite() || !finite(&grad.weights) || !finite(&grad.bias) {
            return Err(Error::NumericalBlowUp(
                "non-finite loss or gradient; lower the learning rate".into(),
            ));
        }
        let lr = self.learning_rate;
        let weights: Vec<f64> = self
            .weights
            .iter()
            .zip(&grad.weights)
            .map(|(w, g)| w - lr * g)
            .collect();
        let bias: Vec<f64> = self
            .bias
            .iter()
            .zip(&grad.bias)
            .map(|(b, g)| b - lr * g)
            .collect();
        if !finite(&weights) || !finite(&bias) {
            return Err(Error::NumericalBlowUp(
                "parameters overflowed; lower the learning rate".into(),
            ));
        }
        self.weights = weights;
        self.bias = bias;
        Ok(loss)
    }
}
