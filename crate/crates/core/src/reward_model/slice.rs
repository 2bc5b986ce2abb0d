use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One training image: per-pixel feature vectors and class labels.
///
/// Label 0 is background; organs are `1..num_classes`. `corrupted` marks an
/// injected annotation error and is never consulted by a selection policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSlice {
    pub height: usize,
    pub width: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
    /// Row-major `height * width * feature_dim`.
    pub features: Vec<f64>,
    /// Row-major `height * width`.
    pub labels: Vec<u8>,
    pub corrupted: bool,
}

impl LabeledSlice {
    pub fn new(
        height: usize,
        width: usize,
        feature_dim: usize,
        num_classes: usize,
        features: Vec<f64>,
        labels: Vec<u8>,
        corrupted: bool,
    ) -> Result<Self> {
        let slice = Self {
            height,
            width,
            feature_dim,
            num_classes,
            features,
            labels,
            corrupted,
        };
        slice.validate()?;
        Ok(slice)
    }

    pub fn validate(&self) -> Result<()> {
        let pixels = self.height * self.width;
        if pixels == 0 || self.feature_dim == 0 {
            return Err(Error::DimensionMismatch(
                "slice has zero pixels or features".into(),
            ));
        }
        if !(2..=256).contains(&self.num_classes) {
            return Err(Error::DimensionMismatch(format!(
                "num_classes = {} outside [2, 256]",
                self.num_classes
            )));
        }
        if self.labels.len() != pixels {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}x{} grid",
                self.labels.len(),
                self.height,
                self.width
            )));
        }
        if self.features.len() != pixels * self.feature_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values for {} pixels of dimension {}",
                self.features.len(),
                pixels,
                self.feature_dim
            )));
        }
        if let Some(&l) = self
            .labels
            .iter()
            .find(|&&l| usize::from(l) >= self.num_classes)
        {
            return Err(Error::InvalidArgument(format!(
                "label {l} outside [0, {})",
                self.num_classes
            )));
        }
        Ok(())
    }

    pub fn num_pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn pixel_features(&self, pixel: usize) -> &[f64] {
        &self.features[pixel * self.feature_dim..(pixel + 1) * self.feature_dim]
    }

    pub fn class_pixel_count(&self, class_id: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class_id).count()
    }
}

/// Per-pixel class probabilities, row-major `height * width * num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    pub height: usize,
    pub width: usize,
    pub num_classes: usize,
    pub probs: Vec<f64>,
}

impl ProbabilityMap {
    pub fn num_pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn pixel(&self, pixel: usize) -> &[f64] {
        &self.probs[pixel * self.num_classes..(pixel + 1) * self.num_classes]
    }

    /// Most probable class per pixel; the lowest class id wins ties.
    pub fn argmax_labels(&self) -> Vec<u8> {
        self.probs
            .chunks_exact(self.num_classes)
            .map(|p| {
                let mut best = 0;
                for (c, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = c;
                    }
                }
                best as u8
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_dimensions() {
        assert!(LabeledSlice::new(2, 2, 1, 2, vec![0.0; 4], vec![0; 3], false).is_err());
        assert!(LabeledSlice::new(2, 2, 2, 2, vec![0.0; 4], vec![0; 4], false).is_err());
        assert!(LabeledSlice::new(2, 2, 1, 2, vec![0.0; 4], vec![0, 1, 2, 0], false).is_err());
        assert!(LabeledSlice::new(2, 2, 1, 3, vec![0.0; 4], vec![0, 1, 2, 0], false).is_ok());
    }

    #[test]
    fn argmax_prefers_lowest_on_ties() {
        let map = ProbabilityMap {
            height: 1,
            width: 2,
            num_classes: 3,
            probs: vec![0.4, 0.4, 0.2, 0.1, 0.2, 0.7],
        };
        assert_eq!(map.argmax_labels(), vec![0, 2]);
    }
}
