use crate::error::{Error, Result};

/// Dice-Sørensen coefficient `2|A∩B| / (|A| + |B|)` of one class.
///
/// Two empty masks score 1.0.
pub fn dice_score(pred_labels: &[u8], true_labels: &[u8], class_id: u8) -> Result<f64> {
    let mut acc = DiceAccumulator::default();
    acc.add(pred_labels, true_labels, class_id)?;
    Ok(acc.score())
}

/// Pools overlap counts of one class across many slices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiceAccumulator {
    pub intersection: u64,
    pub predicted: u64,
    pub actual: u64,
}

impl DiceAccumulator {
    pub fn add(&mut self, pred_labels: &[u8], true_labels: &[u8], class_id: u8) -> Result<()> {
        if pred_labels.len() != true_labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predicted labels vs {} true labels",
                pred_labels.len(),
                true_labels.len()
            )));
        }
        for (&p, &t) in pred_labels.iter().zip(true_labels) {
            let (p, t) = (p == class_id, t == class_id);
            self.intersection += u64::from(p && t);
            self.predicted += u64::from(p);
            self.actual += u64::from(t);
        }
        Ok(())
    }

    pub fn score(&self) -> f64 {
        let denom = self.predicted + self.actual;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.intersection as f64 / denom as f64
        }
    }
}
