//! Per-slice reward, the toy pixel classifier that produces it, and Dice.

mod classifier;
mod dice;
mod slice;

pub use classifier::{cross_entropy_reward, Gradient, ToyPixelClassifier, PROBABILITY_FLOOR};
pub use dice::{dice_score, DiceAccumulator};
pub use slice::{LabeledSlice, ProbabilityMap};
