//! Deterministic synthetic corpora.

mod scripted;
mod segmentation;

pub use scripted::{
    generate_scripted_corpus, ScriptedCorpus, ScriptedCorpusSpec, SimulatedLearner,
};
pub use segmentation::{
    class_prototype, corrupt_slice, generate_clean_slice, generate_held_out,
    generate_segmentation_corpus, CorruptionMode, SegmentationSpec, FEATURE_DIM, INTENSITY_JITTER,
};
