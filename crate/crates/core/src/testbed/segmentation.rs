//! Toy segmentation corpus: rectangles and ellipses of organ classes on a
//! background, each class with its own intensity, plus two kinds of
//! annotation error (spurious inclusion and missing part).

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reward_model::LabeledSlice;
use crate::rng::{indexed_stream, stream, Rng as StreamRng};

/// Intensity plus normalized row and column.
pub const FEATURE_DIM: usize = 3;
/// Half-width of the uniform intensity noise around a class prototype.
pub const INTENSITY_JITTER: f64 = 0.08;
const MAX_ORGANS: usize = 3;
const INCLUSION_WIDTH: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationSpec {
    pub size: usize,
    #[serde(default = "defaults::side")]
    pub height: usize,
    #[serde(default = "defaults::side")]
    pub width: usize,
    /// Background plus organ classes.
    #[serde(default = "defaults::num_classes")]
    pub num_classes: usize,
    #[serde(default)]
    pub corruption_rate: f64,
    #[serde(default = "defaults::held_out")]
    pub held_out: usize,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
}

mod defaults {
    pub fn side() -> usize {
        16
    }
    pub fn num_classes() -> usize {
        5
    }
    pub fn held_out() -> usize {
        50
    }
    pub fn learning_rate() -> f64 {
        2.0
    }
}

impl SegmentationSpec {
    pub fn new(size: usize, corruption_rate: f64) -> Self {
        Self {
            size,
            height: defaults::side(),
            width: defaults::side(),
            num_classes: defaults::num_classes(),
            corruption_rate,
            held_out: defaults::held_out(),
            learning_rate: defaults::learning_rate(),
        }
    }

    pub fn check(&self) -> Vec<Error> {
        let mut errors = Vec::new();
        if self.size == 0 {
            errors.push(Error::field("size", "must be at least 1"));
        }
        if self.height < 4 {
            errors.push(Error::field("height", "must be at least 4"));
        }
        if self.width < 4 {
            errors.push(Error::field("width", "must be at least 4"));
        }
        if !(2..=256).contains(&self.num_classes) {
            errors.push(Error::field("num_classes", "must lie in [2, 256]"));
        }
        if !(0.0..=1.0).contains(&self.corruption_rate) {
            errors.push(Error::field("corruption_rate", "must lie in [0, 1]"));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            errors.push(Error::field(
                "learning_rate",
                "must be a non-negative finite number",
            ));
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        match self.check().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Mean intensity of a class: background at 0, organs evenly spaced up to 1.
pub fn class_prototype(class_id: u8, num_classes: usize) -> f64 {
    f64::from(class_id) / (num_classes - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    /// Background next to an organ is labeled as that organ.
    Inclusion,
    /// Part of an organ's mask is erased to background.
    MissingPart,
}

fn paint_slice(spec: &SegmentationSpec, rng: &mut StreamRng) -> Result<LabeledSlice> {
    let (h, w) = (spec.height, spec.width);
    let mut labels = vec![0u8; h * w];
    let organs = rng.gen_range(1..=MAX_ORGANS);
    for _ in 0..organs {
        let class = rng.gen_range(1..spec.num_classes) as u8;
        let elliptical = rng.gen_bool(0.5);
        let half_h = rng.gen_range((h / 8).max(1)..=(h / 4).max(1)) as f64;
        let half_w = rng.gen_range((w / 8).max(1)..=(w / 4).max(1)) as f64;
        let cr = rng.gen_range(0..h) as f64;
        let cc = rng.gen_range(0..w) as f64;
        for r in 0..h {
            for c in 0..w {
                let dr = (r as f64 - cr) / half_h;
                let dc = (c as f64 - cc) / half_w;
                let inside = if elliptical {
                    dr * dr + dc * dc <= 1.0
                } else {
                    dr.abs() <= 1.0 && dc.abs() <= 1.0
                };
                if inside {
                    labels[r * w + c] = class;
                }
            }
        }
    }
    let mut features = Vec::with_capacity(h * w * FEATURE_DIM);
    for r in 0..h {
        for c in 0..w {
            let proto = class_prototype(labels[r * w + c], spec.num_classes);
            features.push(proto + rng.gen_range(-INTENSITY_JITTER..INTENSITY_JITTER));
            features.push(r as f64 / (h - 1) as f64);
            features.push(c as f64 / (w - 1) as f64);
        }
    }
    LabeledSlice::new(h, w, FEATURE_DIM, spec.num_classes, features, labels, false)
}

/// The uncorrupted training slice `index`; a pure function of `(spec, seed, index)`.
pub fn generate_clean_slice(
    spec: &SegmentationSpec,
    seed: u64,
    index: usize,
) -> Result<LabeledSlice> {
    spec.validate()?;
    paint_slice(
        spec,
        &mut indexed_stream(seed, "segmentation-slice", index as u64),
    )
}

/// Clean evaluation slices drawn from a stream disjoint from the training corpus.
pub fn generate_held_out(spec: &SegmentationSpec, seed: u64) -> Result<Vec<LabeledSlice>> {
    spec.validate()?;
    (0..spec.held_out)
        .map(|i| {
            paint_slice(
                spec,
                &mut indexed_stream(seed, "segmentation-held-out", i as u64),
            )
        })
        .collect()
}

fn present_organs(slice: &LabeledSlice) -> Vec<u8> {
    let mut present: Vec<u8> = slice.labels.iter().copied().filter(|&l| l != 0).collect();
    present.sort_unstable();
    present.dedup();
    present
}

/// Injects one annotation error into `slice` and flags it.
///
/// Returns the mode actually applied: an inclusion on an organ with no
/// background around it falls back to a missing part.
pub fn corrupt_slice<R: Rng + ?Sized>(
    slice: &mut LabeledSlice,
    mode: CorruptionMode,
    rng: &mut R,
) -> Result<CorruptionMode> {
    let organs = present_organs(slice);
    if organs.is_empty() {
        return Err(Error::InvalidArgument(
            "slice has no organ to corrupt".into(),
        ));
    }
    let class = organs[rng.gen_range(0..organs.len())];
    let (h, w) = (slice.height, slice.width);
    let mut applied = mode;
    if mode == CorruptionMode::Inclusion {
        let near_organ = |r: usize, c: usize| {
            let rows = r.saturating_sub(INCLUSION_WIDTH)..=(r + INCLUSION_WIDTH).min(h - 1);
            rows.into_iter().any(|rr| {
                let cols = c.saturating_sub(INCLUSION_WIDTH)..=(c + INCLUSION_WIDTH).min(w - 1);
                cols.into_iter()
                    .any(|cc| slice.labels[rr * w + cc] == class)
            })
        };
        let ring: Vec<usize> = (0..h * w)
            .filter(|&j| slice.labels[j] == 0 && near_organ(j / w, j % w))
            .collect();
        if ring.is_empty() {
            applied = CorruptionMode::MissingPart;
        } else {
            for j in ring {
                slice.labels[j] = class;
            }
        }
    }
    if applied == CorruptionMode::MissingPart {
        let mask: Vec<usize> = (0..h * w).filter(|&j| slice.labels[j] == class).collect();
        let erase = mask.len().div_ceil(2);
        for &j in &mask[..erase] {
            slice.labels[j] = 0;
        }
    }
    slice.corrupted = true;
    Ok(applied)
}

/// Training corpus with exactly `round(size * corruption_rate)` corrupted slices.
pub fn generate_segmentation_corpus(
    spec: &SegmentationSpec,
    seed: u64,
) -> Result<Vec<LabeledSlice>> {
    spec.validate()?;
    let mut slices = (0..spec.size)
        .map(|i| generate_clean_slice(spec, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let count = ((spec.size as f64 * spec.corruption_rate).round() as usize).min(spec.size);
    let mut chosen = index::sample(
        &mut stream(seed, "segmentation-corruption"),
        spec.size,
        count,
    )
    .into_vec();
    chosen.sort_unstable();
    for i in chosen {
        let mut rng = indexed_stream(seed, "segmentation-corruption-mode", i as u64);
        let mode = if rng.gen_bool(0.5) {
            CorruptionMode::Inclusion
        } else {
            CorruptionMode::MissingPart
        };
        corrupt_slice(&mut slices[i], mode, &mut rng)?;
    }
    Ok(slices)
}
