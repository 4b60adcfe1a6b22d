//! Cross-boundary augmentation of parallel data and the two-level
//! training mixture.
//!
//! Adjacent sentence pairs are merged into one example that starts part
//! way into the first sentence and stops part way into the second,
//! imitating a segment with a wrong start and a wrong break. The mixture
//! then draws a corpus by weight, an original or augmented pool by a
//! per-corpus fraction, and an example uniformly with replacement.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::text::Segment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("bitext pair has an empty {0} side")]
    EmptySide(&'static str),
    #[error("p_max must lie in (0, 1], got {0}")]
    InvalidPMax(f64),
    #[error("corpus weights must be non-negative and sum to 1, got sum {0}")]
    InvalidWeights(f64),
    #[error("augmented fraction for {label:?} must lie in [0, 1], got {value}")]
    InvalidFraction { label: String, value: f64 },
    #[error("corpus {0:?} is named in the mixture but was not provided")]
    UnknownCorpus(String),
    #[error("corpus {label:?} has an empty {pool} pool but is drawn from")]
    EmptyPool { label: String, pool: &'static str },
}

/// A source/target sentence pair tagged with the corpus it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitextPair {
    source: Segment,
    target: Segment,
    origin: String,
}

impl BitextPair {
    pub fn new(source: Segment, target: Segment, origin: impl Into<String>) -> Result<Self, AugmentError> {
        if source.is_empty() {
            return Err(AugmentError::EmptySide("source"));
        }
        if target.is_empty() {
            return Err(AugmentError::EmptySide("target"));
        }
        Ok(BitextPair {
            source,
            target,
            origin: origin.into(),
        })
    }

    pub fn source(&self) -> &Segment {
        &self.source
    }

    pub fn target(&self) -> &Segment {
        &self.target
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AugmentationConfig {
    p_max: f64,
    seed: u64,
}

impl AugmentationConfig {
    pub const DEFAULT_P_MAX: f64 = 0.3;

    pub fn new(p_max: f64, seed: u64) -> Result<Self, AugmentError> {
        if !(p_max > 0.0 && p_max <= 1.0) {
            return Err(AugmentError::InvalidPMax(p_max));
        }
        Ok(AugmentationConfig { p_max, seed })
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        AugmentationConfig { seed, ..self }
    }
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            p_max: Self::DEFAULT_P_MAX,
            seed: 0,
        }
    }
}

/// `ceil(p * len)`, capped at `len`.
pub fn truncation_count(p: f64, len: usize) -> usize {
    ((p * len as f64).ceil() as usize).min(len)
}

/// Merges two adjacent pairs with one shared truncation ratio `p`.
///
/// The first `ceil(p * len)` tokens of each side of `first` are dropped and
/// the first `ceil(p * len)` tokens of each side of `second` are appended,
/// with counts computed separately per sequence. Returns `None` when either
/// side of the result would be empty.
///
/// # Panics
///
/// If `p` is outside `[0, 1]`.
pub fn augment_pair(first: &BitextPair, second: &BitextPair, p: f64) -> Option<BitextPair> {
    assert!((0.0..=1.0).contains(&p), "truncation ratio {p} outside [0, 1]");
    let splice = |head: &Segment, tail: &Segment| -> Segment {
        let drop = truncation_count(p, head.len());
        let keep = truncation_count(p, tail.len());
        head.tokens()[drop..]
            .iter()
            .chain(&tail.tokens()[..keep])
            .cloned()
            .collect()
    };
    let source = splice(&first.source, &second.source);
    let target = splice(&first.target, &second.target);
    BitextPair::new(source, target, first.origin.clone()).ok()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AugmentedCorpus {
    pub pairs: Vec<BitextPair>,
    /// Merged pairs discarded because a side came out empty.
    pub skipped: usize,
    /// Trailing unpaired sentences copied through unchanged.
    pub passthrough: usize,
}

/// The ratio drawn for the merge of pairs `2 * merge_index` and `2 * merge_index + 1`.
pub fn sample_ratio(cfg: &AugmentationConfig, merge_index: usize) -> f64 {
    rng::indexed(cfg.seed(), merge_index as u64).gen::<f64>() * cfg.p_max()
}

/// Merges consecutive disjoint pairs `(0, 1), (2, 3), ...`, drawing one
/// ratio uniformly from `[0, p_max)` per merge. An odd trailing pair is
/// passed through unchanged.
pub fn augment_corpus(pairs: &[BitextPair], cfg: &AugmentationConfig) -> AugmentedCorpus {
    let mut out = AugmentedCorpus::default();
    for (merge_index, chunk) in pairs.chunks(2).enumerate() {
        match chunk {
            [first, second] => match augment_pair(first, second, sample_ratio(cfg, merge_index)) {
                Some(pair) => out.pairs.push(pair),
                None => out.skipped += 1,
            },
            [single] => {
                out.pairs.push(single.clone());
                out.passthrough += 1;
            }
            _ => unreachable!("chunks(2) yields one or two items"),
        }
    }
    out
}

/// Original and augmented examples of one corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusPools {
    pub originals: Vec<BitextPair>,
    pub augmented: Vec<BitextPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureSpec {
    /// Corpus label to sampling probability.
    pub corpus_weights: BTreeMap<String, f64>,
    /// Probability of drawing from the augmented pool.
    pub augmented_fraction: f64,
    /// Per-corpus overrides of `augmented_fraction`.
    pub augmented_fraction_by_corpus: BTreeMap<String, f64>,
    pub seed: u64,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        MixtureSpec {
            corpus_weights: BTreeMap::new(),
            augmented_fraction: 0.2,
            augmented_fraction_by_corpus: BTreeMap::new(),
            seed: 0,
        }
    }
}

impl MixtureSpec {
    pub fn new<I, S>(weights: I, augmented_fraction: f64, seed: u64) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        MixtureSpec {
            corpus_weights: weights.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            augmented_fraction,
            augmented_fraction_by_corpus: BTreeMap::new(),
            seed,
        }
    }

    pub fn fraction_for(&self, label: &str) -> f64 {
        self.augmented_fraction_by_corpus
            .get(label)
            .copied()
            .unwrap_or(self.augmented_fraction)
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        let sum: f64 = self.corpus_weights.values().sum();
        let bad = self.corpus_weights.values().any(|w| !w.is_finite() || *w < 0.0);
        if bad || self.corpus_weights.is_empty() || (sum - 1.0).abs() > 1e-9 {
            return Err(AugmentError::InvalidWeights(sum));
        }
        for label in self.corpus_weights.keys() {
            let value = self.fraction_for(label);
            if !(0.0..=1.0).contains(&value) {
                return Err(AugmentError::InvalidFraction {
                    label: label.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Which pool one mixture draw came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixtureDraw {
    pub corpus: String,
    pub augmented: bool,
    pub index: usize,
}

/// Performs `total` seeded draws and reports where each one landed.
pub fn sample_mixture(
    corpora: &BTreeMap<String, CorpusPools>,
    spec: &MixtureSpec,
    total: usize,
) -> Result<Vec<MixtureDraw>, AugmentError> {
    spec.validate()?;
    let mut table = Vec::with_capacity(spec.corpus_weights.len());
    for (label, &weight) in &spec.corpus_weights {
        let pools = corpora
            .get(label)
            .ok_or_else(|| AugmentError::UnknownCorpus(label.clone()))?;
        let fraction = spec.fraction_for(label);
        if weight > 0.0 {
            if fraction < 1.0 && pools.originals.is_empty() {
                return Err(AugmentError::EmptyPool { label: label.clone(), pool: "original" });
            }
            if fraction > 0.0 && pools.augmented.is_empty() {
                return Err(AugmentError::EmptyPool { label: label.clone(), pool: "augmented" });
            }
        }
        table.push((label, weight, fraction, pools));
    }

    let mut rng = rng::seeded(spec.seed);
    let last_live = table.iter().rposition(|t| t.1 > 0.0).expect("weights sum to 1");
    let mut draws = Vec::with_capacity(total);
    for _ in 0..total {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = last_live;
        for (i, entry) in table.iter().enumerate() {
            acc += entry.1;
            if entry.1 > 0.0 && u < acc {
                chosen = i;
                break;
            }
        }
        let (label, _, fraction, pools) = table[chosen];
        let augmented = rng.gen::<f64>() < fraction;
        let pool = if augmented { &pools.augmented } else { &pools.originals };
        let index = rng.gen_range(0..pool.len());
        draws.push(MixtureDraw {
            corpus: label.clone(),
            augmented,
            index,
        });
    }
    Ok(draws)
}

/// Materializes `total` training examples drawn by [`sample_mixture`].
pub fn build_training_mixture(
    corpora: &BTreeMap<String, CorpusPools>,
    spec: &MixtureSpec,
    total: usize,
) -> Result<Vec<BitextPair>, AugmentError> {
    let draws = sample_mixture(corpora, spec, total)?;
    Ok(draws
        .into_iter()
        .map(|d| {
            let pools = &corpora[&d.corpus];
            let pool = if d.augmented { &pools.augmented } else { &pools.originals };
            pool[d.index].clone()
        })
        .collect())
}
