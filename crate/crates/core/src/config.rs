//! Pipeline configuration, read from a single TOML file.
//!
//! Every field is optional and falls back to the documented default.
//! Unknown keys are rejected so that typos surface as errors.
//!
//! ```toml
//! seed = 7
//!
//! [normalization]          # source preparation for `normalize`
//! strip_punctuation = true
//! lowercase = true
//! strip_symbols = true
//!
//! [alignment]
//! band = 500               # omit for the full table
//! [alignment.normalization]
//! strip_punctuation = true
//! lowercase = true
//! strip_symbols = false
//!
//! [segmentation]
//! strategy = "pause"       # "punct" | "pause" | "fixed"
//! pause_threshold_sec = 1.0
//! max_tokens = 50
//! fixed_length = 10
//! abbreviations = ["Mr.", "Mrs.", "Dr.", "St.", "No.", "U.S."]
//!
//! [augmentation]
//! p_max = 0.3
//!
//! [mixture]
//! augmented_fraction = 0.2
//! [mixture.corpus_weights]
//! WMT = 0.9
//! IWSLT = 0.1
//!
//! [bleu]
//! max_order = 4
//! case_sensitive = true
//! smoothing = "none"       # "none" | "add-one"
//!
//! [noise]
//! substitution_rate = 0.05
//! boundary_merge_rate = 0.2
//! boundary_split_rate = 0.05
//! vocabulary = ["uh", "the"]
//!
//! [buckets]
//! bounds = [[0, 20], [20, 40], [40, 60]]
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::AlignmentConfig;
use crate::augment::{AugmentError, AugmentationConfig, MixtureSpec};
use crate::eval::{validate_buckets, BleuConfig, EvalError, LengthBucket, DEFAULT_BUCKETS};
use crate::noise::{NoiseConfig, NoiseError};
use crate::segment::{PauseSplitConfig, SegmentError, SentenceBreaker, DEFAULT_ABBREVIATIONS};
use crate::text::NormalizationPolicy;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("segmentation: {0}")]
    Segmentation(#[from] SegmentError),
    #[error("fixed_length must be at least 1")]
    ZeroFixedLength,
    #[error("{0}")]
    Augmentation(#[from] AugmentError),
    #[error("noise: {0}")]
    Noise(#[from] NoiseError),
    #[error("buckets: {0}")]
    Buckets(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Punct,
    Pause,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationSection {
    pub strategy: Strategy,
    pub pause_threshold_sec: f64,
    pub max_tokens: usize,
    pub fixed_length: usize,
    pub abbreviations: Vec<String>,
}

impl Default for SegmentationSection {
    fn default() -> Self {
        SegmentationSection {
            strategy: Strategy::Punct,
            pause_threshold_sec: PauseSplitConfig::DEFAULT_THRESHOLD_SEC,
            max_tokens: 50,
            fixed_length: 10,
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SegmentationSection {
    pub fn pause_config(&self) -> Result<PauseSplitConfig, SegmentError> {
        PauseSplitConfig::new(self.pause_threshold_sec, self.max_tokens)
    }

    pub fn breaker(&self) -> SentenceBreaker {
        SentenceBreaker::new(self.abbreviations.iter().cloned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationSection {
    pub p_max: f64,
}

impl Default for AugmentationSection {
    fn default() -> Self {
        AugmentationSection {
            p_max: AugmentationConfig::DEFAULT_P_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BucketSection {
    pub bounds: Vec<(usize, usize)>,
}

impl Default for BucketSection {
    fn default() -> Self {
        BucketSection {
            bounds: DEFAULT_BUCKETS.iter().map(|b| (b.lower, b.upper)).collect(),
        }
    }
}

impl BucketSection {
    pub fn buckets(&self) -> Vec<LengthBucket> {
        self.bounds.iter().map(|&(l, u)| LengthBucket::new(l, u)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// When set, replaces the seed of every randomized stage.
    pub seed: Option<u64>,
    pub normalization: NormalizationPolicy,
    pub alignment: AlignmentConfig,
    pub segmentation: SegmentationSection,
    pub augmentation: AugmentationSection,
    pub mixture: MixtureSpec,
    pub bleu: BleuConfig,
    pub noise: NoiseConfig,
    pub buckets: BucketSection,
    pub paths: BTreeMap<String, String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            normalization: NormalizationPolicy::STRIPPED,
            alignment: AlignmentConfig::default(),
            segmentation: SegmentationSection::default(),
            augmentation: AugmentationSection::default(),
            mixture: MixtureSpec::default(),
            bleu: BleuConfig::default(),
            noise: NoiseConfig::default(),
            buckets: BucketSection::default(),
            paths: BTreeMap::new(),
        }
    }
}

impl PipelineConfig {
    /// Parses and validates a configuration file.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if let Some(seed) = cfg.seed {
            cfg.mixture.seed = seed;
            cfg.noise.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.segmentation.pause_config()?;
        if self.segmentation.fixed_length == 0 {
            return Err(ConfigError::ZeroFixedLength);
        }
        self.augmentation_config(0)?;
        if !self.mixture.corpus_weights.is_empty() {
            self.mixture.validate()?;
        }
        self.noise.validate()?;
        if self.bleu.max_order == 0 {
            return Err(EvalError::ZeroOrder.into());
        }
        validate_buckets(&self.buckets.buckets())?;
        Ok(())
    }

    pub fn effective_seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(0)
    }

    pub fn augmentation_config(&self, seed: u64) -> Result<AugmentationConfig, AugmentError> {
        AugmentationConfig::new(self.augmentation.p_max, seed)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
