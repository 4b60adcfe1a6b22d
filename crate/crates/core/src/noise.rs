//! Synthetic ASR-like corruption of segmented documents, used to build
//! System-style transcripts when no recognizer output is available.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::text::{flatten, rebuild_from_positions, Segment, SegmentedDocument, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("{name} must lie in [0, 1], got {value}")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("substitution and deletion rates must sum to at most 1, got {0}")]
    RateSumTooLarge(f64),
    #[error("substitutions or insertions requested with an empty vocabulary")]
    EmptyVocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub substitution_rate: f64,
    pub deletion_rate: f64,
    pub insertion_rate: f64,
    pub boundary_merge_rate: f64,
    pub boundary_split_rate: f64,
    pub vocabulary: Vec<Token>,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            substitution_rate: 0.0,
            deletion_rate: 0.0,
            insertion_rate: 0.0,
            boundary_merge_rate: 0.0,
            boundary_split_rate: 0.0,
            vocabulary: Vec::new(),
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), NoiseError> {
        // A limiting rate of exactly 1 is accepted so that "replace every
        // token" and "merge every boundary" can be expressed.
        let rates = [
            ("substitution_rate", self.substitution_rate),
            ("deletion_rate", self.deletion_rate),
            ("insertion_rate", self.insertion_rate),
            ("boundary_merge_rate", self.boundary_merge_rate),
            ("boundary_split_rate", self.boundary_split_rate),
        ];
        for (name, value) in rates {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::RateOutOfRange { name, value });
            }
        }
        let token_sum = self.substitution_rate + self.deletion_rate;
        if token_sum > 1.0 {
            return Err(NoiseError::RateSumTooLarge(token_sum));
        }
        if (self.substitution_rate > 0.0 || self.insertion_rate > 0.0) && self.vocabulary.is_empty() {
            return Err(NoiseError::EmptyVocabulary);
        }
        Ok(())
    }
}

/// Substitutes, deletes and inserts tokens independently per position.
///
/// Each token is substituted with `substitution_rate`, deleted with
/// `deletion_rate` and otherwise kept; after each original position a
/// vocabulary token is inserted with `insertion_rate`. Segments that lose
/// every token disappear, merging their boundary into the neighbour.
pub fn corrupt_tokens(doc: &SegmentedDocument, cfg: &NoiseConfig) -> Result<SegmentedDocument, NoiseError> {
    cfg.validate()?;
    let mut rng = rng::labelled(cfg.seed, "tokens", doc.doc_id());
    let segments = doc
        .segments()
        .iter()
        .map(|segment| {
            let mut out = Vec::with_capacity(segment.len());
            for token in segment.tokens() {
                let u: f64 = rng.gen();
                if u < cfg.substitution_rate {
                    out.push(substitute(token, &cfg.vocabulary, &mut rng));
                } else if u >= cfg.substitution_rate + cfg.deletion_rate {
                    out.push(token.clone());
                }
                if rng.gen::<f64>() < cfg.insertion_rate {
                    out.push(cfg.vocabulary.choose(&mut rng).expect("validated").clone());
                }
            }
            Segment::new(out)
        })
        .collect();
    Ok(SegmentedDocument::from_segments_lossy(doc.doc_id(), segments))
}

fn substitute(original: &Token, vocabulary: &[Token], rng: &mut rng::Rng) -> Token {
    let others = vocabulary.iter().filter(|t| *t != original).count();
    if others == 0 {
        return vocabulary.choose(rng).expect("validated").clone();
    }
    let pick = rng.gen_range(0..others);
    vocabulary
        .iter()
        .filter(|t| *t != original)
        .nth(pick)
        .expect("pick < others")
        .clone()
}

/// Removes internal boundaries with `boundary_merge_rate` and inserts new
/// ones into non-boundary gaps with `boundary_split_rate`. Tokens and the
/// final boundary are untouched.
pub fn corrupt_boundaries(doc: &SegmentedDocument, cfg: &NoiseConfig) -> Result<SegmentedDocument, NoiseError> {
    cfg.validate()?;
    let mut rng = rng::labelled(cfg.seed, "boundaries", doc.doc_id());
    let (tokens, boundaries) = flatten(doc);
    let n = tokens.len();
    let mut positions = Vec::with_capacity(boundaries.len());
    for gap in 0..n.saturating_sub(1) {
        let u: f64 = rng.gen();
        let keep = if boundaries.contains(gap) {
            u >= cfg.boundary_merge_rate
        } else {
            u < cfg.boundary_split_rate
        };
        if keep {
            positions.push(gap);
        }
    }
    Ok(rebuild_from_positions(doc.doc_id(), tokens, positions).expect("gaps index tokens"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn doc(lines: &[&str]) -> SegmentedDocument {
        SegmentedDocument::new("d", lines.iter().map(|l| tokenize(l)).collect()).unwrap()
    }

    fn vocab(words: &str) -> Vec<Token> {
        tokenize(words).into_tokens()
    }

    #[test]
    fn zero_rates_leave_document_unchanged() {
        let d = doc(&["a b c", "d e"]);
        let cfg = NoiseConfig::default();
        assert_eq!(corrupt_tokens(&d, &cfg).unwrap(), d);
        assert_eq!(corrupt_boundaries(&d, &cfg).unwrap(), d);
    }

    #[test]
    fn full_substitution_with_singleton_vocabulary() {
        let d = doc(&["a b c", "d e"]);
        let cfg = NoiseConfig { substitution_rate: 1.0, vocabulary: vocab("z"), ..Default::default() };
        let out = corrupt_tokens(&d, &cfg).unwrap();
        assert!(out.tokens().all(|t| t.as_str() == "z"));
        assert_eq!(out.segment_lengths(), d.segment_lengths());
    }

    #[test]
    fn substitution_avoids_original_when_possible() {
        let d = doc(&["a a a a a a a a"]);
        let cfg = NoiseConfig { substitution_rate: 1.0, vocabulary: vocab("a b"), ..Default::default() };
        let out = corrupt_tokens(&d, &cfg).unwrap();
        assert!(out.tokens().all(|t| t.as_str() == "b"));
    }

    #[test]
    fn full_deletion_empties_document() {
        let d = doc(&["a b", "c"]);
        let cfg = NoiseConfig { deletion_rate: 1.0, ..Default::default() };
        assert!(corrupt_tokens(&d, &cfg).unwrap().is_empty());
    }

    #[test]
    fn boundary_limits() {
        let d = doc(&["a b", "c d", "e"]);
        let merge = NoiseConfig { boundary_merge_rate: 1.0, ..Default::default() };
        assert_eq!(corrupt_boundaries(&d, &merge).unwrap().segment_lengths(), [5]);
        let split = NoiseConfig { boundary_split_rate: 1.0, ..Default::default() };
        assert_eq!(corrupt_boundaries(&d, &split).unwrap().segment_lengths(), [1, 1, 1, 1, 1]);
    }

    #[test]
    fn seeds_are_reproducible() {
        let d = doc(&["a b c d e f g h i j k l m n o p"]);
        let cfg = NoiseConfig {
            substitution_rate: 0.3,
            insertion_rate: 0.2,
            boundary_split_rate: 0.3,
            vocabulary: vocab("x y z"),
            seed: 9,
            ..Default::default()
        };
        assert_eq!(corrupt_tokens(&d, &cfg).unwrap(), corrupt_tokens(&d, &cfg).unwrap());
        assert_eq!(corrupt_boundaries(&d, &cfg).unwrap(), corrupt_boundaries(&d, &cfg).unwrap());
        let other = NoiseConfig { seed: 10, ..cfg.clone() };
        assert_ne!(corrupt_tokens(&d, &cfg).unwrap(), corrupt_tokens(&d, &other).unwrap());
    }

    #[test]
    fn validation() {
        let bad = NoiseConfig { deletion_rate: 1.5, ..Default::default() };
        assert!(matches!(bad.validate(), Err(NoiseError::RateOutOfRange { name: "deletion_rate", .. })));
        let sum = NoiseConfig { deletion_rate: 0.6, substitution_rate: 0.6, vocabulary: vocab("x"), ..Default::default() };
        assert!(matches!(sum.validate(), Err(NoiseError::RateSumTooLarge(_))));
        let no_vocab = NoiseConfig { insertion_rate: 0.1, ..Default::default() };
        assert_eq!(no_vocab.validate(), Err(NoiseError::EmptyVocabulary));
    }
}
