//! Corpus tooling for segmentation robustness in long-form speech translation.
//!
//! The crate covers the whole analysis loop around a translation system
//! that is treated as a black box:
//!
//! * [`text`]: tokens, segments, documents and source normalization.
//! * [`align`]: token-level Levenshtein alignment, WER, and projection of
//!   sentence boundaries from one transcript onto another.
//! * [`segment`]: punctuation, pause and fixed-length segmentation.
//! * [`augment`]: cross-boundary prefix/suffix augmentation of bitext and
//!   weighted training mixtures.
//! * [`eval`]: corpus BLEU, BLEU after resegmentation, Recognition-only and
//!   Segmentation-only error variants, length-bucket reports.
//! * [`noise`]: synthetic token and boundary corruption.
//! * [`formats`] and [`config`]: file formats and pipeline configuration.
//!
//! ```
//! use resegment::align::AlignmentConfig;
//! use resegment::eval::make_error_variants;
//! use resegment::formats::{document_from_lines, OneLine};
//!
//! let gold = document_from_lines("talk", &["the weather today was warm"]);
//! let system = document_from_lines("talk", &["the whether", "today was warm"]);
//! let v = make_error_variants(&gold, &system, &AlignmentConfig::default()).unwrap();
//! assert_eq!(OneLine(&v.recognition_errors).to_string(), "the whether today was warm");
//! assert_eq!(OneLine(&v.segmentation_errors).to_string(), "the weather | today was warm");
//! ```

pub mod align;
pub mod augment;
pub mod config;
pub mod eval;
pub mod formats;
pub mod noise;
pub mod rng;
pub mod segment;
pub mod text;

pub use align::{edit_distance, levenshtein_align, project_boundaries, wer, Alignment, AlignmentConfig, EditOp};
pub use augment::{augment_corpus, augment_pair, build_training_mixture, AugmentationConfig, BitextPair, MixtureSpec};
pub use config::PipelineConfig;
pub use eval::{corpus_bleu, make_error_variants, resegment_and_score, BleuConfig, BleuReport, ErrorVariantSet};
pub use segment::{break_on_punctuation, split_fixed_length, split_on_pauses, PauseSplitConfig, TimedTranscript};
pub use text::{flatten, normalize, rebuild, tokenize, BoundarySet, NormalizationPolicy, Segment, SegmentedDocument, Token};
