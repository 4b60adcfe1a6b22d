//! Corpus BLEU, BLEU after reference-boundary projection, error-variant
//! construction and per-length-bucket sentence scores.
//!
//! BLEU follows the usual corpus definition: clipped n-gram matches and
//! totals are summed over all segment pairs, and the score is computed
//! once from the sums. [`BleuStats`] carries those sums so that scores over
//! many documents aggregate without depending on order.

use std::borrow::Cow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{project_boundaries, project_boundary_positions, AlignmentConfig};
use crate::text::{flatten, Segment, SegmentedDocument, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },
    #[error("no non-empty reference segment")]
    EmptyReference,
    #[error("{0} document is empty")]
    EmptyDocument(&'static str),
    #[error("max n-gram order must be at least 1")]
    ZeroOrder,
    #[error("bucket bounds must be non-empty, ordered and disjoint: {0}")]
    InvalidBuckets(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    None,
    /// Adds one to matches and totals of every order above 1.
    AddOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BleuConfig {
    pub max_order: usize,
    pub case_sensitive: bool,
    pub smoothing: Smoothing,
}

impl BleuConfig {
    /// Unsmoothed, case-sensitive 4-gram BLEU.
    pub const fn corpus() -> Self {
        BleuConfig {
            max_order: 4,
            case_sensitive: true,
            smoothing: Smoothing::None,
        }
    }

    /// As [`BleuConfig::corpus`] but with add-one smoothing, for scoring single sentences.
    pub const fn sentence() -> Self {
        BleuConfig {
            smoothing: Smoothing::AddOne,
            ..Self::corpus()
        }
    }
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self::corpus()
    }
}

/// Summed clipped n-gram statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn zero(max_order: usize) -> Self {
        BleuStats {
            matches: vec![0; max_order],
            totals: vec![0; max_order],
            hyp_len: 0,
            ref_len: 0,
        }
    }

    pub fn max_order(&self) -> usize {
        self.matches.len()
    }

    /// Statistics of one hypothesis against one reference.
    pub fn of_pair(hypothesis: &Segment, reference: &Segment, cfg: &BleuConfig) -> Self {
        let hyp = words(hypothesis, cfg.case_sensitive);
        let rf = words(reference, cfg.case_sensitive);
        let hyp: Vec<&str> = hyp.iter().map(AsRef::as_ref).collect();
        let rf: Vec<&str> = rf.iter().map(AsRef::as_ref).collect();

        let mut stats = BleuStats::zero(cfg.max_order);
        stats.hyp_len = hyp.len() as u64;
        stats.ref_len = rf.len() as u64;
        for n in 1..=cfg.max_order {
            if hyp.len() < n {
                break;
            }
            let mut ref_counts: HashMap<&[&str], u64> = HashMap::new();
            for gram in rf.windows(n) {
                *ref_counts.entry(gram).or_default() += 1;
            }
            let mut hyp_counts: HashMap<&[&str], u64> = HashMap::new();
            for gram in hyp.windows(n) {
                *hyp_counts.entry(gram).or_default() += 1;
            }
            stats.totals[n - 1] = (hyp.len() + 1 - n) as u64;
            stats.matches[n - 1] = hyp_counts
                .iter()
                .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    /// Per-order precisions, smoothed as configured.
    pub fn precisions(&self, smoothing: Smoothing) -> Vec<f64> {
        self.matches
            .iter()
            .zip(&self.totals)
            .enumerate()
            .map(|(i, (&m, &t))| match smoothing {
                Smoothing::AddOne if i > 0 => (m + 1) as f64 / (t + 1) as f64,
                _ if t == 0 => 0.0,
                _ => m as f64 / t as f64,
            })
            .collect()
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        }
    }

    pub fn report(&self, smoothing: Smoothing) -> BleuReport {
        let precisions = self.precisions(smoothing);
        let brevity_penalty = self.brevity_penalty();
        let score = if brevity_penalty == 0.0 || precisions.contains(&0.0) {
            0.0
        } else {
            let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
            100.0 * brevity_penalty * mean_log.exp()
        };
        BleuReport {
            score,
            ngram_precisions: precisions,
            brevity_penalty,
            hyp_len: self.hyp_len,
            ref_len: self.ref_len,
            matches: self.matches.clone(),
            totals: self.totals.clone(),
        }
    }
}

impl std::ops::AddAssign<&BleuStats> for BleuStats {
    fn add_assign(&mut self, rhs: &BleuStats) {
        assert_eq!(self.max_order(), rhs.max_order(), "mismatched n-gram orders");
        for (a, b) in self.matches.iter_mut().zip(&rhs.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&rhs.totals) {
            *a += b;
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

fn words(segment: &Segment, case_sensitive: bool) -> Vec<Cow<'_, str>> {
    segment
        .words()
        .map(|w| {
            if case_sensitive {
                Cow::Borrowed(w)
            } else {
                Cow::Owned(w.to_lowercase())
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuReport {
    /// 0 to 100.
    pub score: f64,
    pub ngram_precisions: Vec<f64>,
    /// 0 only for an empty hypothesis.
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
}

/// Summed statistics over aligned hypothesis/reference lists.
pub fn corpus_stats(
    hypotheses: &[Segment],
    references: &[Segment],
    cfg: &BleuConfig,
) -> Result<BleuStats, EvalError> {
    if cfg.max_order == 0 {
        return Err(EvalError::ZeroOrder);
    }
    if hypotheses.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    let mut stats = BleuStats::zero(cfg.max_order);
    for (h, r) in hypotheses.iter().zip(references) {
        stats += &BleuStats::of_pair(h, r, cfg);
    }
    if stats.ref_len == 0 {
        return Err(EvalError::EmptyReference);
    }
    Ok(stats)
}

pub fn corpus_bleu(
    hypotheses: &[Segment],
    references: &[Segment],
    cfg: &BleuConfig,
) -> Result<BleuReport, EvalError> {
    Ok(corpus_stats(hypotheses, references, cfg)?.report(cfg.smoothing))
}

/// Cuts the hypothesis token stream at the reference boundaries projected
/// onto it. Always returns one segment per reference segment; a reference
/// boundary that collapses onto the previous one yields an empty segment.
pub fn resegment(
    hyp_doc: &SegmentedDocument,
    ref_doc: &SegmentedDocument,
    align: &AlignmentConfig,
) -> Vec<Segment> {
    let (hyp_tokens, _) = flatten(hyp_doc);
    let (ref_tokens, ref_bounds) = flatten(ref_doc);
    let mapped = project_boundary_positions(&ref_tokens, &ref_bounds, &hyp_tokens, align);
    cut_at(&hyp_tokens, &mapped)
}

fn cut_at(tokens: &[Token], mapped: &[Option<usize>]) -> Vec<Segment> {
    let mut segments = Vec::with_capacity(mapped.len());
    let mut start = 0;
    for (i, position) in mapped.iter().enumerate() {
        let end = if i + 1 == mapped.len() {
            tokens.len()
        } else {
            position.map_or(start, |p| (p + 1).max(start))
        };
        segments.push(Segment::new(tokens[start..end].to_vec()));
        start = end;
    }
    segments
}

/// BLEU statistics of a hypothesis document after resegmentation against its reference.
pub fn resegment_stats(
    hyp_doc: &SegmentedDocument,
    ref_doc: &SegmentedDocument,
    cfg: &BleuConfig,
    align: &AlignmentConfig,
) -> Result<BleuStats, EvalError> {
    let hyps = resegment(hyp_doc, ref_doc, align);
    corpus_stats(&hyps, ref_doc.segments(), cfg)
}

/// BLEU of a hypothesis document whose segmentation need not match the reference.
pub fn resegment_and_score(
    hyp_doc: &SegmentedDocument,
    ref_doc: &SegmentedDocument,
    cfg: &BleuConfig,
    align: &AlignmentConfig,
) -> Result<BleuReport, EvalError> {
    Ok(resegment_stats(hyp_doc, ref_doc, cfg, align)?.report(cfg.smoothing))
}

/// Gold and System transcripts plus the two single-error-type variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorVariantSet {
    pub gold: SegmentedDocument,
    pub system: SegmentedDocument,
    /// System tokens with Gold boundaries.
    pub recognition_errors: SegmentedDocument,
    /// Gold tokens with System boundaries.
    pub segmentation_errors: SegmentedDocument,
}

pub fn make_error_variants(
    gold: &SegmentedDocument,
    system: &SegmentedDocument,
    align: &AlignmentConfig,
) -> Result<ErrorVariantSet, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyDocument("gold"));
    }
    if system.is_empty() {
        return Err(EvalError::EmptyDocument("system"));
    }
    let (gold_tokens, _) = flatten(gold);
    let (system_tokens, _) = flatten(system);
    Ok(ErrorVariantSet {
        gold: gold.clone(),
        system: system.clone(),
        recognition_errors: project_boundaries(gold, &system_tokens, align).with_doc_id(system.doc_id()),
        segmentation_errors: project_boundaries(system, &gold_tokens, align).with_doc_id(gold.doc_id()),
    })
}

/// A reference-length range `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBucket {
    pub lower: usize,
    pub upper: usize,
}

impl LengthBucket {
    pub const fn new(lower: usize, upper: usize) -> Self {
        LengthBucket { lower, upper }
    }

    pub fn contains(&self, len: usize) -> bool {
        self.lower <= len && len < self.upper
    }
}

pub const DEFAULT_BUCKETS: [LengthBucket; 3] = [
    LengthBucket::new(0, 20),
    LengthBucket::new(20, 40),
    LengthBucket::new(40, 60),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketScore {
    pub lower: usize,
    pub upper: usize,
    /// Mean sentence BLEU; `None` when the bucket is empty.
    pub mean_score: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthBucketReport {
    pub buckets: Vec<BucketScore>,
}

impl LengthBucketReport {
    pub fn empty(bounds: &[LengthBucket]) -> Self {
        LengthBucketReport {
            buckets: bounds
                .iter()
                .map(|b| BucketScore { lower: b.lower, upper: b.upper, mean_score: None, count: 0 })
                .collect(),
        }
    }

    /// Folds another report with the same bounds into this one.
    pub fn merge(&mut self, other: &LengthBucketReport) {
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            let total = a.count + b.count;
            if total > 0 {
                let sum = a.mean_score.unwrap_or(0.0) * a.count as f64
                    + b.mean_score.unwrap_or(0.0) * b.count as f64;
                a.mean_score = Some(sum / total as f64);
            }
            a.count = total;
        }
    }
}

pub fn validate_buckets(bounds: &[LengthBucket]) -> Result<(), EvalError> {
    if bounds.is_empty() {
        return Err(EvalError::InvalidBuckets("no buckets".into()));
    }
    if let Some(b) = bounds.iter().find(|b| b.lower >= b.upper) {
        return Err(EvalError::InvalidBuckets(format!("{}:{} is empty", b.lower, b.upper)));
    }
    if let Some(w) = bounds.windows(2).find(|w| w[0].upper > w[1].lower) {
        return Err(EvalError::InvalidBuckets(format!(
            "{}:{} overlaps or follows {}:{}",
            w[1].lower, w[1].upper, w[0].lower, w[0].upper
        )));
    }
    Ok(())
}

/// Mean sentence-level BLEU grouped by reference segment length, after resegmentation.
///
/// Sentences whose reference length falls outside every bucket are ignored.
pub fn bucket_report(
    hyp_doc: &SegmentedDocument,
    ref_doc: &SegmentedDocument,
    bounds: &[LengthBucket],
    cfg: &BleuConfig,
    align: &AlignmentConfig,
) -> Result<LengthBucketReport, EvalError> {
    validate_buckets(bounds)?;
    if cfg.max_order == 0 {
        return Err(EvalError::ZeroOrder);
    }
    let hyps = resegment(hyp_doc, ref_doc, align);
    let mut sums = vec![(0.0f64, 0usize); bounds.len()];
    for (h, r) in hyps.iter().zip(ref_doc.segments()) {
        if let Some(slot) = bounds.iter().position(|b| b.contains(r.len())) {
            let score = BleuStats::of_pair(h, r, cfg).report(cfg.smoothing).score;
            sums[slot].0 += score;
            sums[slot].1 += 1;
        }
    }
    Ok(LengthBucketReport {
        buckets: bounds
            .iter()
            .zip(sums)
            .map(|(b, (sum, count))| BucketScore {
                lower: b.lower,
                upper: b.upper,
                mean_score: (count > 0).then(|| sum / count as f64),
                count,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn doc(lines: &[&str]) -> SegmentedDocument {
        SegmentedDocument::new("d", lines.iter().map(|l| tokenize(l)).collect()).unwrap()
    }

    fn segs(lines: &[&str]) -> Vec<Segment> {
        lines.iter().map(|l| tokenize(l)).collect()
    }

    #[test]
    fn identical_corpus_scores_100() {
        let r = segs(&["the cat sat on the mat", "a dog barked"]);
        let report = corpus_bleu(&r, &r, &BleuConfig::corpus()).unwrap();
        assert_eq!(report.score, 100.0);
        assert_eq!(report.brevity_penalty, 1.0);
    }

    #[test]
    fn clipped_unigram_precision() {
        let h = segs(&["the the the the the the the"]);
        let r = segs(&["the cat is on the mat"]);
        let report = corpus_bleu(&h, &r, &BleuConfig::corpus()).unwrap();
        assert_eq!(report.matches[0], 2);
        assert_eq!(report.totals[0], 7);
        assert!((report.ngram_precisions[0] - 2.0 / 7.0).abs() <= 1e-9 * (2.0 / 7.0));
        assert_eq!(report.score, 0.0);
    }

    #[test]
    fn empty_hypothesis_scores_zero() {
        let h = segs(&[""]);
        let r = segs(&["a b c"]);
        let report = corpus_bleu(&h, &r, &BleuConfig::corpus()).unwrap();
        assert_eq!(report.score, 0.0);
        assert_eq!(report.brevity_penalty, 0.0);
    }

    #[test]
    fn brevity_penalty_applies_when_short() {
        let h = segs(&["a b c d"]);
        let r = segs(&["a b c d e f g h"]);
        let report = corpus_bleu(&h, &r, &BleuConfig::corpus()).unwrap();
        assert!((report.brevity_penalty - (1.0f64 - 2.0).exp()).abs() < 1e-15);
        assert!((report.score - 100.0 * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn case_handling() {
        let h = segs(&["The Cat sat on mats"]);
        let r = segs(&["the cat sat on mats"]);
        assert!(corpus_bleu(&h, &r, &BleuConfig::corpus()).unwrap().score < 100.0);
        let insensitive = BleuConfig { case_sensitive: false, ..BleuConfig::corpus() };
        assert_eq!(corpus_bleu(&h, &r, &insensitive).unwrap().score, 100.0);
    }

    #[test]
    fn errors() {
        let cfg = BleuConfig::corpus();
        assert_eq!(
            corpus_bleu(&segs(&["a"]), &segs(&["a", "b"]), &cfg),
            Err(EvalError::LengthMismatch { hypotheses: 1, references: 2 })
        );
        assert_eq!(corpus_bleu(&segs(&["a"]), &segs(&[""]), &cfg), Err(EvalError::EmptyReference));
        assert_eq!(corpus_bleu(&[], &[], &cfg), Err(EvalError::EmptyReference));
        let zero = BleuConfig { max_order: 0, ..cfg };
        assert_eq!(corpus_bleu(&segs(&["a"]), &segs(&["a"]), &zero), Err(EvalError::ZeroOrder));
    }

    #[test]
    fn add_one_smoothing_on_short_sentence() {
        let h = segs(&["a b"]);
        let r = segs(&["a b"]);
        let report = corpus_bleu(&h, &r, &BleuConfig::sentence()).unwrap();
        assert_eq!(report.ngram_precisions, vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(report.score, 100.0);
    }

    #[test]
    fn resegmentation_restores_reference_split() {
        let r = doc(&["a b c", "d e", "f g h i"]);
        let h = doc(&["a", "b c d e f", "g h i"]);
        let cfg = BleuConfig::corpus();
        let align = AlignmentConfig::default();
        assert_eq!(resegment(&h, &r, &align), r.segments());
        assert_eq!(resegment_and_score(&h, &r, &cfg, &align).unwrap().score, 100.0);
        assert_eq!(resegment_and_score(&r, &r, &cfg, &align).unwrap().score, 100.0);
    }

    #[test]
    fn one_substitution_costs_one_unigram_match() {
        let cfg = BleuConfig::corpus();
        let align = AlignmentConfig::default();
        let r = doc(&["the weather today was warm", "we went outside again"]);
        let identical = resegment_and_score(&r, &r, &cfg, &align).unwrap();
        let h = doc(&["the whether today was warm we", "went outside again"]);
        let noisy = resegment_and_score(&h, &r, &cfg, &align).unwrap();
        assert_eq!(identical.matches[0] - noisy.matches[0], 1);
        assert_eq!(identical.totals[0], noisy.totals[0]);
    }

    #[test]
    fn collapsed_boundaries_leave_empty_hypotheses() {
        let r = doc(&["a", "b", "c"]);
        let h = doc(&["c"]);
        let out = resegment(&h, &r, &AlignmentConfig::exact());
        assert_eq!(out.len(), 3);
        assert_eq!(out.iter().map(Segment::len).collect::<Vec<_>>(), [0, 0, 1]);
    }

    #[test]
    fn variants_reproduce_the_worked_example() {
        let gold = doc(&["the weather today was warm"]);
        let system = doc(&["the whether", "today was warm"]);
        let v = make_error_variants(&gold, &system, &AlignmentConfig::default()).unwrap();
        assert_eq!(v.recognition_errors.segments(), doc(&["the whether today was warm"]).segments());
        assert_eq!(v.segmentation_errors.segments(), doc(&["the weather", "today was warm"]).segments());
    }

    #[test]
    fn variants_with_identical_tokens() {
        let gold = doc(&["a b c d"]);
        let system = doc(&["a b", "c d"]);
        let v = make_error_variants(&gold, &system, &AlignmentConfig::default()).unwrap();
        assert_eq!(v.recognition_errors, gold);
        assert_eq!(v.segmentation_errors, system);
        let same = make_error_variants(&gold, &gold, &AlignmentConfig::default()).unwrap();
        assert_eq!(same.recognition_errors, gold);
        assert_eq!(same.segmentation_errors, gold);
    }

    #[test]
    fn variants_reject_empty_input() {
        let gold = doc(&["a"]);
        let empty = SegmentedDocument::default();
        let a = AlignmentConfig::default();
        assert_eq!(make_error_variants(&empty, &gold, &a), Err(EvalError::EmptyDocument("gold")));
        assert_eq!(make_error_variants(&gold, &empty, &a), Err(EvalError::EmptyDocument("system")));
    }

    #[test]
    fn bucket_examples() {
        let short = "w ".repeat(5);
        let long = "v ".repeat(25);
        let r = doc(&[short.trim(), long.trim()]);
        let one = bucket_report(&r, &r, &[LengthBucket::new(0, 20)], &BleuConfig::sentence(), &AlignmentConfig::default())
            .unwrap();
        assert_eq!(one.buckets[0].count, 1);
        let two = bucket_report(
            &r,
            &r,
            &[LengthBucket::new(0, 20), LengthBucket::new(20, 40)],
            &BleuConfig::sentence(),
            &AlignmentConfig::default(),
        )
        .unwrap();
        assert_eq!(two.buckets.iter().map(|b| b.count).collect::<Vec<_>>(), [1, 1]);
        assert!(two.buckets.iter().all(|b| b.mean_score == Some(100.0)));
        let defaults =
            bucket_report(&r, &r, &DEFAULT_BUCKETS, &BleuConfig::sentence(), &AlignmentConfig::default()).unwrap();
        assert_eq!(defaults.buckets[2].count, 0);
        assert_eq!(defaults.buckets[2].mean_score, None);
    }

    #[test]
    fn bucket_validation() {
        assert!(validate_buckets(&DEFAULT_BUCKETS).is_ok());
        assert!(validate_buckets(&[]).is_err());
        assert!(validate_buckets(&[LengthBucket::new(5, 5)]).is_err());
        assert!(validate_buckets(&[LengthBucket::new(0, 20), LengthBucket::new(10, 30)]).is_err());
        assert!(validate_buckets(&[LengthBucket::new(20, 40), LengthBucket::new(0, 20)]).is_err());
    }

    #[test]
    fn merging_bucket_reports_weights_by_count() {
        let mut a = LengthBucketReport {
            buckets: vec![BucketScore { lower: 0, upper: 20, mean_score: Some(50.0), count: 1 }],
        };
        let b = LengthBucketReport {
            buckets: vec![BucketScore { lower: 0, upper: 20, mean_score: Some(80.0), count: 3 }],
        };
        a.merge(&b);
        assert_eq!(a.buckets[0].count, 4);
        assert_eq!(a.buckets[0].mean_score, Some(72.5));
    }
}
