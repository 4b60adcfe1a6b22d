//! Token-level Levenshtein alignment, WER and sentence-boundary projection.
//!
//! Projection transfers the segment boundaries of one transcript onto the
//! token stream of another transcript of the same audio. Both sides are
//! aligned as flat token sequences (segment boundaries are ignored), then
//! each boundary after source token `k` is moved to sit after whichever
//! target token `k` was aligned to.
//!
//! The backtrace prefers, on equal cost, Match, then Substitute, then
//! Delete, then Insert, so identical inputs always produce identical edit
//! scripts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{
    flatten, normalize, rebuild_from_positions, BoundarySet, NormalizationPolicy, Segment,
    SegmentedDocument, Token,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("reference is empty after normalization; error rate is undefined")]
    EmptyReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditKind {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// One step of an edit script from sequence A to sequence B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EditOp {
    Match { a: usize, b: usize },
    Substitute { a: usize, b: usize },
    Delete { a: usize },
    Insert { b: usize },
}

impl EditOp {
    pub fn kind(&self) -> EditKind {
        match self {
            EditOp::Match { .. } => EditKind::Match,
            EditOp::Substitute { .. } => EditKind::Substitute,
            EditOp::Delete { .. } => EditKind::Delete,
            EditOp::Insert { .. } => EditKind::Insert,
        }
    }

    pub fn a_index(&self) -> Option<usize> {
        match *self {
            EditOp::Match { a, .. } | EditOp::Substitute { a, .. } | EditOp::Delete { a } => Some(a),
            EditOp::Insert { .. } => None,
        }
    }

    pub fn b_index(&self) -> Option<usize> {
        match *self {
            EditOp::Match { b, .. } | EditOp::Substitute { b, .. } | EditOp::Insert { b } => Some(b),
            EditOp::Delete { .. } => None,
        }
    }

    pub fn cost(&self) -> usize {
        usize::from(!matches!(self, EditOp::Match { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    ops: Vec<EditOp>,
    a_len: usize,
    b_len: usize,
}

impl Alignment {
    pub fn ops(&self) -> &[EditOp] {
        &self.ops
    }

    pub fn a_len(&self) -> usize {
        self.a_len
    }

    pub fn b_len(&self) -> usize {
        self.b_len
    }

    /// Number of non-Match operations.
    pub fn distance(&self) -> usize {
        self.ops.iter().map(EditOp::cost).sum()
    }

    pub fn count(&self, kind: EditKind) -> usize {
        self.ops.iter().filter(|op| op.kind() == kind).count()
    }

    /// For every index of A, the B index it was matched or substituted with.
    pub fn a_to_b(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.a_len];
        for op in &self.ops {
            if let (Some(a), Some(b)) = (op.a_index(), op.b_index()) {
                map[a] = Some(b);
            }
        }
        map
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    /// Applied to both sides before tokens are compared. Projection output
    /// always carries the original target tokens.
    pub normalization: NormalizationPolicy,
    /// Optional half-width of a diagonal band. The band is widened to the
    /// length difference of the inputs when narrower. `None` runs the full
    /// table and is always optimal.
    pub band: Option<usize>,
}

impl AlignmentConfig {
    /// Case-insensitive, punctuation-insensitive matching.
    pub const fn lenient() -> Self {
        AlignmentConfig {
            normalization: NormalizationPolicy {
                strip_punctuation: true,
                lowercase: true,
                strip_symbols: false,
            },
            band: None,
        }
    }

    /// Tokens compared byte for byte.
    pub const fn exact() -> Self {
        AlignmentConfig {
            normalization: NormalizationPolicy::PUNCTUATED,
            band: None,
        }
    }
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self::lenient()
    }
}

// Backtrace moves, packed four per byte.
const DIAG_MATCH: u8 = 0;
const DIAG_SUB: u8 = 1;
const UP: u8 = 2;
const LEFT: u8 = 3;

const INF: u32 = u32::MAX / 2;

/// Maps tokens of both sides to dense ids of their normalized forms.
fn intern(a: &[Token], b: &[Token], policy: &NormalizationPolicy) -> (Vec<u32>, Vec<u32>) {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut key = |t: &Token| {
        let k = policy.apply(t.as_str());
        let next = ids.len() as u32;
        *ids.entry(k).or_insert(next)
    };
    let a_ids = a.iter().map(&mut key).collect();
    let b_ids = b.iter().map(&mut key).collect();
    (a_ids, b_ids)
}

struct MoveTable {
    bits: Vec<u8>,
    row_start: Vec<usize>,
    row_lo: Vec<usize>,
}

impl MoveTable {
    fn get(&self, i: usize, j: usize) -> u8 {
        let cell = self.row_start[i] + (j - self.row_lo[i]);
        (self.bits[cell / 4] >> ((cell % 4) * 2)) & 0b11
    }
}

/// Minimum unit-cost edit script from `a` to `b`.
pub fn levenshtein_align(a: &[Token], b: &[Token], cfg: &AlignmentConfig) -> Alignment {
    let (a_ids, b_ids) = intern(a, b, &cfg.normalization);
    align_ids(&a_ids, &b_ids, cfg.band)
}

fn align_ids(a: &[u32], b: &[u32], band: Option<usize>) -> Alignment {
    let n = a.len();
    let m = b.len();
    let width = band.map(|w| w.max(n.abs_diff(m)));
    let range = |i: usize| match width {
        Some(w) => (i.saturating_sub(w), (i + w).min(m)),
        None => (0, m),
    };

    let mut row_start = Vec::with_capacity(n + 1);
    let mut row_lo = Vec::with_capacity(n + 1);
    let mut cells = 0usize;
    for i in 0..=n {
        let (lo, hi) = range(i);
        row_start.push(cells);
        row_lo.push(lo);
        cells += hi - lo + 1;
    }
    let mut bits = vec![0u8; cells.div_ceil(4)];
    let mut set = |cell: usize, mv: u8| bits[cell / 4] |= mv << ((cell % 4) * 2);

    let mut prev = vec![INF; m + 2];
    let mut cur = vec![INF; m + 2];

    let (lo0, hi0) = range(0);
    for (j, slot) in prev.iter_mut().enumerate().take(hi0 + 1).skip(lo0) {
        *slot = j as u32;
        if j > 0 {
            set(row_start[0] + j - lo0, LEFT);
        }
    }
    if hi0 < m {
        prev[hi0 + 1] = INF;
    }

    for i in 1..=n {
        let (lo, hi) = range(i);
        if lo > 0 {
            cur[lo - 1] = INF;
        }
        cur[hi + 1] = INF;
        for j in lo..=hi {
            let (mut best, mut mv) = (INF, UP);
            if j > 0 {
                let same = a[i - 1] == b[j - 1];
                best = prev[j - 1] + u32::from(!same);
                mv = if same { DIAG_MATCH } else { DIAG_SUB };
            }
            let up = prev[j] + 1;
            if up < best {
                best = up;
                mv = UP;
            }
            if j > lo {
                let left = cur[j - 1] + 1;
                if left < best {
                    best = left;
                    mv = LEFT;
                }
            }
            cur[j] = best;
            set(row_start[i] + j - lo, mv);
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let table = MoveTable {
        bits,
        row_start,
        row_lo,
    };
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let mv = if i == 0 {
            LEFT
        } else if j == 0 {
            UP
        } else {
            table.get(i, j)
        };
        match mv {
            DIAG_MATCH => {
                ops.push(EditOp::Match { a: i - 1, b: j - 1 });
                i -= 1;
                j -= 1;
            }
            DIAG_SUB => {
                ops.push(EditOp::Substitute { a: i - 1, b: j - 1 });
                i -= 1;
                j -= 1;
            }
            UP => {
                ops.push(EditOp::Delete { a: i - 1 });
                i -= 1;
            }
            _ => {
                ops.push(EditOp::Insert { b: j - 1 });
                j -= 1;
            }
        }
    }
    ops.reverse();
    Alignment {
        ops,
        a_len: n,
        b_len: m,
    }
}

/// Edit distance under unit costs.
pub fn edit_distance(a: &[Token], b: &[Token], cfg: &AlignmentConfig) -> usize {
    levenshtein_align(a, b, cfg).distance()
}

/// Raw counts behind a word error rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WerCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_len: usize,
}

impl WerCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    pub fn rate(&self) -> Result<f64, AlignError> {
        if self.reference_len == 0 {
            return Err(AlignError::EmptyReference);
        }
        Ok(self.errors() as f64 / self.reference_len as f64)
    }
}

impl std::ops::AddAssign for WerCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.substitutions += rhs.substitutions;
        self.deletions += rhs.deletions;
        self.insertions += rhs.insertions;
        self.reference_len += rhs.reference_len;
    }
}

/// Error counts after case, punctuation and symbols are stripped from both sides.
pub fn wer_counts(reference: &[Token], hypothesis: &[Token]) -> WerCounts {
    let policy = NormalizationPolicy::STRIPPED;
    let reference = normalize(&Segment::new(reference.to_vec()), &policy);
    let hypothesis = normalize(&Segment::new(hypothesis.to_vec()), &policy);
    let alignment = levenshtein_align(reference.tokens(), hypothesis.tokens(), &AlignmentConfig::exact());
    WerCounts {
        substitutions: alignment.count(EditKind::Substitute),
        deletions: alignment.count(EditKind::Delete),
        insertions: alignment.count(EditKind::Insert),
        reference_len: reference.len(),
    }
}

/// Word error rate, ignoring case and punctuation.
pub fn wer(reference: &[Token], hypothesis: &[Token]) -> Result<f64, AlignError> {
    wer_counts(reference, hypothesis).rate()
}

/// Maps each source boundary onto the target sequence.
///
/// A boundary after source token `k` lands after the target token aligned
/// to the nearest source token at or before `k` that has an alignment
/// partner. `None` means no such token exists (the boundary would fall
/// before the first target token).
pub fn project_boundary_positions(
    source_tokens: &[Token],
    source_boundaries: &BoundarySet,
    target_tokens: &[Token],
    cfg: &AlignmentConfig,
) -> Vec<Option<usize>> {
    let alignment = levenshtein_align(source_tokens, target_tokens, cfg);
    let mut anchored = alignment.a_to_b();
    let mut last = None;
    for slot in anchored.iter_mut() {
        match slot {
            Some(b) => last = Some(*b),
            None => *slot = last,
        }
    }
    source_boundaries
        .positions()
        .iter()
        .map(|&k| anchored.get(k).copied().flatten())
        .collect()
}

/// Re-segments `target_tokens` with the boundaries of `source_doc`.
///
/// The target token stream is returned unchanged; only the segmentation
/// differs. Boundaries that collapse onto the same target position merge.
/// The source's end-of-document boundary always maps to the end of the
/// target, so trailing target insertions join the last segment.
pub fn project_boundaries(
    source_doc: &SegmentedDocument,
    target_tokens: &[Token],
    cfg: &AlignmentConfig,
) -> SegmentedDocument {
    let (source_tokens, boundaries) = flatten(source_doc);
    let mut positions = project_boundary_positions(&source_tokens, &boundaries, target_tokens, cfg);
    positions.pop();
    rebuild_from_positions(
        source_doc.doc_id(),
        target_tokens.to_vec(),
        positions.into_iter().flatten(),
    )
    .expect("projected positions index into the target sequence")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn toks(s: &str) -> Vec<Token> {
        tokenize(s).into_tokens()
    }

    fn doc(lines: &[&str]) -> SegmentedDocument {
        SegmentedDocument::new("d", lines.iter().map(|l| tokenize(l)).collect()).unwrap()
    }

    #[test]
    fn identity_is_all_matches() {
        let a = toks("the weather today");
        let al = levenshtein_align(&a, &a, &AlignmentConfig::exact());
        assert_eq!(al.distance(), 0);
        assert_eq!(al.count(EditKind::Match), 3);
    }

    #[test]
    fn weather_whether_is_one_substitution() {
        let a = toks("the weather today was warm");
        let b = toks("the whether today was warm");
        let al = levenshtein_align(&a, &b, &AlignmentConfig::exact());
        assert_eq!(al.distance(), 1);
        let subs: Vec<_> = al.ops().iter().filter(|o| o.kind() == EditKind::Substitute).collect();
        assert_eq!(subs, vec![&EditOp::Substitute { a: 1, b: 1 }]);
    }

    #[test]
    fn single_deletion() {
        let al = levenshtein_align(&toks("a b c"), &toks("a c"), &AlignmentConfig::exact());
        assert_eq!(al.distance(), 1);
        assert!(al.ops().contains(&EditOp::Delete { a: 1 }));
    }

    #[test]
    fn distance_examples() {
        let cfg = AlignmentConfig::exact();
        assert_eq!(edit_distance(&toks("x y z"), &[], &cfg), 3);
        assert_eq!(edit_distance(&[], &toks("x y"), &cfg), 2);
        assert_eq!(edit_distance(&toks("a b"), &toks("b a"), &cfg), 2);
        assert_eq!(edit_distance(&[], &[], &cfg), 0);
    }

    #[test]
    fn swapped_pair_prefers_substitutions() {
        let al = levenshtein_align(&toks("a b"), &toks("b a"), &AlignmentConfig::exact());
        assert_eq!(
            al.ops(),
            &[EditOp::Substitute { a: 0, b: 0 }, EditOp::Substitute { a: 1, b: 1 }]
        );
    }

    #[test]
    fn lenient_alignment_ignores_case_and_punctuation() {
        let a = toks("The weather, today.");
        let b = toks("the weather today");
        assert_eq!(edit_distance(&a, &b, &AlignmentConfig::lenient()), 0);
        assert_eq!(edit_distance(&a, &b, &AlignmentConfig::exact()), 3);
    }

    #[test]
    fn band_matches_full_table_when_wide_enough() {
        let a = toks("a b c d e f g h");
        let b = toks("a c d x e f h h i");
        let full = levenshtein_align(&a, &b, &AlignmentConfig::exact());
        let banded = levenshtein_align(
            &a,
            &b,
            &AlignmentConfig { band: Some(8), ..AlignmentConfig::exact() },
        );
        assert_eq!(full, banded);
        let narrow = levenshtein_align(
            &a,
            &b,
            &AlignmentConfig { band: Some(0), ..AlignmentConfig::exact() },
        );
        assert!(narrow.distance() >= full.distance());
    }

    #[test]
    fn wer_examples() {
        let r = toks("the weather today was warm");
        assert_eq!(wer(&r, &r).unwrap(), 0.0);
        assert_eq!(wer(&r, &toks("the whether today was warm")).unwrap(), 0.2);
        assert_eq!(wer(&toks("a b c d"), &[]).unwrap(), 1.0);
        assert_eq!(wer(&toks("The, Weather!"), &toks("the weather")).unwrap(), 0.0);
    }

    #[test]
    fn wer_rejects_empty_reference() {
        assert_eq!(wer(&[], &toks("a")), Err(AlignError::EmptyReference));
        assert_eq!(wer(&toks("... !"), &toks("a")), Err(AlignError::EmptyReference));
    }

    #[test]
    fn projects_system_boundaries_onto_gold() {
        let system = doc(&["the whether", "today was warm"]);
        let gold_tokens = toks("the weather today was warm");
        let out = project_boundaries(&system, &gold_tokens, &AlignmentConfig::default());
        assert_eq!(out.segments(), doc(&["the weather", "today was warm"]).segments());
    }

    #[test]
    fn projects_gold_boundaries_onto_system() {
        let gold = doc(&["the weather today was warm"]);
        let system_tokens = toks("the whether today was warm");
        let out = project_boundaries(&gold, &system_tokens, &AlignmentConfig::default());
        assert_eq!(out.segments(), doc(&["the whether today was warm"]).segments());
    }

    #[test]
    fn boundary_after_deleted_token_moves_back() {
        // "c" has no counterpart, so the boundary after it attaches to "b".
        let source = doc(&["a b c", "d e"]);
        let out = project_boundaries(&source, &toks("a b d e"), &AlignmentConfig::exact());
        assert_eq!(out.segments(), doc(&["a b", "d e"]).segments());
    }

    #[test]
    fn boundary_before_any_alignment_is_dropped() {
        let source = doc(&["x", "a b"]);
        let out = project_boundaries(&source, &toks("a b"), &AlignmentConfig::exact());
        assert_eq!(out.segments(), doc(&["a b"]).segments());
    }

    #[test]
    fn collapsing_boundaries_merge() {
        let source = doc(&["a", "b", "c"]);
        let out = project_boundaries(&source, &toks("a"), &AlignmentConfig::exact());
        assert_eq!(out.segments(), doc(&["a"]).segments());
    }

    #[test]
    fn trailing_insertions_join_last_segment() {
        let source = doc(&["a", "b"]);
        let out = project_boundaries(&source, &toks("a b c d"), &AlignmentConfig::exact());
        assert_eq!(out.segments(), doc(&["a", "b c d"]).segments());
    }

    #[test]
    fn projection_onto_empty_target() {
        let out = project_boundaries(&doc(&["a b"]), &[], &AlignmentConfig::default());
        assert!(out.is_empty());
    }

    #[test]
    fn projection_keeps_original_target_spelling() {
        let source = doc(&["the weather", "today"]);
        let target = toks("The Weather, today.");
        let out = project_boundaries(&source, &target, &AlignmentConfig::default());
        assert_eq!(out.segments(), doc(&["The Weather,", "today."]).segments());
    }
}
