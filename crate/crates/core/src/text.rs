//! Tokens, segments and segmented documents, plus the source-side
//! normalization policies used to prepare stripped and punctuated data.
//!
//! A [`SegmentedDocument`] is the unit every stage of the toolkit consumes:
//! an ordered token stream partitioned into non-empty segments. Moving
//! between that view and a flat token list with a [`BoundarySet`] is done
//! with [`flatten`] and [`rebuild`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("token is empty")]
    EmptyToken,
    #[error("token {0:?} contains whitespace")]
    WhitespaceInToken(String),
    #[error("segment {index} of document {doc_id:?} is empty")]
    EmptySegment { doc_id: String, index: usize },
    #[error("boundary {position} out of range for {total} tokens")]
    BoundaryOutOfRange { position: usize, total: usize },
    #[error("boundary positions are not strictly increasing")]
    UnorderedBoundaries,
}

/// A single whitespace-free, non-empty unit of text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self, TextError> {
        let text = text.into();
        if text.is_empty() {
            return Err(TextError::EmptyToken);
        }
        if text.chars().any(char::is_whitespace) {
            return Err(TextError::WhitespaceInToken(text));
        }
        Ok(Token(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = TextError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered run of tokens, usually one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Segment {
    tokens: Vec<Token>,
}

impl Segment {
    pub fn new(tokens: Vec<Token>) -> Self {
        Segment { tokens }
    }

    /// Builds a segment from string slices, rejecting any that are not valid tokens.
    pub fn from_words<I, S>(words: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        words
            .into_iter()
            .map(Token::new)
            .collect::<Result<Vec<_>, _>>()
            .map(Segment::new)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(Token::as_str)
    }
}

impl fmt::Display for Segment {
    /// Tokens joined by single spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(token.as_str())?;
        }
        Ok(())
    }
}

impl From<Vec<Token>> for Segment {
    fn from(tokens: Vec<Token>) -> Self {
        Segment::new(tokens)
    }
}

impl FromIterator<Token> for Segment {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        Segment::new(iter.into_iter().collect())
    }
}

/// A labelled document made of non-empty segments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedDocument {
    doc_id: String,
    segments: Vec<Segment>,
}

impl SegmentedDocument {
    pub fn new(doc_id: impl Into<String>, segments: Vec<Segment>) -> Result<Self, TextError> {
        let doc_id = doc_id.into();
        if let Some(index) = segments.iter().position(Segment::is_empty) {
            return Err(TextError::EmptySegment { doc_id, index });
        }
        Ok(SegmentedDocument { doc_id, segments })
    }

    /// Builds a document, silently dropping empty segments.
    pub fn from_segments_lossy(doc_id: impl Into<String>, segments: Vec<Segment>) -> Self {
        SegmentedDocument {
            doc_id: doc_id.into(),
            segments: segments.into_iter().filter(|s| !s.is_empty()).collect(),
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn with_doc_id(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = doc_id.into();
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.segments.iter().map(Segment::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> + '_ {
        self.segments.iter().flat_map(|s| s.tokens().iter())
    }

    pub fn segment_lengths(&self) -> Vec<usize> {
        self.segments.iter().map(Segment::len).collect()
    }
}

/// Sentence-boundary positions over a flat token sequence.
///
/// Position `k` means "a boundary after token `k`" (0-based).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySet {
    positions: Vec<usize>,
    total_tokens: usize,
}

impl BoundarySet {
    /// Validates an already strictly increasing, in-range list of positions.
    pub fn new(positions: Vec<usize>, total_tokens: usize) -> Result<Self, TextError> {
        if let Some(&position) = positions.iter().find(|&&p| p >= total_tokens) {
            return Err(TextError::BoundaryOutOfRange {
                position,
                total: total_tokens,
            });
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TextError::UnorderedBoundaries);
        }
        Ok(BoundarySet {
            positions,
            total_tokens,
        })
    }

    /// Sorts and deduplicates arbitrary positions. Out-of-range positions
    /// are still an error.
    pub fn collapse(
        positions: impl IntoIterator<Item = usize>,
        total_tokens: usize,
    ) -> Result<Self, TextError> {
        let mut positions: Vec<usize> = positions.into_iter().collect();
        positions.sort_unstable();
        positions.dedup();
        BoundarySet::new(positions, total_tokens)
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, position: usize) -> bool {
        self.positions.binary_search(&position).is_ok()
    }
}

/// Character-class stripping and case folding applied to source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationPolicy {
    pub strip_punctuation: bool,
    pub lowercase: bool,
    pub strip_symbols: bool,
}

impl NormalizationPolicy {
    /// Punctuation, case and symbols all removed.
    pub const STRIPPED: NormalizationPolicy = NormalizationPolicy {
        strip_punctuation: true,
        lowercase: true,
        strip_symbols: true,
    };

    /// Source text left untouched.
    pub const PUNCTUATED: NormalizationPolicy = NormalizationPolicy {
        strip_punctuation: false,
        lowercase: false,
        strip_symbols: false,
    };

    pub fn is_identity(&self) -> bool {
        *self == Self::PUNCTUATED
    }

    /// Normalizes one token's text. The result may be empty.
    pub fn apply(&self, text: &str) -> String {
        let folded;
        let text = if self.lowercase {
            folded = text.to_lowercase();
            folded.as_str()
        } else {
            text
        };
        if !self.strip_punctuation && !self.strip_symbols {
            return text.to_owned();
        }
        text.chars().filter(|&c| !self.strips(c)).collect()
    }

    fn strips(&self, c: char) -> bool {
        (self.strip_punctuation && is_punctuation(c)) || (self.strip_symbols && is_symbol(c))
    }
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        Self::PUNCTUATED
    }
}

/// Unicode general category P*.
pub fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

/// Unicode general category S*.
pub fn is_symbol(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        MathSymbol | CurrencySymbol | ModifierSymbol | OtherSymbol
    )
}

/// Splits on runs of whitespace.
pub fn tokenize(text: &str) -> Segment {
    text.split_whitespace()
        .map(|w| Token(w.to_owned()))
        .collect()
}

/// Applies `policy` token by token, dropping tokens left empty.
pub fn normalize(segment: &Segment, policy: &NormalizationPolicy) -> Segment {
    if policy.is_identity() {
        return segment.clone();
    }
    segment
        .tokens()
        .iter()
        .filter_map(|t| {
            let text = policy.apply(t.as_str());
            // Case mapping never introduces whitespace, so only emptiness matters.
            (!text.is_empty()).then_some(Token(text))
        })
        .collect()
}

/// Normalizes every segment of a document, dropping segments that end up empty.
pub fn normalize_document(doc: &SegmentedDocument, policy: &NormalizationPolicy) -> SegmentedDocument {
    SegmentedDocument::from_segments_lossy(
        doc.doc_id(),
        doc.segments().iter().map(|s| normalize(s, policy)).collect(),
    )
}

/// Concatenates a document's tokens, recording a boundary after the last
/// token of every segment.
pub fn flatten(doc: &SegmentedDocument) -> (Vec<Token>, BoundarySet) {
    let mut tokens = Vec::with_capacity(doc.token_count());
    let mut positions = Vec::with_capacity(doc.segments().len());
    for segment in doc.segments() {
        tokens.extend(segment.tokens().iter().cloned());
        positions.push(tokens.len() - 1);
    }
    let total_tokens = tokens.len();
    (
        tokens,
        BoundarySet {
            positions,
            total_tokens,
        },
    )
}

/// Inverse of [`flatten`]. A boundary after the final token is implied.
pub fn rebuild(
    doc_id: impl Into<String>,
    tokens: Vec<Token>,
    boundaries: &BoundarySet,
) -> Result<SegmentedDocument, TextError> {
    if boundaries.total_tokens() != tokens.len() {
        if let Some(&position) = boundaries.positions().iter().find(|&&p| p >= tokens.len()) {
            return Err(TextError::BoundaryOutOfRange {
                position,
                total: tokens.len(),
            });
        }
    }
    Ok(rebuild_unchecked(doc_id.into(), tokens, boundaries.positions()))
}

/// Like [`rebuild`] but accepts raw, possibly duplicated or unordered positions.
pub fn rebuild_from_positions(
    doc_id: impl Into<String>,
    tokens: Vec<Token>,
    positions: impl IntoIterator<Item = usize>,
) -> Result<SegmentedDocument, TextError> {
    let set = BoundarySet::collapse(positions, tokens.len())?;
    Ok(rebuild_unchecked(doc_id.into(), tokens, set.positions()))
}

fn rebuild_unchecked(doc_id: String, tokens: Vec<Token>, positions: &[usize]) -> SegmentedDocument {
    let mut segments = Vec::with_capacity(positions.len() + 1);
    let mut current = Vec::new();
    let mut next = positions.iter().peekable();
    for (i, token) in tokens.into_iter().enumerate() {
        current.push(token);
        if next.next_if(|&&p| p == i).is_some() {
            segments.push(Segment::new(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        segments.push(Segment::new(current));
    }
    SegmentedDocument { doc_id, segments }
}
