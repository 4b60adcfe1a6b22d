//! Segmentation strategies: rule-based sentence breaking on punctuated
//! tokens, pause-based splitting of timed transcripts with a length cap,
//! and greedy fixed-length chunking.

use std::collections::BTreeSet;
use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{rebuild_from_positions, Segment, SegmentedDocument, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentError {
    #[error("word {index}: end time {end} precedes start time {start}")]
    EndBeforeStart { index: usize, start: f64, end: f64 },
    #[error("word {index}: start time {start} precedes the previous word's start {previous}")]
    DecreasingStart { index: usize, start: f64, previous: f64 },
    #[error("word {index}: time {value} is negative or not finite")]
    InvalidTime { index: usize, value: f64 },
    #[error("pause threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("max tokens must be at least 1")]
    ZeroMaxTokens,
}

const TERMINAL_MARKS: [char; 3] = ['.', '!', '?'];

/// Closing characters skipped when looking for a terminal mark, so that
/// `end."` or `(done.)` still end a sentence.
const CLOSERS: [char; 12] = ['"', '\'', ')', ']', '}', '»', '”', '’', '›', '」', '』', '）'];

pub const DEFAULT_ABBREVIATIONS: [&str; 6] = ["Mr.", "Mrs.", "Dr.", "St.", "No.", "U.S."];

/// Breaks after tokens ending in `.`, `!` or `?` unless the token is a
/// listed abbreviation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceBreaker {
    abbreviations: BTreeSet<String>,
}

impl SentenceBreaker {
    pub fn new<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SentenceBreaker {
            abbreviations: abbreviations.into_iter().map(Into::into).collect(),
        }
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> + '_ {
        self.abbreviations.iter().map(String::as_str)
    }

    pub fn is_sentence_end(&self, token: &Token) -> bool {
        let text = token.as_str();
        if self.abbreviations.contains(text) {
            return false;
        }
        text.chars()
            .rev()
            .find(|c| !CLOSERS.contains(c))
            .is_some_and(|c| TERMINAL_MARKS.contains(&c))
    }

    pub fn split(&self, doc_id: impl Into<String>, tokens: &[Token]) -> SegmentedDocument {
        let positions = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| self.is_sentence_end(t))
            .map(|(i, _)| i);
        rebuild_from_positions(doc_id, tokens.to_vec(), positions).expect("positions are token indices")
    }
}

impl Default for SentenceBreaker {
    fn default() -> Self {
        SentenceBreaker::new(DEFAULT_ABBREVIATIONS)
    }
}

/// Sentence-breaks punctuated tokens with the default abbreviation list.
pub fn break_on_punctuation(tokens: &[Token]) -> SegmentedDocument {
    SentenceBreaker::default().split("", tokens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedWord {
    pub token: Token,
    pub start: f64,
    pub end: f64,
}

/// Recognized words with start and end times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedTranscript {
    doc_id: String,
    words: Vec<TimedWord>,
}

impl TimedTranscript {
    pub fn new(doc_id: impl Into<String>, words: Vec<TimedWord>) -> Result<Self, SegmentError> {
        let mut previous_start = 0.0;
        for (index, w) in words.iter().enumerate() {
            for value in [w.start, w.end] {
                if !value.is_finite() || value < 0.0 {
                    return Err(SegmentError::InvalidTime { index, value });
                }
            }
            if w.end < w.start {
                return Err(SegmentError::EndBeforeStart {
                    index,
                    start: w.start,
                    end: w.end,
                });
            }
            if w.start < previous_start {
                return Err(SegmentError::DecreasingStart {
                    index,
                    start: w.start,
                    previous: previous_start,
                });
            }
            previous_start = w.start;
        }
        Ok(TimedTranscript {
            doc_id: doc_id.into(),
            words,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn words(&self) -> &[TimedWord] {
        &self.words
    }

    pub fn tokens(&self) -> Vec<Token> {
        self.words.iter().map(|w| w.token.clone()).collect()
    }

    /// Silence between word `i` and word `i + 1`, clamped at zero.
    pub fn gap_after(&self, i: usize) -> Option<f64> {
        let next = self.words.get(i + 1)?;
        Some((next.start - self.words[i].end).max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauseSplitConfig {
    pause_threshold_sec: f64,
    max_tokens: NonZeroUsize,
}

impl PauseSplitConfig {
    pub const DEFAULT_THRESHOLD_SEC: f64 = 1.0;

    pub fn new(pause_threshold_sec: f64, max_tokens: usize) -> Result<Self, SegmentError> {
        if !(pause_threshold_sec.is_finite() && pause_threshold_sec > 0.0) {
            return Err(SegmentError::InvalidThreshold(pause_threshold_sec));
        }
        let max_tokens = NonZeroUsize::new(max_tokens).ok_or(SegmentError::ZeroMaxTokens)?;
        Ok(PauseSplitConfig {
            pause_threshold_sec,
            max_tokens,
        })
    }

    pub fn pause_threshold_sec(&self) -> f64 {
        self.pause_threshold_sec
    }

    pub fn max_tokens(&self) -> NonZeroUsize {
        self.max_tokens
    }
}

/// Splits wherever the silence between two words reaches the threshold,
/// then chops any segment longer than `max_tokens` into consecutive chunks.
pub fn split_on_pauses(transcript: &TimedTranscript, cfg: &PauseSplitConfig) -> SegmentedDocument {
    let n = transcript.words().len();
    let max = cfg.max_tokens().get();
    let mut positions = Vec::new();
    let mut run = 0usize;
    for i in 0..n {
        run += 1;
        let pause = transcript
            .gap_after(i)
            .is_some_and(|gap| gap >= cfg.pause_threshold_sec());
        if pause || run == max {
            positions.push(i);
            run = 0;
        }
    }
    rebuild_from_positions(transcript.doc_id(), transcript.tokens(), positions)
        .expect("positions are word indices")
}

/// Left-to-right chunks of exactly `n` tokens; the last chunk holds the remainder.
pub fn split_fixed_length(tokens: &[Token], n: NonZeroUsize) -> SegmentedDocument {
    let segments = tokens.chunks(n.get()).map(|c| Segment::new(c.to_vec())).collect();
    SegmentedDocument::new("", segments).expect("chunks are never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn toks(s: &str) -> Vec<Token> {
        tokenize(s).into_tokens()
    }

    fn lines(doc: &SegmentedDocument) -> Vec<String> {
        doc.segments().iter().map(ToString::to_string).collect()
    }

    fn nz(n: usize) -> NonZeroUsize {
        NonZeroUsize::new(n).unwrap()
    }

    fn timed(words: &[(&str, f64, f64)]) -> TimedTranscript {
        TimedTranscript::new(
            "t",
            words
                .iter()
                .map(|&(w, start, end)| TimedWord { token: Token::new(w).unwrap(), start, end })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn punctuation_breaks() {
        assert_eq!(
            lines(&break_on_punctuation(&toks("It rained. We left."))),
            ["It rained.", "We left."]
        );
        assert_eq!(
            lines(&break_on_punctuation(&toks("no terminal marks"))),
            ["no terminal marks"]
        );
        assert_eq!(lines(&break_on_punctuation(&toks("Dr. Smith left."))), ["Dr. Smith left."]);
    }

    #[test]
    fn closing_quotes_do_not_hide_terminal_mark() {
        assert_eq!(
            lines(&break_on_punctuation(&toks("he said \"stop.\" then (quietly!) left"))),
            ["he said \"stop.\"", "then (quietly!)", "left"]
        );
    }

    #[test]
    fn question_and_exclamation_break() {
        assert_eq!(
            lines(&break_on_punctuation(&toks("Why? Because! Yes"))),
            ["Why?", "Because!", "Yes"]
        );
    }

    #[test]
    fn custom_abbreviations() {
        let breaker = SentenceBreaker::new(["etc."]);
        assert_eq!(lines(&breaker.split("", &toks("apples etc. and Dr. Who"))), [
            "apples etc. and Dr.",
            "Who"
        ]);
    }

    #[test]
    fn pause_threshold_splits() {
        let t = timed(&[("w1", 0.0, 0.5), ("w2", 1.7, 2.0), ("w3", 2.1, 2.4)]);
        let cfg = PauseSplitConfig::new(1.0, 50).unwrap();
        assert_eq!(lines(&split_on_pauses(&t, &cfg)), ["w1", "w2 w3"]);
    }

    #[test]
    fn pause_exactly_at_threshold_splits() {
        let t = timed(&[("a", 0.0, 0.5), ("b", 1.5, 2.0)]);
        let cfg = PauseSplitConfig::new(1.0, 50).unwrap();
        assert_eq!(lines(&split_on_pauses(&t, &cfg)), ["a", "b"]);
    }

    #[test]
    fn long_runs_are_chopped() {
        let words: Vec<_> = (0..120).map(|i| (format!("w{i}"), i as f64 * 0.3, i as f64 * 0.3 + 0.2)).collect();
        let t = TimedTranscript::new(
            "t",
            words
                .iter()
                .map(|(w, s, e)| TimedWord { token: Token::new(w.clone()).unwrap(), start: *s, end: *e })
                .collect(),
        )
        .unwrap();
        let cfg = PauseSplitConfig::new(1.0, 50).unwrap();
        assert_eq!(split_on_pauses(&t, &cfg).segment_lengths(), [50, 50, 20]);
    }

    #[test]
    fn all_long_pauses_give_single_words() {
        let t = timed(&[("a", 0.0, 0.1), ("b", 2.0, 2.1), ("c", 4.0, 4.1)]);
        let cfg = PauseSplitConfig::new(1.0, 50).unwrap();
        assert_eq!(split_on_pauses(&t, &cfg).segment_lengths(), [1, 1, 1]);
    }

    #[test]
    fn overlapping_words_clamp_gap() {
        let t = timed(&[("a", 0.0, 2.0), ("b", 1.0, 3.0)]);
        assert_eq!(t.gap_after(0), Some(0.0));
        assert_eq!(t.gap_after(1), None);
    }

    #[test]
    fn transcript_validation() {
        let w = |start, end| TimedWord { token: Token::new("x").unwrap(), start, end };
        assert!(matches!(
            TimedTranscript::new("t", vec![w(1.0, 0.5)]),
            Err(SegmentError::EndBeforeStart { index: 0, .. })
        ));
        assert!(matches!(
            TimedTranscript::new("t", vec![w(1.0, 1.5), w(0.5, 2.0)]),
            Err(SegmentError::DecreasingStart { index: 1, .. })
        ));
        assert!(matches!(
            TimedTranscript::new("t", vec![w(-1.0, 1.5)]),
            Err(SegmentError::InvalidTime { .. })
        ));
        assert!(matches!(
            TimedTranscript::new("t", vec![w(f64::NAN, 1.5)]),
            Err(SegmentError::InvalidTime { .. })
        ));
    }

    #[test]
    fn pause_config_validation() {
        assert!(PauseSplitConfig::new(0.0, 5).is_err());
        assert!(PauseSplitConfig::new(f64::INFINITY, 5).is_err());
        assert_eq!(PauseSplitConfig::new(1.0, 0), Err(SegmentError::ZeroMaxTokens));
    }

    #[test]
    fn fixed_length_examples() {
        let t: Vec<Token> = (0..25).map(|i| Token::new(format!("t{i}")).unwrap()).collect();
        assert_eq!(split_fixed_length(&t, nz(10)).segment_lengths(), [10, 10, 5]);
        assert_eq!(split_fixed_length(&t[..10], nz(10)).segment_lengths(), [10]);
        assert!(split_fixed_length(&[], nz(3)).is_empty());
    }
}
