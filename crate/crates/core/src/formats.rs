//! Text file formats.
//!
//! Documents: UTF-8, one segment per line with whitespace-separated tokens,
//! a blank line between documents. Runs of blank lines count as one
//! separator. Documents are numbered `doc-1`, `doc-2`, ... in file order.
//!
//! Bitext: one `source<TAB>target` pair per line, blank line between
//! documents. Both sides must contain at least one token.
//!
//! Timed transcripts: one JSON object per line,
//! `{"doc_id": "...", "words": [{"text": "...", "start": 0.0, "end": 0.42}, ...]}`
//! with times in seconds. Other fields are ignored.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::BitextPair;
use crate::segment::{SegmentError, TimedTranscript, TimedWord};
use crate::text::{tokenize, Segment, SegmentedDocument, TextError, Token};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct FormatError {
    /// 1-based.
    pub line: usize,
    pub kind: FormatErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatErrorKind {
    #[error("invalid UTF-8")]
    InvalidUtf8,
    #[error("expected exactly one tab between source and target, found {0}")]
    TabCount(usize),
    #[error("{0} side is empty")]
    EmptySide(&'static str),
    #[error("malformed record: {0}")]
    Json(String),
    #[error("{0}")]
    Token(#[from] TextError),
    #[error("{0}")]
    Transcript(#[from] SegmentError),
}

impl FormatError {
    fn at(line: usize, kind: impl Into<FormatErrorKind>) -> Self {
        FormatError {
            line,
            kind: kind.into(),
        }
    }
}

/// Decodes UTF-8, reporting the line of the first invalid byte.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str, FormatError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        FormatError::at(line, FormatErrorKind::InvalidUtf8)
    })
}

fn doc_id(index: usize) -> String {
    format!("doc-{}", index + 1)
}

/// Groups lines into blocks separated by blank lines, keeping 1-based line numbers.
fn blocks(text: &str) -> Vec<Vec<(usize, &str)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            current.push((i + 1, line));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

pub fn parse_documents(text: &str) -> Vec<SegmentedDocument> {
    blocks(text)
        .into_iter()
        .enumerate()
        .map(|(i, lines)| {
            let segments = lines.into_iter().map(|(_, l)| tokenize(l)).collect();
            SegmentedDocument::new(doc_id(i), segments).expect("blank lines were skipped")
        })
        .collect()
}

pub fn parse_documents_bytes(bytes: &[u8]) -> Result<Vec<SegmentedDocument>, FormatError> {
    decode_utf8(bytes).map(parse_documents)
}

pub fn write_documents(docs: &[SegmentedDocument]) -> String {
    let mut out = String::new();
    for (i, doc) in docs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for segment in doc.segments() {
            out.push_str(&segment.to_string());
            out.push('\n');
        }
    }
    out
}

/// Parses bitext, tagging every pair with `origin`.
pub fn parse_bitext(text: &str, origin: &str) -> Result<Vec<Vec<BitextPair>>, FormatError> {
    blocks(text)
        .into_iter()
        .map(|lines| {
            lines
                .into_iter()
                .map(|(n, line)| parse_bitext_line(n, line, origin))
                .collect()
        })
        .collect()
}

pub fn parse_bitext_bytes(bytes: &[u8], origin: &str) -> Result<Vec<Vec<BitextPair>>, FormatError> {
    parse_bitext(decode_utf8(bytes)?, origin)
}

fn parse_bitext_line(n: usize, line: &str, origin: &str) -> Result<BitextPair, FormatError> {
    let tabs = line.matches('\t').count();
    let Some((src, tgt)) = line.split_once('\t').filter(|_| tabs == 1) else {
        return Err(FormatError::at(n, FormatErrorKind::TabCount(tabs)));
    };
    let source = tokenize(src);
    let target = tokenize(tgt);
    if source.is_empty() {
        return Err(FormatError::at(n, FormatErrorKind::EmptySide("source")));
    }
    if target.is_empty() {
        return Err(FormatError::at(n, FormatErrorKind::EmptySide("target")));
    }
    Ok(BitextPair::new(source, target, origin).expect("sides checked"))
}

pub fn write_bitext(docs: &[Vec<BitextPair>]) -> String {
    let mut out = String::new();
    for (i, doc) in docs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for pair in doc {
            out.push_str(&format!("{}\t{}\n", pair.source(), pair.target()));
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct WordRecord {
    text: String,
    start: f64,
    end: f64,
}

#[derive(Serialize, Deserialize)]
struct TranscriptRecord {
    doc_id: String,
    words: Vec<WordRecord>,
}

pub fn parse_timed_transcripts(text: &str) -> Result<Vec<TimedTranscript>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| parse_timed_line(i + 1, line))
        .collect()
}

pub fn parse_timed_transcripts_bytes(bytes: &[u8]) -> Result<Vec<TimedTranscript>, FormatError> {
    parse_timed_transcripts(decode_utf8(bytes)?)
}

fn parse_timed_line(n: usize, line: &str) -> Result<TimedTranscript, FormatError> {
    let record: TranscriptRecord =
        serde_json::from_str(line).map_err(|e| FormatError::at(n, FormatErrorKind::Json(e.to_string())))?;
    let words = record
        .words
        .into_iter()
        .map(|w| {
            Ok(TimedWord {
                token: Token::new(w.text).map_err(|e| FormatError::at(n, e))?,
                start: w.start,
                end: w.end,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    TimedTranscript::new(record.doc_id, words).map_err(|e| FormatError::at(n, e))
}

pub fn write_timed_transcripts(transcripts: &[TimedTranscript]) -> String {
    let mut out = String::new();
    for t in transcripts {
        let record = TranscriptRecord {
            doc_id: t.doc_id().to_owned(),
            words: t
                .words()
                .iter()
                .map(|w| WordRecord {
                    text: w.token.as_str().to_owned(),
                    start: w.start,
                    end: w.end,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

/// Joins a document's segments into one line, for logs and diagnostics.
pub struct OneLine<'a>(pub &'a SegmentedDocument);

impl fmt::Display for OneLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, segment) in self.0.segments().iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{segment}")?;
        }
        Ok(())
    }
}

/// A document with one segment per entry of `lines`; blank entries are skipped.
pub fn document_from_lines(doc_id: &str, lines: &[&str]) -> SegmentedDocument {
    SegmentedDocument::from_segments_lossy(doc_id, lines.iter().map(|l| tokenize(l)).collect::<Vec<Segment>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_split_on_blank_lines() {
        let docs = parse_documents("a b\nc\n\n\n  \nd e f\n");
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].segment_lengths(), [2, 1]);
        assert_eq!(docs[0].doc_id(), "doc-1");
        assert_eq!(docs[1].segment_lengths(), [3]);
        assert_eq!(docs[1].doc_id(), "doc-2");
    }

    #[test]
    fn documents_normalize_whitespace_on_write() {
        let docs = parse_documents("  a\t b \r\nc\n\nd\n");
        assert_eq!(write_documents(&docs), "a b\nc\n\nd\n");
        assert!(parse_documents("").is_empty());
        assert_eq!(write_documents(&[]), "");
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let err = parse_documents_bytes(b"ok\nfine\nbad \xff here\n").unwrap_err();
        assert_eq!(err, FormatError { line: 3, kind: FormatErrorKind::InvalidUtf8 });
    }

    #[test]
    fn bitext_round_trip() {
        let text = "a b\tx y\nc\tz\n\nd\tw\n";
        let docs = parse_bitext(text, "WMT").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0][1].origin(), "WMT");
        assert_eq!(write_bitext(&docs), text);
    }

    #[test]
    fn bitext_errors_name_the_line() {
        assert_eq!(
            parse_bitext("a\tb\nno tab here\n", "c").unwrap_err(),
            FormatError { line: 2, kind: FormatErrorKind::TabCount(0) }
        );
        assert_eq!(
            parse_bitext("a\tb\tc\n", "c").unwrap_err(),
            FormatError { line: 1, kind: FormatErrorKind::TabCount(2) }
        );
        assert_eq!(
            parse_bitext("a\tb\n  \t x\n", "c").unwrap_err(),
            FormatError { line: 2, kind: FormatErrorKind::EmptySide("source") }
        );
        assert_eq!(
            parse_bitext("x\t \n", "c").unwrap_err(),
            FormatError { line: 1, kind: FormatErrorKind::EmptySide("target") }
        );
    }

    #[test]
    fn timed_transcripts_parse_and_write() {
        let text = r#"{"doc_id": "talk1", "words": [{"text": "hello", "start": 0.0, "end": 0.5, "confidence": 0.9}, {"text": "there", "start": 1.75, "end": 2.0}]}

{"doc_id": "talk2", "words": []}
"#;
        let ts = parse_timed_transcripts(text).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].doc_id(), "talk1");
        assert_eq!(ts[0].gap_after(0), Some(1.25));
        assert!(ts[1].words().is_empty());
        let again = parse_timed_transcripts(&write_timed_transcripts(&ts)).unwrap();
        assert_eq!(again, ts);
    }

    #[test]
    fn timed_transcript_errors_name_the_line() {
        let err = parse_timed_transcripts("\n{\"doc_id\": 1}\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, FormatErrorKind::Json(_)));

        let bad_token = r#"{"doc_id": "x", "words": [{"text": "two words", "start": 0, "end": 1}]}"#;
        let err = parse_timed_transcripts(bad_token).unwrap_err();
        assert!(matches!(err.kind, FormatErrorKind::Token(TextError::WhitespaceInToken(_))));

        let backwards = r#"{"doc_id": "x", "words": [{"text": "a", "start": 2, "end": 1}]}"#;
        let err = parse_timed_transcripts(backwards).unwrap_err();
        assert!(matches!(err.kind, FormatErrorKind::Transcript(SegmentError::EndBeforeStart { .. })));
    }

    #[test]
    fn one_line_display() {
        let d = document_from_lines("d", &["the whether", "today was warm"]);
        assert_eq!(OneLine(&d).to_string(), "the whether | today was warm");
    }
}
