#![allow(dead_code)]

use proptest::prelude::*;
use resegment::text::{Segment, SegmentedDocument, Token};

pub fn tok(s: &str) -> Token {
    Token::new(s).unwrap()
}

/// Exponential recursive edit distance, independent of the DP.
pub fn brute_distance(a: &[&str], b: &[&str]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let diag = brute_distance(ra, rb) + usize::from(x != y);
            let del = brute_distance(ra, b) + 1;
            let ins = brute_distance(a, rb) + 1;
            diag.min(del).min(ins)
        }
    }
}

pub fn word() -> impl Strategy<Value = Token> {
    prop::sample::select(vec!["a", "b", "c", "d", "The", "weather,", "x."]).prop_map(tok)
}

pub fn tokens(max: usize) -> impl Strategy<Value = Vec<Token>> {
    prop::collection::vec(word(), 0..=max)
}

pub fn document(max_segments: usize, max_len: usize) -> impl Strategy<Value = SegmentedDocument> {
    prop::collection::vec(prop::collection::vec(word(), 1..=max_len), 0..=max_segments).prop_map(|segs| {
        SegmentedDocument::new("p", segs.into_iter().map(Segment::new).collect()).unwrap()
    })
}
