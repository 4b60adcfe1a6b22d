#![no_main]

use libfuzzer_sys::fuzz_target;
use resegment::formats::{parse_documents, parse_documents_bytes, write_documents};
use resegment::text::flatten;

fuzz_target!(|data: &[u8]| {
    let Ok(docs) = parse_documents_bytes(data) else {
        return;
    };
    for doc in &docs {
        assert!(doc.segments().iter().all(|s| !s.is_empty()));
        let (tokens, bounds) = flatten(doc);
        assert_eq!(bounds.positions().last().map(|p| p + 1), (!tokens.is_empty()).then_some(tokens.len()));
    }
    // Writing normalizes whitespace, after which the format is a fixed point.
    let text = write_documents(&docs);
    assert_eq!(parse_documents(&text).len(), docs.len());
    assert_eq!(write_documents(&parse_documents(&text)), text);
});
