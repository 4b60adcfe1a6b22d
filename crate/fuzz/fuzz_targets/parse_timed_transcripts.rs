#![no_main]

use libfuzzer_sys::fuzz_target;
use resegment::formats::{parse_timed_transcripts, parse_timed_transcripts_bytes, write_timed_transcripts};
use resegment::segment::{split_on_pauses, PauseSplitConfig};
use resegment::text::flatten;

fuzz_target!(|data: &[u8]| {
    let Ok(transcripts) = parse_timed_transcripts_bytes(data) else {
        return;
    };
    let text = write_timed_transcripts(&transcripts);
    let reparsed = parse_timed_transcripts(&text).expect("written transcripts parse");
    assert_eq!(reparsed.len(), transcripts.len());
    for (a, b) in reparsed.iter().zip(&transcripts) {
        assert_eq!((a.doc_id(), a.tokens()), (b.doc_id(), b.tokens()));
    }
    let cfg = PauseSplitConfig::new(1.0, 8).unwrap();
    for t in &transcripts {
        let doc = split_on_pauses(t, &cfg);
        assert_eq!(flatten(&doc).0, t.tokens());
    }
});
