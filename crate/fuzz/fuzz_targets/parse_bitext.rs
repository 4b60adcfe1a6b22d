#![no_main]

use libfuzzer_sys::fuzz_target;
use resegment::augment::{augment_corpus, AugmentationConfig};
use resegment::formats::{parse_bitext, parse_bitext_bytes, write_bitext};

fuzz_target!(|data: &[u8]| {
    let Ok(docs) = parse_bitext_bytes(data, "fuzz") else {
        return;
    };
    let text = write_bitext(&docs);
    assert_eq!(parse_bitext(&text, "fuzz").expect("written bitext parses"), docs);
    let cfg = AugmentationConfig::new(0.3, data.len() as u64).unwrap();
    for doc in &docs {
        let out = augment_corpus(doc, &cfg);
        assert_eq!(out.pairs.len() + out.skipped, doc.len().div_ceil(2));
    }
});
