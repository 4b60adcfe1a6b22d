#![no_main]

use libfuzzer_sys::fuzz_target;
use resegment::text::{normalize, tokenize, NormalizationPolicy};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let segment = tokenize(text);
    assert_eq!(tokenize(&segment.to_string()), segment);
    for policy in [NormalizationPolicy::STRIPPED, NormalizationPolicy::PUNCTUATED] {
        let once = normalize(&segment, &policy);
        assert_eq!(normalize(&once, &policy), once);
    }
});
