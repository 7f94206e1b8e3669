#![no_main]

use framemark::io::{format_payload_words, parse_payload_words};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(words) = parse_payload_words(text) {
        assert_eq!(parse_payload_words(&format_payload_words(&words)).unwrap(), words);
    }
});
