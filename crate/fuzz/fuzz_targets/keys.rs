#![no_main]

use framemark::io::{format_keys, parse_keys};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(keys) = parse_keys(text, 48) {
        assert_eq!(parse_keys(&format_keys(&keys), 48).unwrap(), keys);
    }
});
