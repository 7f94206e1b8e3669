#![no_main]

use framemark::io::parse_truth;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(truth) = parse_truth(text, 16) {
        assert!(truth.entries().iter().all(|l| l.template().map_or(true, |t| t < 16)));
    }
});
