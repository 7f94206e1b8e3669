#![no_main]

use framemark::codec::generate_templates;
use framemark::io::parse_tamper_spec;
use framemark::tamper::{apply_combined, FrameSequence};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = parse_tamper_spec(text) else { return };
    if spec.insert_count > 64 {
        return;
    }
    let templates = generate_templates(4, 16, 0, 4).unwrap();
    let seq = FrameSequence::from_templates(&templates, 16).unwrap();
    if let Ok(out) = apply_combined(&seq, &spec) {
        assert_eq!(out.keys.len(), out.truth.len());
        assert_eq!(out.keys.len(), out.origins.len());
    }
});
