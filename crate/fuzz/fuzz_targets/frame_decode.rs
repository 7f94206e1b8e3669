#![no_main]

use framemark::watermark::{Frame, MIN_DIMENSION};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(frame) = Frame::decode(data) {
        assert!(frame.width() >= MIN_DIMENSION && frame.height() >= MIN_DIMENSION);
    }
});
