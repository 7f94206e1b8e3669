#![no_main]

use framemark::io::SimFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = SimFile::parse(text) {
        let _ = file.channel_models();
    }
});
