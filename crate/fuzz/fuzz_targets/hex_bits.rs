#![no_main]

use framemark::bits::BitString;
use libfuzzer_sys::fuzz_target;

// First byte picks the bit length; the rest is the hex text.
fuzz_target!(|data: &[u8]| {
    let Some((&len, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let len = len as usize % 97;
    if let Ok(bits) = BitString::from_hex(text, len) {
        assert_eq!(bits.len(), len);
        assert_eq!(BitString::from_hex(&bits.to_hex(), len).unwrap(), bits);
    }
});
