#![no_main]

use std::sync::OnceLock;

use framemark::bits::BitString;
use framemark::codec::LdpcCode;
use libfuzzer_sys::fuzz_target;

static CODE: OnceLock<LdpcCode> = OnceLock::new();

// Six bytes become one received 48-bit word.
fuzz_target!(|data: &[u8]| {
    if data.len() < 6 {
        return;
    }
    let code = CODE.get_or_init(|| LdpcCode::build(7, 16, 48).unwrap());
    let bits: Vec<bool> = (0..48).map(|i| data[i / 8] >> (7 - i % 8) & 1 == 1).collect();
    let out = code.decode(&BitString::new(bits).unwrap()).unwrap();
    assert_eq!(out.word.bits().len(), 16);
    if out.converged {
        assert!(code.is_codeword(code.encode(&out.word).unwrap().bits()));
    }
});
