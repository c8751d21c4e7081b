#![no_main]

use ledakem::format::{decode_public_key, encode_public_key};
use libfuzzer_sys::fuzz_target;

// Padding bits are checked, so anything accepted re-encodes to itself.
fuzz_target!(|data: &[u8]| {
    if let Ok(pk) = decode_public_key(data) {
        assert_eq!(encode_public_key(&pk).unwrap(), data);
    }
});
