#![no_main]

use ledakem::format::{decode_ciphertext, encode_ciphertext};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok((ps, ct)) = decode_ciphertext(data) else { return };
    let again = encode_ciphertext(&ps, &ct).unwrap();
    assert_eq!(again.len(), data.len());
    let (_, ct2) = decode_ciphertext(&again).unwrap();
    assert_eq!(ct, ct2);
});
