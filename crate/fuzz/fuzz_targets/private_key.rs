#![no_main]

use ledakem::format::decode_private_seed;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((ps, seed)) = decode_private_seed(data) {
        assert_eq!(seed.as_bytes(), &data[8..]);
        assert_eq!(seed.as_bytes().len(), ps.seed_bytes());
    }
});
