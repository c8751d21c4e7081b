#![no_main]

use std::sync::OnceLock;

use ledakem::kem::decapsulate_bytes;
use ledakem::{gen_keypair, ParamSet, PrivateKey, Seed};
use libfuzzer_sys::fuzz_target;

fn key() -> &'static PrivateKey {
    static KEY: OnceLock<PrivateKey> = OnceLock::new();
    KEY.get_or_init(|| {
        let ps: ParamSet = "cat1-n2".parse().unwrap();
        gen_keypair(&ps, &Seed::for_params(&ps, &[0x5a; 24]).unwrap()).unwrap().0
    })
}

// Any input, stretched or cut to ciphertext length, decapsulates to a
// secret of the right size.
fuzz_target!(|data: &[u8]| {
    let sk = key();
    let len = sk.params().ciphertext_bytes();
    let mut ct = data.to_vec();
    ct.resize(len, 0);
    let ss = decapsulate_bytes(sk, &ct).unwrap();
    assert_eq!(ss.as_bytes().len(), sk.params().secret_bytes());
});
