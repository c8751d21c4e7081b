#![no_main]

use ledakem::format::KatFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kat) = KatFile::parse(text) {
        let reparsed = KatFile::parse(&kat.to_text()).expect("printed KAT file must parse");
        assert_eq!(kat, reparsed);
    }
});
