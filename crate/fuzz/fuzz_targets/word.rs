#![no_main]

use branchdyn::group::Word;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(w) = text.parse::<Word>() else { return };
    let back: Word = w.to_string().parse().expect("displayed word parses");
    assert_eq!(back, w);
});
