#![no_main]

use branchdyn::group::{GroupSpec, Tower};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = GroupSpec::from_json_str(text) else { return };
    let again = GroupSpec::from_json_str(&spec.to_json().to_string()).expect("re-serialized spec parses");
    assert_eq!(again.arity(), spec.arity());
    if spec.arity() <= 4 {
        let a = Tower::new(spec).order(2).expect("level 2 quotient");
        let b = Tower::new(again).order(2).expect("level 2 quotient");
        assert_eq!(a, b);
    }
});
