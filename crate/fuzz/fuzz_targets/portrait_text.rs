#![no_main]

use branchdyn::Portrait;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = text.parse::<Portrait>() else { return };
    let back: Portrait = p.to_string().parse().expect("displayed portrait parses");
    assert_eq!(back, p);
    if p.depth() <= 4 && p.arity() <= 8 {
        let id = Portrait::identity(p.arity(), p.depth());
        assert_eq!(p.compose(&p.invert()).unwrap(), id);
    }
});
