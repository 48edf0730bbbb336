#![no_main]

use branchdyn::invariants::{parse_rational, DisplayBase};
use branchdyn::{Perm, Vertex};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<Perm>() {
        let back: Perm = p.to_string().parse().expect("displayed permutation parses");
        assert_eq!(back, p);
        assert!(p.compose(&p.inverse()).is_identity());
    }
    if let Ok(v) = text.parse::<Vertex>() {
        let back: Vertex = v.to_string().parse().expect("displayed vertex parses");
        assert_eq!(back, v);
    }
    let _ = text.parse::<DisplayBase>();
    let _ = parse_rational(text);
});
