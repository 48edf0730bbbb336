#![no_main]

use branchdyn::LogQuantity;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    let Ok((q, base)) = LogQuantity::from_json(&value) else { return };
    let (back, base2) = LogQuantity::from_json(&q.to_json(base)).expect("round trip");
    assert_eq!(back, q);
    assert_eq!(base2, base);
});
