#![no_main]
use flatlab::exactfield::{parse_quad_text, parse_quadnum};
use flatlab::QuadField;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for d in [2, 5] {
        let _ = parse_quad_text(text, QuadField::new(d).unwrap());
    }
    let _ = parse_quadnum(text);
});
