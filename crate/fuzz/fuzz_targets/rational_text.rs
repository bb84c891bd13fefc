#![no_main]
use flatlab::exactfield::parse_rational_text;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_rational_text(text);
    }
});
