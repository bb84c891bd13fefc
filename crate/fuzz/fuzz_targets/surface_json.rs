#![no_main]
use flatlab::surface::io::{parse_surface, AnySurface};
use flatlab::TranslationSurface;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // anything accepted must survive a round trip
    if let Ok(AnySurface::Exact(s)) = parse_surface(text) {
        let back = TranslationSurface::from_json(&s.to_json()).expect("re-parse");
        assert_eq!(back.to_json(), s.to_json());
    }
});
