#![no_main]
use flatlab::cylinders::Direction;
use flatlab::QuadField;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = Direction::parse(text, QuadField::new(2).unwrap());
    }
});
