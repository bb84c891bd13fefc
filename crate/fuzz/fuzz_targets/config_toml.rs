#![no_main]
use flatlab_cli::config_flags;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = config_flags(text, "average");
    }
});
