#![no_main]
use flatlab_cli::manifest::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = RunManifest::parse(text) {
        assert_eq!(RunManifest::parse(&m.to_json()).expect("re-parse"), m);
    }
});
