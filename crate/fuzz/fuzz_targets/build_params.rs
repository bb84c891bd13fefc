#![no_main]
use flatlab_cli::commands::build_example;
use flatlab_cli::Example;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for kind in [Example::Ztable, Example::Ltable, Example::SlitTori, Example::SplitLtable] {
        let _ = build_example(kind, Some(text));
    }
});
