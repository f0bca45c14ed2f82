#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(c) = citenv::config::PipelineConfig::parse(text) {
            let _ = c.resolve();
        }
    }
});
