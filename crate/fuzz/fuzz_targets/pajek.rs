#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(net) = citenv::export::parse_pajek(text) {
            let _ = citenv::export::graph_from_pajek(&net);
        }
    }
});
