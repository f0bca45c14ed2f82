#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let (nodes, edges) = text.split_once("\0").unwrap_or((text, ""));
        let _ = citenv::network::parse_graph(nodes, edges);
    }
});
