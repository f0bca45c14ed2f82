#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(id) = citenv::ingest::normalize_journal_name(text) {
            // normalisation is idempotent
            assert_eq!(
                citenv::ingest::normalize_journal_name(id.as_str()),
                Ok(id.clone())
            );
        }
    }
});
