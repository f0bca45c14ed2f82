#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = citenv::environment::parse_matrix(text) {
            let again =
                citenv::environment::parse_matrix(&citenv::environment::write_matrix(&m)).unwrap();
            assert_eq!(again, m);
        }
    }
});
