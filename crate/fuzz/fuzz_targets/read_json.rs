#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = qeraser::cli::fixture::read_json(data) {
        assert!(f.meta.is_some());
        for row in &f.rows {
            assert_eq!(row.len(), f.columns.len());
        }
    }
});
