#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = qeraser::cli::fixture::read_csv(data) {
        for name in f.columns.clone() {
            let _ = f.column_f64(&name);
        }
    }
});
