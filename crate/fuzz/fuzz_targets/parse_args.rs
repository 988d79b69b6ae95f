#![no_main]

use libfuzzer_sys::fuzz_target;

// Whitespace-separated argv; parsing must return Ok or a usage error, never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    let argv = std::iter::once("qeraser").chain(line.split_whitespace());
    if let Ok(config) = qeraser::cli::parse_args(argv) {
        let _ = config.name();
        let _ = config.format();
    }
});
