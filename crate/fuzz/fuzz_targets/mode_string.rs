//! Mode-string parser: must never panic for any input at any expected
//! contact count, and accepted strings must round-trip through display.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sharegrasp::modes::ContactMode;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for n in [0usize, 1, 2, 4, 9] {
        if let Ok(mode) = ContactMode::parse(text, n) {
            assert_eq!(mode.to_string(), text);
            assert_eq!(ContactMode::parse(&mode.to_string(), n).unwrap(), mode);
        }
    }
});
