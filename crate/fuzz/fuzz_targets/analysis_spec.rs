#![no_main]

use conewright::batch::{decode_spec, parse_spec_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(values) = parse_spec_file(text) else { return };
    for value in values {
        if let Ok(spec) = decode_spec(&value) {
            let _ = spec.validate(None);
        }
    }
});
