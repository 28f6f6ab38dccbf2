#![no_main]

use conewright::expr::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(expr) = parse(src) else { return };
    let printed = expr.to_string();
    let again = parse(&printed).expect("printed expressions parse");
    assert_eq!(again, expr, "round trip through {printed:?}");
});
