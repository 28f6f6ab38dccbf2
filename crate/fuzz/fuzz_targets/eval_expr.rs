#![no_main]

use conewright::expr::parse;
use libfuzzer_sys::fuzz_target;

// Input: expression source, a NUL byte, then little-endian f64 coordinates.
fuzz_target!(|data: &[u8]| {
    let (src, rest) = match data.iter().position(|&b| b == 0) {
        Some(i) => (&data[..i], &data[i + 1..]),
        None => (data, &[][..]),
    };
    let Ok(src) = std::str::from_utf8(src) else { return };
    let Ok(expr) = parse(src) else { return };
    if expr.arity() > 64 {
        return;
    }
    let mut x: Vec<f64> = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .map(|v| if v.is_finite() { v } else { 0.0 })
        .collect();
    x.resize(expr.arity(), 0.0);
    let value = expr.eval(&x);
    if let Ok(v) = value {
        assert!(v.is_finite(), "{src} evaluated to {v} at {x:?}");
    }
    for axis in 0..expr.arity().min(4) {
        if let Ok(d) = expr.differentiate(axis) {
            let _ = d.eval(&x);
        }
    }
});
