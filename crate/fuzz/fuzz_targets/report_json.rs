#![no_main]

use conewright::batch::plot_tables;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    if let Ok(tables) = plot_tables(&value) {
        for t in tables {
            assert!(t.rows.iter().all(|r| r.len() == t.header.len()));
            let _ = t.to_csv();
        }
    }
});
