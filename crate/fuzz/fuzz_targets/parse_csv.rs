#![no_main]

use libfuzzer_sys::fuzz_target;
use numid_core::sim::{format_csv, parse_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_csv(text) {
        let again = parse_csv(&format_csv(&rows)).unwrap();
        assert_eq!(format!("{again:?}"), format!("{rows:?}"));
    }
});
