#![no_main]

use libfuzzer_sys::fuzz_target;
use numid_core::iq::{parse_base_params, parse_candidates};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(base) = parse_base_params(text) {
        assert!(base.n_fft0.is_power_of_two());
        assert!(base.m_active0 <= base.n_fft0);
    }
    let _ = parse_candidates(text);
});
