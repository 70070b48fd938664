#![no_main]

use libfuzzer_sys::fuzz_target;
use numid_core::iq::{classify_bytes, IqFormat};
use numid_core::numerology::BaseParams;

// Small base so one frame is 68 samples and inputs stay cheap.
fuzz_target!(|data: &[u8]| {
    let Some((&tag, bytes)) = data.split_first() else {
        return;
    };
    let base = BaseParams {
        n_fft0: 64,
        m_active0: 16,
        ..BaseParams::default()
    };
    let format = if tag & 1 == 0 { IqFormat::F32Le } else { IqFormat::I16Le };
    let candidates: &[u32] = match (tag >> 1) % 3 {
        0 => &[0, 1],
        1 => &[0, 2],
        _ => &[2, 0],
    };
    if let Ok(report) = classify_bytes(bytes, format, &base, candidates) {
        let id = &report.identification;
        assert_eq!(id.type_estimates.len(), candidates.len());
        assert!(id.assignment.iter().flatten().all(|k| candidates.contains(k)));
        let _ = report.to_text();
    }
});
