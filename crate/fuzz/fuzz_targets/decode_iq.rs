#![no_main]

use libfuzzer_sys::fuzz_target;
use numid_core::iq::{decode_iq, encode_iq, IqFormat};

fuzz_target!(|data: &[u8]| {
    let Some((&tag, bytes)) = data.split_first() else {
        return;
    };
    let format = if tag & 1 == 0 { IqFormat::F32Le } else { IqFormat::I16Le };
    if let Ok(samples) = decode_iq(bytes, format) {
        assert_eq!(samples.len() * format.bytes_per_sample(), bytes.len());
        assert!(samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()));
        if format == IqFormat::F32Le {
            assert_eq!(decode_iq(&encode_iq(&samples, format), format).unwrap(), samples);
        }
    }
});
