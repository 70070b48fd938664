//! CP-OFDM transmitter: BPSK mapping, subcarrier placement, IDFT and cyclic
//! prefix insertion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::idft;
use crate::numerology::{NumerologyConfig, SubbandAllocation};
use crate::{Error, Result};

pub type ComplexSample = Complex64;

/// BPSK: bit 0 maps to `+1`, bit 1 to `-1`.
pub fn map_bpsk(bits: &[bool]) -> Vec<ComplexSample> {
    bits.iter()
        .map(|&b| Complex64::new(if b { -1.0 } else { 1.0 }, 0.0))
        .collect()
}

/// One symbol's subcarrier values in standard FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqVector(pub Vec<ComplexSample>);

impl FreqVector {
    pub fn bins(&self) -> &[ComplexSample] {
        &self.0
    }
}

pub fn build_freq_vector(
    symbols: &[ComplexSample],
    allocation: &SubbandAllocation,
    config: &NumerologyConfig,
) -> Result<FreqVector> {
    if symbols.len() != allocation.m_active {
        return Err(Error::Payload(format!(
            "{} symbols for {} active subcarriers",
            symbols.len(),
            allocation.m_active
        )));
    }
    if allocation.m_active > config.n_fft {
        return Err(Error::Payload(format!(
            "{} active subcarriers exceed FFT size {}",
            allocation.m_active, config.n_fft
        )));
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); config.n_fft];
    for (bin, &s) in allocation.active_bins(config.n_fft).zip(symbols) {
        bins[bin] = s;
    }
    Ok(FreqVector(bins))
}

/// Prepends the last `n_cp` samples of `symbol`.
pub fn add_cp(symbol: &[ComplexSample], n_cp: usize) -> Result<Vec<ComplexSample>> {
    if n_cp > symbol.len() {
        return Err(Error::Param(format!(
            "CP of {n_cp} samples is longer than the {}-sample symbol",
            symbol.len()
        )));
    }
    let mut out = Vec::with_capacity(symbol.len() + n_cp);
    out.extend_from_slice(&symbol[symbol.len() - n_cp..]);
    out.extend_from_slice(symbol);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFrame {
    pub user_index: usize,
    pub samples: Vec<ComplexSample>,
    pub payload_bits: Vec<bool>,
}

/// Modulates exactly one frame worth of bits.
pub fn assemble_user_frame(
    bits: &[bool],
    config: &NumerologyConfig,
    allocation: &SubbandAllocation,
) -> Result<UserFrame> {
    assemble_user_frames(bits, config, allocation, 1)
}

/// Modulates `frames` consecutive frames.
pub fn assemble_user_frames(
    bits: &[bool],
    config: &NumerologyConfig,
    allocation: &SubbandAllocation,
    frames: usize,
) -> Result<UserFrame> {
    let expected = frames * config.bits_per_frame();
    if bits.len() != expected || frames == 0 {
        return Err(Error::Payload(format!(
            "{} bits supplied, {frames} frame(s) of numerology k={} carry {expected}",
            bits.len(),
            config.k
        )));
    }
    let mut samples = Vec::with_capacity(frames * config.frame_len());
    for chunk in bits.chunks(config.m_active) {
        let freq = build_freq_vector(&map_bpsk(chunk), allocation, config)?;
        let body = idft(freq.bins())?;
        samples.extend(add_cp(&body, config.n_cp)?);
    }
    Ok(UserFrame {
        user_index: allocation.user_index,
        samples,
        payload_bits: bits.to_vec(),
    })
}
