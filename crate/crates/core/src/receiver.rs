//! Subband demodulation and bit-error counting.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::dft;
use crate::numerology::{NumerologyConfig, SubbandAllocation};
use crate::waveform::ComplexSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemodMode {
    Blind,
    NonBlind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemodReport {
    pub user_index: usize,
    pub mode: DemodMode,
    pub bits_out: Vec<bool>,
    pub bit_errors: usize,
}

impl DemodReport {
    pub fn new(user_index: usize, mode: DemodMode, bits_out: Vec<bool>, tx_bits: &[bool]) -> Result<Self> {
        let bit_errors = count_bit_errors(tx_bits, &bits_out)?;
        Ok(Self {
            user_index,
            mode,
            bits_out,
            bit_errors,
        })
    }
}

/// Splits `frame` into symbol bodies of `config`'s FFT size.
pub fn remove_cp<'a>(frame: &'a [ComplexSample], config: &NumerologyConfig) -> Result<Vec<&'a [ComplexSample]>> {
    let period = config.symbol_len();
    if frame.is_empty() || !frame.len().is_multiple_of(period) {
        return Err(Error::Framing(format!(
            "{} samples are not a whole number of {period}-sample k={} symbols",
            frame.len(),
            config.k
        )));
    }
    Ok(frame.chunks_exact(period).map(|s| &s[config.n_cp..]).collect())
}

/// Channel frequency response `sum h[l] e^{-j2πml/N}` at FFT-order bin `m`.
fn frequency_response(taps: &[ComplexSample], bin: usize, n_fft: usize) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(l, &h)| h * Complex64::from_polar(1.0, -2.0 * PI * ((bin * l) % n_fft) as f64 / n_fft as f64))
        .sum()
}

/// CP removal, unitary DFT, active-bin extraction, optional one-tap
/// zero-forcing with known channel taps, then a hard BPSK decision
/// (`re >= 0` gives bit 0).
pub fn demodulate_subband(
    y: &[ComplexSample],
    config: &NumerologyConfig,
    allocation: &SubbandAllocation,
    taps: Option<&[ComplexSample]>,
) -> Result<Vec<bool>> {
    let bodies = remove_cp(y, config)?;
    let bins: Vec<usize> = allocation.active_bins(config.n_fft).collect();
    let response: Option<Vec<Complex64>> =
        taps.map(|h| bins.iter().map(|&b| frequency_response(h, b, config.n_fft)).collect());
    let mut bits = Vec::with_capacity(bodies.len() * bins.len());
    for body in bodies {
        let spectrum = dft(body)?;
        for (i, &b) in bins.iter().enumerate() {
            let mut z = spectrum[b];
            if let Some(h) = &response {
                if h[i].norm_sqr() > 0.0 {
                    z /= h[i];
                }
            }
            bits.push(z.re < 0.0);
        }
    }
    Ok(bits)
}

/// [`demodulate_subband`] followed by error counting against `tx_bits`.
pub fn demodulate_report(
    y: &[ComplexSample],
    config: &NumerologyConfig,
    allocation: &SubbandAllocation,
    taps: Option<&[ComplexSample]>,
    mode: DemodMode,
    tx_bits: &[bool],
) -> Result<DemodReport> {
    let bits = demodulate_subband(y, config, allocation, taps)?;
    DemodReport::new(allocation.user_index, mode, bits, tx_bits)
}

/// Hamming distance.
pub fn count_bit_errors(tx_bits: &[bool], rx_bits: &[bool]) -> Result<usize> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::Length {
            expected: tx_bits.len(),
            actual: rx_bits.len(),
        });
    }
    Ok(tx_bits.iter().zip(rx_bits).filter(|(a, b)| a != b).count())
}
