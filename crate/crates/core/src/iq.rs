//! Interleaved IQ capture files and the identifier front end for them.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blind_id::{identify, IdentificationResult};
use crate::numerology::{validate_scenario, BaseParams, CpRatio};
use crate::waveform::ComplexSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IqFormat {
    /// 32-bit float I then Q, little-endian.
    F32Le,
    /// 16-bit signed I then Q, little-endian, full scale 32768.
    I16Le,
}

impl IqFormat {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            IqFormat::F32Le => 8,
            IqFormat::I16Le => 4,
        }
    }
}

impl FromStr for IqFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32le" => Ok(IqFormat::F32Le),
            "i16le" => Ok(IqFormat::I16Le),
            other => Err(Error::Input(format!("unknown sample format {other:?}"))),
        }
    }
}

impl std::fmt::Display for IqFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IqFormat::F32Le => "f32le",
            IqFormat::I16Le => "i16le",
        })
    }
}

pub fn decode_iq(bytes: &[u8], format: IqFormat) -> Result<Vec<ComplexSample>> {
    if bytes.is_empty() {
        return Err(Error::Input("capture is empty".into()));
    }
    let width = format.bytes_per_sample();
    if !bytes.len().is_multiple_of(width) {
        return Err(Error::Input(format!(
            "{} bytes is not a whole number of {width}-byte {format} samples",
            bytes.len()
        )));
    }
    let half = width / 2;
    bytes
        .chunks_exact(width)
        .enumerate()
        .map(|(i, c)| {
            let (re, im) = match format {
                IqFormat::F32Le => (
                    f32::from_le_bytes(c[..half].try_into().unwrap()) as f64,
                    f32::from_le_bytes(c[half..].try_into().unwrap()) as f64,
                ),
                IqFormat::I16Le => (
                    f64::from(i16::from_le_bytes(c[..half].try_into().unwrap())) / 32768.0,
                    f64::from(i16::from_le_bytes(c[half..].try_into().unwrap())) / 32768.0,
                ),
            };
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::Input(format!("sample {i} is not finite")));
            }
            Ok(Complex64::new(re, im))
        })
        .collect()
}

/// Inverse of [`decode_iq`]. For `i16le` the samples are scaled so the
/// largest component magnitude maps to 32767.
pub fn encode_iq(samples: &[ComplexSample], format: IqFormat) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * format.bytes_per_sample());
    match format {
        IqFormat::F32Le => {
            for s in samples {
                out.extend_from_slice(&(s.re as f32).to_le_bytes());
                out.extend_from_slice(&(s.im as f32).to_le_bytes());
            }
        }
        IqFormat::I16Le => {
            let peak = samples.iter().map(|s| s.re.abs().max(s.im.abs())).fold(0.0, f64::max);
            let scale = if peak > 0.0 { 32767.0 / peak } else { 0.0 };
            for s in samples {
                out.extend_from_slice(&((s.re * scale).round() as i16).to_le_bytes());
                out.extend_from_slice(&((s.im * scale).round() as i16).to_le_bytes());
            }
        }
    }
    out
}

/// Parses `key=value` pairs separated by commas. Keys are `df0` (Hz), `n0`,
/// `m0`, `cp` (as `num/den`) and `budget`; missing keys keep their
/// defaults. `default` or an empty string gives the defaults.
pub fn parse_base_params(text: &str) -> Result<BaseParams> {
    let mut base = BaseParams::default();
    let text = text.trim();
    if text.is_empty() || text == "default" {
        return Ok(base);
    }
    for item in text.split(',') {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("{item:?} is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || Error::Input(format!("bad value {value:?} for {key}"));
        match key {
            "df0" => base.delta_f0_hz = value.parse().map_err(|_| bad())?,
            "n0" => base.n_fft0 = value.parse().map_err(|_| bad())?,
            "m0" => base.m_active0 = value.parse().map_err(|_| bad())?,
            "budget" => base.frame_symbol_budget = value.parse().map_err(|_| bad())?,
            "cp" => {
                let (num, den) = value.split_once('/').ok_or_else(bad)?;
                base.cp_ratio = CpRatio::new(
                    num.trim().parse().map_err(|_| bad())?,
                    den.trim().parse().map_err(|_| bad())?,
                );
            }
            _ => return Err(Error::Input(format!("unknown base parameter {key:?}"))),
        }
    }
    crate::numerology::derive_numerology(0, &base)?;
    Ok(base)
}

/// Parses `0,1,2`.
pub fn parse_candidates(text: &str) -> Result<Vec<u32>> {
    let ks: Vec<u32> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad candidate {s:?}")))
        })
        .collect::<Result<_>>()?;
    if ks.is_empty() {
        return Err(Error::Input("candidate list is empty".into()));
    }
    Ok(ks)
}

/// Identifier output for an external capture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub samples: usize,
    pub candidates: Vec<u32>,
    /// Subcarrier spacing in Hz of each candidate.
    pub spacings_hz: Vec<f64>,
    pub identification: IdentificationResult,
}

impl ClassifyReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let id = &self.identification;
        let _ = writeln!(out, "samples: {}", self.samples);
        for (v, df) in id.type_estimates.iter().zip(&self.spacings_hz) {
            let size = v
                .peaks
                .map_or_else(|| "n/a".to_string(), |p| p.estimated_size.to_string());
            let _ = writeln!(
                out,
                "k={} ({} kHz): peak distance {size}, {}",
                v.k,
                df / 1000.0,
                if v.matched { "matched" } else { "no match" }
            );
        }
        if id.matched().next().is_none() {
            let _ = writeln!(out, "no numerology matched");
            return out;
        }
        for (i, slot) in id.assignment.iter().enumerate() {
            let which = match slot {
                Some(k) => {
                    let df = self
                        .candidates
                        .iter()
                        .position(|c| c == k)
                        .map_or(f64::NAN, |j| self.spacings_hz[j]);
                    format!("k={k} ({} kHz)", df / 1000.0)
                }
                None => "unassigned".into(),
            };
            let _ = writeln!(out, "subband {}: {which}", i + 1);
        }
        out
    }
}

/// Runs the identifier on decoded samples, treating the band as one subband
/// per candidate.
pub fn classify_samples(y: &[ComplexSample], base: &BaseParams, candidates: &[u32]) -> Result<ClassifyReport> {
    let layout: Vec<(u32, usize)> = candidates.iter().enumerate().map(|(i, &k)| (k, i + 1)).collect();
    let plan = validate_scenario(&layout, base)?;
    if y.len() < plan.frame_len {
        return Err(Error::Input(format!(
            "capture holds {} samples, one frame needs {}",
            y.len(),
            plan.frame_len
        )));
    }
    let mut identification = identify(y, &plan);
    // the layout used here is a placeholder, not ground truth
    identification.type_correct = false;
    identification.location_correct = false;
    Ok(ClassifyReport {
        samples: y.len(),
        candidates: plan.candidates.iter().map(|c| c.k).collect(),
        spacings_hz: plan.candidates.iter().map(|c| c.delta_f_hz).collect(),
        identification,
    })
}

pub fn classify_bytes(bytes: &[u8], format: IqFormat, base: &BaseParams, candidates: &[u32]) -> Result<ClassifyReport> {
    classify_samples(&decode_iq(bytes, format)?, base, candidates)
}

pub fn classify_iq_file(
    path: &Path,
    format: IqFormat,
    base: &BaseParams,
    candidates: &[u32],
) -> Result<ClassifyReport> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    classify_bytes(&bytes, format, base, candidates)
}
