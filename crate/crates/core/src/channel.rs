//! Per-user multipath, user superposition and calibrated AWGN.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::waveform::ComplexSample;
use crate::{Error, Result};

/// Nine-tap normalised profile used for the multipath Rayleigh runs.
pub const DEFAULT_PDP: [f64; 9] = [0.8407, 0.0, 0.0, 0.1332, 0.0, 0.0168, 0.0067, 0.0, 0.0027];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PowerDelayProfile {
    tap_powers: Vec<f64>,
}

impl PowerDelayProfile {
    pub fn new(tap_powers: Vec<f64>) -> Result<Self> {
        if tap_powers.is_empty() {
            return Err(Error::Profile("profile has no taps".into()));
        }
        if let Some(p) = tap_powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Profile(format!("tap power {p} is not a non-negative number")));
        }
        let total: f64 = tap_powers.iter().sum();
        if (total - 1.0).abs() > 1e-3 {
            return Err(Error::Profile(format!("tap powers sum to {total}, expected 1")));
        }
        Ok(Self { tap_powers })
    }

    pub fn tap_powers(&self) -> &[f64] {
        &self.tap_powers
    }

    pub fn len(&self) -> usize {
        self.tap_powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tap_powers.is_empty()
    }
}

impl Default for PowerDelayProfile {
    fn default() -> Self {
        Self {
            tap_powers: DEFAULT_PDP.to_vec(),
        }
    }
}

impl TryFrom<Vec<f64>> for PowerDelayProfile {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PowerDelayProfile> for Vec<f64> {
    fn from(p: PowerDelayProfile) -> Self {
        p.tap_powers
    }
}

/// One trial's channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps_per_user: Vec<Vec<ComplexSample>>,
    pub noise_sigma2: f64,
}

/// Unit-variance circularly-symmetric complex Gaussian sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `h[l] = sqrt(p_l) g_l`. Zero-power taps stay exactly zero and
/// consume no randomness.
pub fn draw_rayleigh_channel<R: Rng + ?Sized>(pdp: &PowerDelayProfile, rng: &mut R) -> Vec<ComplexSample> {
    pdp.tap_powers
        .iter()
        .map(|&p| {
            if p == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                complex_gaussian(rng) * p.sqrt()
            }
        })
        .collect()
}

/// Linear convolution truncated to the input length.
pub fn apply_channel(frame: &[ComplexSample], taps: &[ComplexSample]) -> Vec<ComplexSample> {
    let mut out = vec![Complex64::new(0.0, 0.0); frame.len()];
    for (l, &h) in taps.iter().enumerate() {
        if h == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &x) in out[l.min(frame.len())..].iter_mut().zip(frame) {
            *o += h * x;
        }
    }
    out
}

pub fn combine_users(user_signals: &[Vec<ComplexSample>]) -> Result<Vec<ComplexSample>> {
    let Some(first) = user_signals.first() else {
        return Ok(Vec::new());
    };
    let mut out = first.clone();
    for s in &user_signals[1..] {
        if s.len() != out.len() {
            return Err(Error::Length {
                expected: out.len(),
                actual: s.len(),
            });
        }
        out.iter_mut().zip(s).for_each(|(o, v)| *o += v);
    }
    Ok(out)
}

/// Average energy per payload bit of a noiseless transmit composite.
pub fn bit_energy(composite: &[ComplexSample], payload_bits: usize) -> f64 {
    if payload_bits == 0 {
        return 0.0;
    }
    composite.iter().map(|s| s.norm_sqr()).sum::<f64>() / payload_bits as f64
}

/// Adds complex white Gaussian noise with per-sample variance
/// `bit_energy / 10^(snr_db/10)`. An infinite SNR leaves the signal untouched.
/// Returns the noise variance that was applied.
pub fn add_awgn<R: Rng + ?Sized>(
    signal: &mut [ComplexSample],
    snr_db: f64,
    bit_energy: f64,
    rng: &mut R,
) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::Input("cannot add noise to an empty signal".into()));
    }
    if snr_db.is_nan() || !(bit_energy.is_finite() && bit_energy >= 0.0) {
        return Err(Error::Domain(format!("snr {snr_db} dB with bit energy {bit_energy}")));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let sigma2 = bit_energy / 10f64.powf(snr_db / 10.0);
    let sigma = sigma2.sqrt();
    for s in signal.iter_mut() {
        *s += complex_gaussian(rng) * sigma;
    }
    Ok(sigma2)
}
