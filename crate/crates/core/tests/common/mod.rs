//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use numid_core::numerology::{derive_numerology, BaseParams, NumerologyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// O(N^2) transform with the given sign in the exponent, no scaling.
pub fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|m| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| v * Complex64::from_polar(1.0, sign * 2.0 * PI * ((m * i) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Normalised CP correlation evaluated straight from its definition.
pub fn direct_cp_metric(y: &[Complex64], n: usize, cp: usize, p: usize) -> f64 {
    let mut cross = Complex64::new(0.0, 0.0);
    let (mut ea, mut eb) = (0.0, 0.0);
    for j in 0..cp {
        let (a, b) = (y[p + j], y[p + n + j]);
        cross += a.conj() * b;
        ea += a.norm_sqr();
        eb += b.norm_sqr();
    }
    if ea == 0.0 || eb == 0.0 {
        0.0
    } else {
        cross.norm() / (ea.sqrt() * eb.sqrt())
    }
}

/// Full linear convolution truncated to the input length, as a double loop.
pub fn naive_convolution(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    (0..x.len())
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &tap) in h.iter().enumerate() {
                if l <= n {
                    acc += tap * x[n - l];
                }
            }
            acc
        })
        .collect()
}

/// A numerology with arbitrary FFT and CP sizes for metric tests.
pub fn custom_config(n_fft: usize, n_cp: usize) -> NumerologyConfig {
    let mut c = derive_numerology(0, &BaseParams::default()).unwrap();
    c.n_fft = n_fft;
    c.n_cp = n_cp;
    c
}

pub fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Binary search for the standard-normal upper quantile, using only the
/// series expansion of the normal density integral.
pub fn inverse_q(p: f64) -> f64 {
    let q = |x: f64| {
        // Q(x) = 1/2 - phi-integral from 0 to x, Taylor series of erf
        let t = x / std::f64::consts::SQRT_2;
        let mut term = t;
        let mut sum = t;
        for k in 1..200 {
            term *= -t * t / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        0.5 - sum / PI.sqrt()
    };
    let (mut lo, mut hi) = (0.0, 6.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
