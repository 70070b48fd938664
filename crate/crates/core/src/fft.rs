//! Iterative radix-2 FFT with cached twiddle tables.
//!
//! [`dft`] and [`idft`] use the symmetric `1/sqrt(N)` scaling so the pair is
//! unitary and preserves mean power. [`fft_unscaled`] is the plain
//! `sum x[n] e^{-j2πmn/N}` transform.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `e^{-j...}` kernel.
    Forward,
    /// `e^{+j...}` kernel.
    Inverse,
}

#[derive(Debug)]
struct Plan {
    n: usize,
    /// `e^{-j2πi/n}` for `i < n/2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Plan {
    fn new(n: usize) -> Self {
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|i| Complex64::from_polar(1.0, -2.0 * PI * i as f64 / n as f64))
            .collect();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Self { n, twiddles, bitrev }
    }

    fn run(&self, buf: &mut [Complex64], dir: Direction) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let w = match dir {
                        Direction::Forward => w,
                        Direction::Inverse => w.conj(),
                    };
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<Plan>>> = RefCell::new(HashMap::new());
}

fn plan(n: usize) -> Rc<Plan> {
    PLANS.with(|plans| {
        plans
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Rc::new(Plan::new(n)))
            .clone()
    })
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Size(format!("transform length {n} is not a power of two")));
    }
    Ok(())
}

/// Unscaled transform in place.
pub fn fft_in_place(buf: &mut [Complex64], dir: Direction) -> Result<()> {
    check_len(buf.len())?;
    plan(buf.len()).run(buf, dir);
    Ok(())
}

/// Unscaled forward transform.
pub fn fft_unscaled(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = samples.to_vec();
    fft_in_place(&mut buf, Direction::Forward)?;
    Ok(buf)
}

fn scaled(input: &[Complex64], dir: Direction) -> Result<Vec<Complex64>> {
    let mut buf = input.to_vec();
    fft_in_place(&mut buf, dir)?;
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Unitary forward DFT.
pub fn dft(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    scaled(samples, Direction::Forward)
}

/// Unitary inverse DFT, `x = W^H s / sqrt(N)`.
pub fn idft(bins: &[Complex64]) -> Result<Vec<Complex64>> {
    scaled(bins, Direction::Inverse)
}
