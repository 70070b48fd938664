//! Mixed-numerology OFDM baseband simulation and blind numerology
//! identification.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerology`] derives scalable numerologies and validates multi-user
//!   subband layouts.
//! * [`fft`] and [`waveform`] build CP-OFDM frames from payload bits.
//! * [`channel`] applies per-user multipath, superposition and AWGN.
//! * [`blind_id`] identifies numerology types from cyclic-prefix
//!   correlation and locates them by subband amplitude variation.
//! * [`receiver`] demodulates subbands with blind or genie parameters.
//! * [`metrics`] holds closed-form BPSK error rates and Monte-Carlo tallies.
//! * [`sim`] and [`iq`] drive sweeps, persist results and classify external
//!   IQ captures.

pub mod blind_id;
pub mod channel;
pub mod error;
pub mod fft;
pub mod iq;
pub mod metrics;
pub mod numerology;
pub mod receiver;
pub mod sim;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
