//! Closed-form BPSK error rates and Monte-Carlo aggregation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gaussian tail probability `½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn check_snr(snr_linear: f64) -> Result<()> {
    if snr_linear.is_nan() || snr_linear < 0.0 {
        return Err(Error::Domain(format!("linear snr {snr_linear} is negative")));
    }
    Ok(())
}

/// `½ Q(√(2 snr))`.
pub fn ber_awgn_bpsk(snr_linear: f64) -> Result<f64> {
    check_snr(snr_linear)?;
    Ok(0.5 * q_function((2.0 * snr_linear).sqrt()))
}

/// `½ (1 - √(snr / (snr + 1)))`.
pub fn ber_rayleigh_bpsk(snr_linear: f64) -> Result<f64> {
    check_snr(snr_linear)?;
    if snr_linear == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(0.5 * (1.0 - (snr_linear / (snr_linear + 1.0)).sqrt()))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Result of one Monte-Carlo trial. Receivers that were not run leave their
/// error count empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub snr_index: u32,
    pub trial_index: u64,
    /// RNG stream the trial drew from.
    pub stream: u64,
    pub type_correct: Option<bool>,
    pub location_correct: Option<bool>,
    pub bit_errors_blind: Option<u64>,
    pub bit_errors_nonblind: Option<u64>,
    pub total_bits: u64,
}

/// Additive counters; `merge` is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub identified_trials: u64,
    pub type_successes: u64,
    pub location_successes: u64,
    pub joint_successes: u64,
    pub blind_trials: u64,
    pub blind_errors: u64,
    pub blind_bits: u64,
    pub nonblind_trials: u64,
    pub nonblind_errors: u64,
    pub nonblind_bits: u64,
}

impl Tally {
    pub fn record(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        if let (Some(t), Some(l)) = (o.type_correct, o.location_correct) {
            self.identified_trials += 1;
            self.type_successes += u64::from(t);
            self.location_successes += u64::from(l);
            self.joint_successes += u64::from(t && l);
        }
        if let Some(e) = o.bit_errors_blind {
            self.blind_trials += 1;
            self.blind_errors += e;
            self.blind_bits += o.total_bits;
        }
        if let Some(e) = o.bit_errors_nonblind {
            self.nonblind_trials += 1;
            self.nonblind_errors += e;
            self.nonblind_bits += o.total_bits;
        }
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            identified_trials: self.identified_trials + other.identified_trials,
            type_successes: self.type_successes + other.type_successes,
            location_successes: self.location_successes + other.location_successes,
            joint_successes: self.joint_successes + other.joint_successes,
            blind_trials: self.blind_trials + other.blind_trials,
            blind_errors: self.blind_errors + other.blind_errors,
            blind_bits: self.blind_bits + other.blind_bits,
            nonblind_trials: self.nonblind_trials + other.nonblind_trials,
            nonblind_errors: self.nonblind_errors + other.nonblind_errors,
            nonblind_bits: self.nonblind_bits + other.nonblind_bits,
        }
    }

    /// Converts the counters into a report row. Quantities with no
    /// contributing trials are NaN.
    pub fn row(&self, snr_db: f64) -> SweepRow {
        let ratio = |num: u64, den: u64| if den == 0 { f64::NAN } else { num as f64 / den as f64 };
        let snr = db_to_linear(snr_db);
        SweepRow {
            snr_db,
            trials: self.trials,
            type_success_rate: ratio(self.type_successes, self.identified_trials),
            location_success_rate: ratio(self.location_successes, self.identified_trials),
            joint_success_rate: ratio(self.joint_successes, self.identified_trials),
            ber_blind: ratio(self.blind_errors, self.blind_bits),
            ber_nonblind: ratio(self.nonblind_errors, self.nonblind_bits),
            ber_theory_awgn: ber_awgn_bpsk(snr).unwrap_or(f64::NAN),
            ber_theory_rayleigh: ber_rayleigh_bpsk(snr).unwrap_or(f64::NAN),
        }
    }
}

impl FromIterator<TrialOutcome> for Tally {
    fn from_iter<I: IntoIterator<Item = TrialOutcome>>(iter: I) -> Self {
        let mut t = Tally::default();
        iter.into_iter().for_each(|o| t.record(&o));
        t
    }
}

/// One line of the sweep report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub trials: u64,
    pub type_success_rate: f64,
    pub location_success_rate: f64,
    pub joint_success_rate: f64,
    pub ber_blind: f64,
    pub ber_nonblind: f64,
    pub ber_theory_awgn: f64,
    pub ber_theory_rayleigh: f64,
}

/// Folds trial outcomes at one SNR point into a row.
pub fn aggregate(snr_db: f64, outcomes: &[TrialOutcome]) -> Result<SweepRow> {
    if outcomes.is_empty() {
        return Err(Error::Input("no trial outcomes to aggregate".into()));
    }
    Ok(outcomes.iter().cloned().collect::<Tally>().row(snr_db))
}

/// Standard deviation of a binomial proportion estimate.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}
