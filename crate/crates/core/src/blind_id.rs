//! Blind numerology identification.
//!
//! Type identification correlates every candidate's cyclic prefix with the
//! samples one FFT length later. The normalised correlation at each start
//! position is folded onto one symbol period, the prefix value is mirrored
//! onto the data tail it was copied from, and the two strongest positions in
//! the two halves of the period give a distance that should equal the
//! candidate's FFT size.
//!
//! Location identification strips the identified numerology's prefixes,
//! transforms each symbol with its own FFT size and picks the subband whose
//! amplitude spectrum varies least relative to its mean.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::fft_unscaled;
use crate::numerology::{subband_allocation, NumerologyConfig, ScenarioPlan};
use crate::waveform::ComplexSample;
use crate::{Error, Result};

/// Normalised CP correlation values of one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMetric {
    pub candidate_k: u32,
    pub values: Vec<f64>,
}

/// Largest ratio of a removed sample's energy to the remaining window energy
/// the sliding update accepts before recomputing the window.
const CANCELLATION_LIMIT: f64 = 1e4;

/// Running sums over the prefix window `y[p..p+cp]` and the lagged window
/// `y[p+n..p+n+cp]`.
#[derive(Debug, Clone, Copy, Default)]
struct LagSums {
    cross: Complex64,
    energy_head: f64,
    energy_tail: f64,
    nonzero_head: usize,
    nonzero_tail: usize,
}

impl LagSums {
    fn direct(y: &[ComplexSample], p: usize, n: usize, cp: usize) -> Self {
        let mut s = LagSums::default();
        for j in 0..cp {
            s.add(y[p + j], y[p + n + j]);
        }
        s
    }

    fn add(&mut self, a: ComplexSample, b: ComplexSample) {
        self.cross += a.conj() * b;
        self.energy_head += a.norm_sqr();
        self.energy_tail += b.norm_sqr();
        self.nonzero_head += usize::from(a != Complex64::new(0.0, 0.0));
        self.nonzero_tail += usize::from(b != Complex64::new(0.0, 0.0));
    }

    /// Returns false when the removed terms dwarf what is left, in which
    /// case the remaining sums have lost too many digits to be trusted.
    fn remove(&mut self, a: ComplexSample, b: ComplexSample) -> bool {
        let (ea, eb) = (a.norm_sqr(), b.norm_sqr());
        self.cross -= a.conj() * b;
        self.energy_head -= ea;
        self.energy_tail -= eb;
        self.nonzero_head -= usize::from(a != Complex64::new(0.0, 0.0));
        self.nonzero_tail -= usize::from(b != Complex64::new(0.0, 0.0));
        ea <= CANCELLATION_LIMIT * self.energy_head && eb <= CANCELLATION_LIMIT * self.energy_tail
    }

    fn accumulate(&mut self, other: &LagSums) {
        self.cross += other.cross;
        self.energy_head += other.energy_head.max(0.0);
        self.energy_tail += other.energy_tail.max(0.0);
        self.nonzero_head += other.nonzero_head;
        self.nonzero_tail += other.nonzero_tail;
    }

    fn normalised(&self) -> f64 {
        if self.nonzero_head == 0 || self.nonzero_tail == 0 {
            return 0.0;
        }
        let denom = (self.energy_head.max(0.0) * self.energy_tail.max(0.0)).sqrt();
        if denom == 0.0 {
            return 0.0;
        }
        (self.cross.norm() / denom).min(1.0)
    }
}

fn check_metric_len(y: &[ComplexSample], candidate: &NumerologyConfig) -> Result<usize> {
    let span = candidate.n_fft + candidate.n_cp;
    if y.len() < span {
        return Err(Error::Size(format!(
            "{} samples cannot cover one k={} symbol of {span} samples",
            y.len(),
            candidate.k
        )));
    }
    Ok(y.len() - span + 1)
}

/// Calls `visit` with the lag sums at every start position, sliding the
/// windows one sample at a time. The windows are recomputed directly every
/// `cp` steps and whenever a removal cancels most of a sum.
fn for_each_position(
    y: &[ComplexSample],
    candidate: &NumerologyConfig,
    mut visit: impl FnMut(usize, &LagSums),
) -> Result<()> {
    let positions = check_metric_len(y, candidate)?;
    let (n, cp) = (candidate.n_fft, candidate.n_cp);
    let resync = cp.max(1);
    let mut sums = LagSums::default();
    for p in 0..positions {
        if p % resync == 0 || !sums.remove(y[p - 1], y[p - 1 + n]) {
            sums = LagSums::direct(y, p, n, cp);
        } else {
            sums.add(y[p + cp - 1], y[p + cp - 1 + n]);
        }
        visit(p, &sums);
    }
    Ok(())
}

/// Normalised CP correlation at every start position
/// `0..=len - n_fft - n_cp`, summing over `j in 0..n_cp`. Positions where
/// either window is all zero yield 0.
pub fn cp_correlation_metric(y: &[ComplexSample], candidate: &NumerologyConfig) -> Result<CorrelationMetric> {
    let mut values = Vec::with_capacity(y.len());
    for_each_position(y, candidate, |_, s| values.push(s.normalised()))?;
    Ok(CorrelationMetric {
        candidate_k: candidate.k,
        values,
    })
}

/// CP correlation with the sums of all start positions sharing the same
/// offset modulo the symbol period accumulated before normalising. The
/// result has one value per offset in `0..n_fft + n_cp`.
pub fn folded_correlation_metric(y: &[ComplexSample], candidate: &NumerologyConfig) -> Result<CorrelationMetric> {
    let period = candidate.symbol_len();
    let mut folded = vec![LagSums::default(); period];
    for_each_position(y, candidate, |p, s| folded[p % period].accumulate(s))?;
    Ok(CorrelationMetric {
        candidate_k: candidate.k,
        values: folded.iter().map(LagSums::normalised).collect(),
    })
}

/// Maps the folded metric onto one symbol period as seen from the prefix.
/// Offsets below `n_fft` keep their own value. Offsets from `n_fft` onwards
/// hold the data tail that was copied into the prefix, so they take the value
/// of the prefix start `n_fft` samples earlier; their own forward-lag value
/// only reflects the next symbol's prefix and is dropped.
pub fn period_profile(folded: &[f64], candidate: &NumerologyConfig) -> Vec<f64> {
    let period = candidate.symbol_len();
    let at = |t: usize| folded.get(t).copied().unwrap_or(0.0);
    (0..period)
        .map(|t| {
            if t < candidate.n_fft {
                at(t)
            } else {
                at(t - candidate.n_fft)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakPair {
    pub i_p1: usize,
    pub i_p2: usize,
    pub estimated_size: usize,
}

fn argmax(values: &[f64], range: std::ops::Range<usize>) -> usize {
    let mut best = range.start;
    let mut best_value = f64::NEG_INFINITY;
    for i in range {
        let v = values.get(i).copied().unwrap_or(0.0);
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Strongest index in each half of one symbol period, ties going to the
/// smaller index. Values missing past the end of `values` count as zero.
pub fn find_peak_pair(values: &[f64], candidate: &NumerologyConfig) -> PeakPair {
    let period = candidate.symbol_len();
    let half = period / 2;
    let i_p1 = argmax(values, 0..half);
    let i_p2 = argmax(values, half..period);
    PeakPair {
        i_p1,
        i_p2,
        estimated_size: i_p1.abs_diff(i_p2),
    }
}

/// Distance from `size` to the nearer of `n_fft` and `n_fft + n_cp`.
fn size_error(size: usize, candidate: &NumerologyConfig) -> usize {
    size.abs_diff(candidate.n_fft)
        .min(size.abs_diff(candidate.symbol_len()))
}

/// Outcome of the time-domain test for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeVerdict {
    pub k: u32,
    /// `None` when the signal is too short for this candidate.
    pub peaks: Option<PeakPair>,
    /// Profile value at the first peak.
    pub peak_value: f64,
    /// Candidate whose FFT size is closest to the estimated size.
    pub nearest_k: Option<u32>,
    pub matched: bool,
}

/// Runs the time-domain test for every candidate. A candidate matches when
/// its own FFT size is the closest in the set to the measured peak distance
/// and lies within half its CP length of it.
pub fn estimate_type(y: &[ComplexSample], candidates: &[NumerologyConfig]) -> Vec<TypeVerdict> {
    candidates
        .iter()
        .map(|cand| {
            let Ok(folded) = folded_correlation_metric(y, cand) else {
                return TypeVerdict {
                    k: cand.k,
                    peaks: None,
                    peak_value: 0.0,
                    nearest_k: None,
                    matched: false,
                };
            };
            let profile = period_profile(&folded.values, cand);
            let peaks = find_peak_pair(&profile, cand);
            let size = peaks.estimated_size;
            let nearest = candidates
                .iter()
                .min_by_key(|c| size_error(size, c))
                .expect("candidate set is non-empty inside the loop");
            TypeVerdict {
                k: cand.k,
                peaks: Some(peaks),
                peak_value: profile[peaks.i_p1],
                nearest_k: Some(nearest.k),
                matched: nearest.k == cand.k && 2 * size_error(size, cand) <= cand.n_cp,
            }
        })
        .collect()
}

/// `variance / mean` with the `n - 1` divisor. An all-zero band gives
/// `+inf`.
pub fn variation_coefficient(amplitudes: &[f64]) -> f64 {
    let n = amplitudes.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = amplitudes.iter().sum::<f64>() / n as f64;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    let var = amplitudes.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    var / mean
}

/// Per-subband variation coefficients of `y` analysed with `identified`'s
/// FFT size. Every complete symbol period of `identified` in `y` has its
/// prefix removed and is transformed without scaling; amplitudes of each
/// subband's active bins are pooled across symbols.
pub fn variation_coefficients(
    y: &[ComplexSample],
    identified: &NumerologyConfig,
    plan: &ScenarioPlan,
) -> Result<Vec<f64>> {
    let period = identified.symbol_len();
    let symbols = y.len() / period;
    if symbols == 0 {
        return Err(Error::Size(format!(
            "{} samples hold no complete k={} symbol",
            y.len(),
            identified.k
        )));
    }
    let n_subbands = plan.n_subbands();
    let bins: Vec<Vec<usize>> = (1..=n_subbands)
        .map(|p| {
            subband_allocation(0, p, n_subbands, identified, &plan.base)
                .map(|a| a.active_bins(identified.n_fft).collect())
        })
        .collect::<Result<_>>()?;
    let mut pools: Vec<Vec<f64>> = bins.iter().map(|b| Vec::with_capacity(b.len() * symbols)).collect();
    for s in 0..symbols {
        let start = s * period + identified.n_cp;
        let spectrum = fft_unscaled(&y[start..start + identified.n_fft])?;
        for (pool, band) in pools.iter_mut().zip(&bins) {
            pool.extend(band.iter().map(|&b| spectrum[b].norm()));
        }
    }
    Ok(pools.iter().map(|p| variation_coefficient(p)).collect())
}

/// 1-based index of the smallest coefficient, ties to the lower subband.
/// `None` for an empty slice.
pub fn locate(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        let x = if x.is_nan() { f64::INFINITY } else { x };
        match best {
            Some((_, b)) if x >= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationEstimate {
    pub k: u32,
    /// 1-based subband with the lowest coefficient.
    pub subband: usize,
    pub v_values: Vec<f64>,
}

impl LocationEstimate {
    fn claim_strength(&self) -> f64 {
        self.v_values[self.subband - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub type_estimates: Vec<TypeVerdict>,
    pub location_estimates: Vec<LocationEstimate>,
    /// Numerology the identifier attributes to each subband; conflicting
    /// claims go to the numerology with the lower coefficient.
    pub assignment: Vec<Option<u32>>,
    pub type_correct: bool,
    pub location_correct: bool,
}

impl IdentificationResult {
    pub fn matched(&self) -> impl Iterator<Item = u32> + '_ {
        self.type_estimates.iter().filter(|v| v.matched).map(|v| v.k)
    }

    /// Numerology to demodulate `subband` with: its own assignment, else the
    /// assignment of the nearest assigned subband (lower index on ties).
    /// `None` if nothing was assigned anywhere.
    pub fn blind_numerology(&self, subband: usize) -> Option<u32> {
        let idx = subband.checked_sub(1)?;
        (0..self.assignment.len())
            .filter_map(|i| self.assignment[i].map(|k| (i.abs_diff(idx), i, k)))
            .min()
            .map(|(_, _, k)| k)
    }
}

/// Type identification over the plan's candidate set followed by location
/// identification for every matched candidate. Correctness flags compare the
/// outcome with the plan's ground truth.
pub fn identify(y: &[ComplexSample], plan: &ScenarioPlan) -> IdentificationResult {
    let type_estimates = estimate_type(y, &plan.candidates);

    let mut location_estimates = Vec::new();
    for verdict in type_estimates.iter().filter(|v| v.matched) {
        let Some(cand) = plan.candidate(verdict.k) else {
            continue;
        };
        let Ok(v_values) = variation_coefficients(y, cand, plan) else {
            continue;
        };
        if let Some(subband) = locate(&v_values) {
            location_estimates.push(LocationEstimate {
                k: verdict.k,
                subband,
                v_values,
            });
        }
    }

    let mut claims: Vec<&LocationEstimate> = location_estimates.iter().collect();
    claims.sort_by(|a, b| a.claim_strength().total_cmp(&b.claim_strength()));
    let mut assignment = vec![None; plan.n_subbands()];
    for claim in claims {
        let slot = &mut assignment[claim.subband - 1];
        if slot.is_none() {
            *slot = Some(claim.k);
        }
    }

    let type_correct = plan
        .users
        .iter()
        .all(|u| type_estimates.iter().any(|v| v.matched && v.k == u.config.k));
    let location_correct = plan
        .users
        .iter()
        .all(|u| assignment[u.allocation.subband - 1] == Some(u.config.k));

    IdentificationResult {
        type_estimates,
        location_estimates,
        assignment,
        type_correct,
        location_correct,
    }
}
