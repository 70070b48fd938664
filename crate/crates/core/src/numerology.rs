//! Scalable numerology algebra and multi-user subband layouts.
//!
//! Every numerology is derived from a reference (`k = 0`) parameter set by
//! powers of two: the subcarrier spacing doubles and the FFT size halves with
//! each step of `k`, so the sampling rate `delta_f * n_fft` is shared by all
//! numerologies built from one base. Users share the system band in equal
//! subbands; each user's active subcarriers sit centred in its subband with
//! the remainder split evenly into guard bands on either side.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest reference FFT size accepted.
pub const MAX_FFT_SIZE: usize = 1 << 24;
/// Upper bound on frame length in samples.
pub const MAX_FRAME_LEN: usize = 1 << 32;

/// Cyclic prefix length as a fraction of the data duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpRatio {
    pub num: u32,
    pub den: u32,
}

impl CpRatio {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    fn validate(self) -> Result<()> {
        if self.den == 0 || self.num == 0 || self.num >= self.den {
            return Err(Error::Param(format!(
                "cp ratio {}/{} must lie strictly between 0 and 1",
                self.num, self.den
            )));
        }
        Ok(())
    }
}

impl Default for CpRatio {
    fn default() -> Self {
        Self::new(1, 16)
    }
}

/// Parameters of the reference numerology plus the frame budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseParams {
    pub delta_f0_hz: f64,
    pub n_fft0: usize,
    pub m_active0: usize,
    pub cp_ratio: CpRatio,
    /// Reference-numerology symbols per frame.
    pub frame_symbol_budget: usize,
}

impl Default for BaseParams {
    fn default() -> Self {
        Self {
            delta_f0_hz: 15_000.0,
            n_fft0: 4096,
            m_active0: 1024,
            cp_ratio: CpRatio::default(),
            frame_symbol_budget: 1,
        }
    }
}

impl BaseParams {
    /// Sampling rate shared by every numerology derived from this base.
    pub fn sample_rate_hz(&self) -> f64 {
        self.delta_f0_hz * self.n_fft0 as f64
    }

    /// Samples in one frame: `frame_symbol_budget` reference symbols with CP.
    /// Saturates instead of overflowing for parameters that fail validation.
    pub fn frame_len(&self) -> usize {
        let n_cp0 = self
            .n_fft0
            .saturating_mul(self.cp_ratio.num as usize)
            .checked_div(self.cp_ratio.den as usize)
            .unwrap_or(usize::MAX);
        self.frame_symbol_budget
            .saturating_mul(self.n_fft0.saturating_add(n_cp0))
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta_f0_hz.is_finite() && self.delta_f0_hz > 0.0) {
            return Err(Error::Param(format!(
                "base subcarrier spacing {} Hz must be positive",
                self.delta_f0_hz
            )));
        }
        if !self.n_fft0.is_power_of_two() || self.n_fft0 > MAX_FFT_SIZE {
            return Err(Error::Param(format!(
                "base FFT size {} is not a power of two up to {MAX_FFT_SIZE}",
                self.n_fft0
            )));
        }
        if self.m_active0 == 0 || self.m_active0 > self.n_fft0 {
            return Err(Error::Param(format!(
                "base active subcarriers {} must be in 1..={}",
                self.m_active0, self.n_fft0
            )));
        }
        if self.frame_symbol_budget == 0 {
            return Err(Error::Param("frame symbol budget must be at least 1".into()));
        }
        self.cp_ratio.validate()?;
        let fits = (self.n_fft0 * 2)
            .checked_mul(self.frame_symbol_budget)
            .is_some_and(|n| n <= MAX_FRAME_LEN);
        if !fits {
            return Err(Error::Param(format!(
                "a frame of {} symbols of {} samples exceeds {MAX_FRAME_LEN} samples",
                self.frame_symbol_budget, self.n_fft0
            )));
        }
        Ok(())
    }
}

/// Derived parameters of one numerology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumerologyConfig {
    pub k: u32,
    pub delta_f_hz: f64,
    pub n_fft: usize,
    pub n_cp: usize,
    pub m_active: usize,
    pub t_data: f64,
    pub t_cp: f64,
    pub t_ofdm: f64,
    pub symbols_per_frame: usize,
}

impl NumerologyConfig {
    /// Samples per CP-extended symbol.
    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.n_cp
    }

    pub fn frame_len(&self) -> usize {
        self.symbols_per_frame * self.symbol_len()
    }

    pub fn bits_per_frame(&self) -> usize {
        self.symbols_per_frame * self.m_active
    }
}

/// Derives numerology `k` from `base`.
pub fn derive_numerology(k: u32, base: &BaseParams) -> Result<NumerologyConfig> {
    base.validate()?;
    let scale = 1usize
        .checked_shl(k)
        .filter(|s| *s <= base.n_fft0 && base.n_fft0.is_multiple_of(*s))
        .ok_or_else(|| Error::Param(format!("2^{k} does not divide the base FFT size {}", base.n_fft0)))?;
    let n_fft = base.n_fft0 / scale;
    let cp = base.cp_ratio;
    if !(n_fft * cp.num as usize).is_multiple_of(cp.den as usize) {
        return Err(Error::Param(format!(
            "CP length {}/{} x {n_fft} is not an integer",
            cp.num, cp.den
        )));
    }
    let n_cp = n_fft * cp.num as usize / cp.den as usize;
    if !base.m_active0.is_multiple_of(scale) {
        return Err(Error::Param(format!(
            "active subcarriers {} are not divisible by 2^{k}",
            base.m_active0
        )));
    }
    let m_active = base.m_active0 / scale;

    let delta_f_hz = base.delta_f0_hz * scale as f64;
    let t_data = 1.0 / delta_f_hz;
    let t_cp = cp.value() * t_data;
    Ok(NumerologyConfig {
        k,
        delta_f_hz,
        n_fft,
        n_cp,
        m_active,
        t_data,
        t_cp,
        t_ofdm: t_data + t_cp,
        symbols_per_frame: scale * base.frame_symbol_budget,
    })
}

/// Frequency placement of one user's active subcarriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandAllocation {
    /// 1-based user index.
    pub user_index: usize,
    /// 1-based subband position, counted from the lowest frequency.
    pub subband: usize,
    /// DC-centred index of the first active subcarrier at the user's own
    /// granularity; negative values lie below DC.
    pub first_active_subcarrier: i64,
    pub m_active: usize,
    /// Guard subcarriers on each side of the active block.
    pub guard: usize,
    pub band_start_hz: f64,
    pub band_width_hz: f64,
}

impl SubbandAllocation {
    /// Active subcarriers in standard FFT order for an `n_fft`-point transform.
    pub fn active_bins(&self, n_fft: usize) -> impl Iterator<Item = usize> + '_ {
        let n = n_fft as i64;
        (0..self.m_active as i64).map(move |i| (self.first_active_subcarrier + i).rem_euclid(n) as usize)
    }
}

/// Places `config`'s active subcarriers centred in subband `subband` of
/// `n_subbands` equal-width subbands.
pub fn subband_allocation(
    user_index: usize,
    subband: usize,
    n_subbands: usize,
    config: &NumerologyConfig,
    base: &BaseParams,
) -> Result<SubbandAllocation> {
    if n_subbands == 0 || subband == 0 || subband > n_subbands {
        return Err(Error::Allocation(format!("subband {subband} outside 1..={n_subbands}")));
    }
    if !config.n_fft.is_multiple_of(n_subbands) {
        return Err(Error::Allocation(format!(
            "{} subcarriers cannot be split into {n_subbands} equal subbands",
            config.n_fft
        )));
    }
    let width = config.n_fft / n_subbands;
    if config.m_active > width {
        return Err(Error::Allocation(format!(
            "{} active subcarriers exceed the {width}-subcarrier subband",
            config.m_active
        )));
    }
    if !(width - config.m_active).is_multiple_of(2) {
        return Err(Error::Allocation(format!(
            "guard of {} subcarriers cannot be split evenly",
            width - config.m_active
        )));
    }
    let guard = (width - config.m_active) / 2;
    let subband_start = -(config.n_fft as i64) / 2 + ((subband - 1) * width) as i64;

    let bandwidth = base.sample_rate_hz();
    let band_width_hz = bandwidth / n_subbands as f64;
    Ok(SubbandAllocation {
        user_index,
        subband,
        first_active_subcarrier: subband_start + guard as i64,
        m_active: config.m_active,
        guard,
        band_start_hz: -bandwidth / 2.0 + (subband - 1) as f64 * band_width_hz,
        band_width_hz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub config: NumerologyConfig,
    pub allocation: SubbandAllocation,
}

/// A validated multi-user layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPlan {
    pub base: BaseParams,
    /// Users in the order they were declared.
    pub users: Vec<UserSpec>,
    /// Candidate numerologies tried by the identifier.
    pub candidates: Vec<NumerologyConfig>,
    pub frame_len: usize,
    pub cp_ratio: CpRatio,
}

impl ScenarioPlan {
    pub fn n_subbands(&self) -> usize {
        self.users.len()
    }

    pub fn user_at(&self, subband: usize) -> Option<&UserSpec> {
        self.users.iter().find(|u| u.allocation.subband == subband)
    }

    /// Payload bits carried by one frame across all users.
    pub fn bits_per_frame(&self) -> usize {
        self.users.iter().map(|u| u.config.bits_per_frame()).sum()
    }

    pub fn candidate(&self, k: u32) -> Option<&NumerologyConfig> {
        self.candidates.iter().find(|c| c.k == k)
    }

    /// Replaces the candidate set. It must contain every numerology in use
    /// and each candidate must tile every subband at its own granularity.
    pub fn with_candidates(mut self, ks: &[u32]) -> Result<Self> {
        if ks.is_empty() {
            return Err(Error::Scenario("candidate set is empty".into()));
        }
        let mut candidates = Vec::with_capacity(ks.len());
        for &k in ks {
            if candidates.iter().any(|c: &NumerologyConfig| c.k == k) {
                return Err(Error::Scenario(format!("candidate k={k} listed twice")));
            }
            let config = derive_numerology(k, &self.base)?;
            for subband in 1..=self.n_subbands() {
                subband_allocation(0, subband, self.n_subbands(), &config, &self.base)?;
            }
            candidates.push(config);
        }
        if let Some(u) = self
            .users
            .iter()
            .find(|u| !candidates.iter().any(|c| c.k == u.config.k))
        {
            return Err(Error::Scenario(format!(
                "candidate set omits k={} used by user {}",
                u.config.k, u.allocation.user_index
            )));
        }
        self.candidates = candidates;
        Ok(self)
    }
}

/// Builds a plan from `(k, subband)` pairs, one per user.
///
/// Subband positions must be a permutation of `1..=U`. The candidate set
/// defaults to the numerologies in use ordered by subband position.
pub fn validate_scenario(users: &[(u32, usize)], base: &BaseParams) -> Result<ScenarioPlan> {
    if users.is_empty() {
        return Err(Error::Scenario("at least one user is required".into()));
    }
    let n_subbands = users.len();
    let mut seen = vec![false; n_subbands];
    for (i, &(k, subband)) in users.iter().enumerate() {
        if subband == 0 || subband > n_subbands {
            return Err(Error::Scenario(format!(
                "user {} requests subband {subband} outside 1..={n_subbands}",
                i + 1
            )));
        }
        if std::mem::replace(&mut seen[subband - 1], true) {
            return Err(Error::Scenario(format!(
                "subband {subband} is assigned to more than one user"
            )));
        }
        if users[..i].iter().any(|&(other, _)| other == k) {
            return Err(Error::Scenario(format!(
                "numerology k={k} is used by more than one user"
            )));
        }
    }

    base.validate()?;
    let frame_len = base.frame_len();
    let mut specs = Vec::with_capacity(n_subbands);
    for (i, &(k, subband)) in users.iter().enumerate() {
        let config = derive_numerology(k, base)?;
        if config.frame_len() != frame_len {
            return Err(Error::Scenario(format!(
                "numerology k={k} fills {} samples, frame is {frame_len}",
                config.frame_len()
            )));
        }
        let allocation = subband_allocation(i + 1, subband, n_subbands, &config, base)?;
        specs.push(UserSpec { config, allocation });
    }

    let mut by_position: Vec<&UserSpec> = specs.iter().collect();
    by_position.sort_by_key(|u| u.allocation.subband);
    let ks: Vec<u32> = by_position.iter().map(|u| u.config.k).collect();

    let plan = ScenarioPlan {
        base: base.clone(),
        users: specs,
        candidates: Vec::new(),
        frame_len,
        cp_ratio: base.cp_ratio,
    };
    plan.with_candidates(&ks)
}
