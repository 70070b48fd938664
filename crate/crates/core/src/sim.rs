//! Monte-Carlo driver: configuration, per-trial pipeline, parallel sweeps and
//! result files.
//!
//! Every trial draws from its own ChaCha8 stream keyed by the master seed,
//! the SNR point index and the trial index, so a sweep's output does not
//! depend on how trials are scheduled across worker threads.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blind_id::{identify, IdentificationResult};
use crate::channel::{add_awgn, apply_channel, bit_energy, combine_users, draw_rayleigh_channel, PowerDelayProfile};
use crate::metrics::{SweepRow, Tally, TrialOutcome};
use crate::numerology::{subband_allocation, validate_scenario, BaseParams, ScenarioPlan, MAX_FRAME_LEN};
use crate::receiver::{demodulate_report, DemodMode};
use crate::waveform::{assemble_user_frames, ComplexSample};
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "snr_db,trials,type_rate,loc_rate,joint_rate,ber_blind,ber_nonblind,ber_awgn_theory,ber_rayleigh_theory";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioPreset {
    /// 15 kHz in subband 1, 30 kHz in subband 2.
    Scenario1,
    /// 15 kHz in subband 1, 60 kHz in subband 2.
    Scenario2,
}

impl ScenarioPreset {
    pub fn users(self) -> Vec<UserEntry> {
        let k2 = match self {
            ScenarioPreset::Scenario1 => 1,
            ScenarioPreset::Scenario2 => 2,
        };
        vec![UserEntry { k: 0, subband: 1 }, UserEntry { k: k2, subband: 2 }]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub k: u32,
    pub subband: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    Preset(ScenarioPreset),
    Users(Vec<UserEntry>),
}

impl ScenarioSpec {
    pub fn users(&self) -> Vec<UserEntry> {
        match self {
            ScenarioSpec::Preset(p) => p.users(),
            ScenarioSpec::Users(u) => u.clone(),
        }
    }
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Preset(ScenarioPreset::Scenario1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    #[default]
    Awgn,
    /// Block Rayleigh fading per user with the configured delay profile,
    /// followed by AWGN.
    Rayleigh,
}

/// Which receivers a sweep runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeFlags {
    #[default]
    Both,
    Blind,
    NonBlind,
}

impl ModeFlags {
    pub fn blind(self) -> bool {
        matches!(self, ModeFlags::Both | ModeFlags::Blind)
    }

    pub fn non_blind(self) -> bool {
        matches!(self, ModeFlags::Both | ModeFlags::NonBlind)
    }
}

/// File names written inside the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: String,
    pub sidecar: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            csv: "results.csv".into(),
            sidecar: "config.json".into(),
        }
    }
}

/// -10 to 20 dB in 2 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (0..16).map(|i| -10.0 + 2.0 * f64::from(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioSpec,
    pub base: BaseParams,
    pub channel: ChannelKind,
    /// Tap powers for the Rayleigh channel; the built-in nine-tap profile
    /// when absent.
    pub pdp: Option<PowerDelayProfile>,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Candidate numerologies for the identifier; the numerologies in use,
    /// ordered by subband, when absent.
    pub candidates: Option<Vec<u32>>,
    /// Frames per capture.
    pub frames: usize,
    pub mode: ModeFlags,
    pub output: OutputPaths,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSpec::default(),
            base: BaseParams::default(),
            channel: ChannelKind::default(),
            pdp: None,
            snr_db: default_snr_grid(),
            trials: 10_000,
            seed: 1,
            candidates: None,
            frames: 1,
            mode: ModeFlags::default(),
            output: OutputPaths::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 || self.trials > u64::from(u32::MAX) {
            return Err(Error::Config(format!(
                "trials must be in 1..={}, got {}",
                u32::MAX,
                self.trials
            )));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("snr grid is empty".into()));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("snr point {s} is not finite")));
        }
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        for name in [&self.output.csv, &self.output.sidecar] {
            let p = Path::new(name);
            if name.is_empty() || p.components().count() != 1 || p.file_name().is_none() {
                return Err(Error::Config(format!("output name {name:?} is not a plain file name")));
            }
        }
        if self.output.csv == self.output.sidecar {
            return Err(Error::Config("csv and sidecar names coincide".into()));
        }
        Ok(())
    }
}

/// Position of one trial inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialId {
    pub snr_index: u32,
    pub index: u64,
}

impl TrialId {
    pub fn stream(self) -> u64 {
        (u64::from(self.snr_index) << 32) | (self.index & 0xffff_ffff)
    }
}

/// Everything one trial puts on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignal {
    /// Received composite after channel and noise.
    pub received: Vec<ComplexSample>,
    /// Payload bits per user, in declaration order.
    pub bits: Vec<Vec<bool>>,
    /// Channel taps per user; empty under AWGN.
    pub taps: Vec<Vec<ComplexSample>>,
    pub noise_sigma2: f64,
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    plan: ScenarioPlan,
    pdp: PowerDelayProfile,
}

impl Simulation {
    pub fn new(mut config: SimConfig) -> Result<Self> {
        config.check()?;
        let users: Vec<(u32, usize)> = config.scenario.users().iter().map(|u| (u.k, u.subband)).collect();
        let mut plan = validate_scenario(&users, &config.base)?;
        if !plan
            .frame_len
            .checked_mul(config.frames)
            .is_some_and(|n| n <= MAX_FRAME_LEN)
        {
            return Err(Error::Config(format!(
                "{} frames exceed {MAX_FRAME_LEN} samples per capture",
                config.frames
            )));
        }
        if let Some(ks) = &config.candidates {
            plan = plan.with_candidates(ks)?;
        }
        config.candidates = Some(plan.candidates.iter().map(|c| c.k).collect());
        let pdp = config.pdp.clone().unwrap_or_default();
        if config.channel == ChannelKind::Rayleigh {
            config.pdp = Some(pdp.clone());
        }
        Ok(Self { config, plan, pdp })
    }

    /// The configuration with every default made explicit.
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn plan(&self) -> &ScenarioPlan {
        &self.plan
    }

    pub fn rng(&self, id: TrialId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(id.stream());
        rng
    }

    fn capture_len(&self) -> usize {
        self.plan.frame_len * self.config.frames
    }

    /// Transmit, channel and noise for one trial. `f64::INFINITY` gives a
    /// noiseless capture.
    pub fn synthesize(&self, snr_db: f64, id: TrialId) -> Result<TrialSignal> {
        let mut rng = self.rng(id);
        let frames = self.config.frames;
        let mut tx = Vec::with_capacity(self.plan.users.len());
        let mut rx = Vec::with_capacity(self.plan.users.len());
        let mut bits = Vec::with_capacity(self.plan.users.len());
        let mut taps = Vec::new();
        for u in &self.plan.users {
            let payload: Vec<bool> = (0..frames * u.config.bits_per_frame()).map(|_| rng.random()).collect();
            let frame = assemble_user_frames(&payload, &u.config, &u.allocation, frames)?;
            match self.config.channel {
                ChannelKind::Awgn => rx.push(frame.samples.clone()),
                ChannelKind::Rayleigh => {
                    let h = draw_rayleigh_channel(&self.pdp, &mut rng);
                    rx.push(apply_channel(&frame.samples, &h));
                    taps.push(h);
                }
            }
            tx.push(frame.samples);
            bits.push(payload);
        }
        let total_bits: usize = bits.iter().map(Vec::len).sum();
        let eb = bit_energy(&combine_users(&tx)?, total_bits);
        let mut received = combine_users(&rx)?;
        let noise_sigma2 = add_awgn(&mut received, snr_db, eb, &mut rng)?;
        Ok(TrialSignal {
            received,
            bits,
            taps,
            noise_sigma2,
        })
    }

    /// Runs one trial end to end. Both receivers see the same capture.
    pub fn run_trial(&self, snr_db: f64, id: TrialId) -> Result<TrialOutcome> {
        self.run_trial_detailed(snr_db, id)
            .map(|(o, _)| o)
            .map_err(|e| Error::Trial {
                snr_db,
                trial: id.index,
                source: Box::new(e),
            })
    }

    /// Like [`Simulation::run_trial`], also returning the identifier output
    /// when the blind receiver ran.
    pub fn run_trial_detailed(&self, snr_db: f64, id: TrialId) -> Result<(TrialOutcome, Option<IdentificationResult>)> {
        let signal = self.synthesize(snr_db, id)?;
        debug_assert_eq!(signal.received.len(), self.capture_len());
        let y = &signal.received;
        let taps = |i: usize| signal.taps.get(i).map(Vec::as_slice);
        let mut outcome = TrialOutcome {
            snr_index: id.snr_index,
            trial_index: id.index,
            stream: id.stream(),
            type_correct: None,
            location_correct: None,
            bit_errors_blind: None,
            bit_errors_nonblind: None,
            total_bits: signal.bits.iter().map(|b| b.len() as u64).sum(),
        };

        if self.config.mode.non_blind() {
            let mut errors = 0;
            for (i, u) in self.plan.users.iter().enumerate() {
                let r = demodulate_report(
                    y,
                    &u.config,
                    &u.allocation,
                    taps(i),
                    DemodMode::NonBlind,
                    &signal.bits[i],
                )?;
                errors += r.bit_errors as u64;
            }
            outcome.bit_errors_nonblind = Some(errors);
        }

        let mut identification = None;
        if self.config.mode.blind() {
            let result = identify(y, &self.plan);
            let fallback = self.plan.candidates[0].k;
            let n_subbands = self.plan.n_subbands();
            let mut errors = 0;
            for (i, u) in self.plan.users.iter().enumerate() {
                let subband = u.allocation.subband;
                let k = result.blind_numerology(subband).unwrap_or(fallback);
                let config = self.plan.candidate(k).expect("identifier only reports candidates");
                let allocation =
                    subband_allocation(u.allocation.user_index, subband, n_subbands, config, &self.plan.base)?;
                let r = demodulate_report(y, config, &allocation, taps(i), DemodMode::Blind, &signal.bits[i])?;
                errors += r.bit_errors as u64;
            }
            outcome.type_correct = Some(result.type_correct);
            outcome.location_correct = Some(result.location_correct);
            outcome.bit_errors_blind = Some(errors);
            identification = Some(result);
        }
        Ok((outcome, identification))
    }

    /// All trials at one SNR point folded into a row.
    pub fn run_point(&self, snr_index: usize) -> Result<SweepRow> {
        let snr_db = self.config.snr_db[snr_index];
        let snr_index = u32::try_from(snr_index).map_err(|_| Error::Config("snr grid too long".into()))?;
        let tally = (0..self.config.trials)
            .into_par_iter()
            .try_fold(Tally::default, |mut t, index| {
                let o = self.run_trial(snr_db, TrialId { snr_index, index })?;
                t.record(&o);
                Ok::<_, Error>(t)
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        Ok(tally.row(snr_db))
    }

    /// One row per SNR point. `jobs` bounds the worker threads; the result
    /// is the same for every value.
    pub fn run_sweep(&self, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            builder = builder.num_threads(j.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..self.config.snr_db.len()).map(|i| self.run_point(i)).collect())
    }
}

/// CSV text for `rows`, header included.
pub fn format_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.trials,
            r.type_success_rate,
            r.location_success_rate,
            r.joint_success_rate,
            r.ber_blind,
            r.ber_nonblind,
            r.ber_theory_awgn,
            r.ber_theory_rayleigh
        );
    }
    out
}

/// Parses text produced by [`format_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Input("csv header does not match".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::Input(format!("csv line {}: {what}", i + 2));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(bad("expected 9 fields"));
            }
            let f = |j: usize| fields[j].parse::<f64>().map_err(|_| bad(fields[j]));
            Ok(SweepRow {
                snr_db: f(0)?,
                trials: fields[1].parse().map_err(|_| bad(fields[1]))?,
                type_success_rate: f(2)?,
                location_success_rate: f(3)?,
                joint_success_rate: f(4)?,
                ber_blind: f(5)?,
                ber_nonblind: f(6)?,
                ber_theory_awgn: f(7)?,
                ber_theory_rayleigh: f(8)?,
            })
        })
        .collect()
}

/// Writes the CSV and the resolved-config sidecar into `dir`, creating it
/// if needed. Returns both paths.
pub fn emit_results(rows: &[SweepRow], config: &SimConfig, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if rows.is_empty() {
        return Err(Error::Input("no rows to write".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(&config.output.csv);
    let sidecar = dir.join(&config.output.sidecar);
    fs::write(&csv, format_csv(rows)).map_err(|e| Error::io(&csv, e))?;
    let mut json = config.to_json()?;
    json.push('\n');
    fs::write(&sidecar, json).map_err(|e| Error::io(&sidecar, e))?;
    Ok((csv, sidecar))
}
