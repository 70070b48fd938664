use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use numid_core::iq::{classify_iq_file, encode_iq, parse_base_params, parse_candidates, IqFormat};
use numid_core::sim::{emit_results, ScenarioPreset, ScenarioSpec, SimConfig, Simulation, TrialId};

#[derive(Parser)]
#[command(
    name = "numid",
    version,
    about = "Blind numerology identification for mixed-numerology OFDM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write the CSV and resolved config.
    Sweep {
        /// TOML or JSON (by extension) simulation config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Trials per SNR point.
        #[arg(long)]
        trials: Option<u64>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; all available cores by default.
        #[arg(long)]
        jobs: Option<usize>,
        /// Frames per capture.
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Run the identifier on an interleaved IQ capture.
    Classify {
        /// Capture file.
        #[arg(long = "in")]
        input: PathBuf,
        /// f32le or i16le.
        #[arg(long)]
        format: IqFormat,
        /// Base parameters, e.g. `df0=15000,n0=4096,m0=1024,cp=1/16,budget=1`.
        #[arg(long, default_value = "default")]
        base: String,
        /// Candidate numerologies, one per subband in band order.
        #[arg(long, default_value = "0,1")]
        candidates: String,
        /// Also write the JSON report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write one simulated capture as an IQ file.
    Synth {
        /// Capture file to write.
        #[arg(long)]
        out: PathBuf,
        /// f32le or i16le.
        #[arg(long)]
        format: IqFormat,
        /// Config to take the scenario, channel and base from.
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
        /// scenario1 or scenario2.
        #[arg(long, default_value = "scenario1")]
        scenario: String,
        /// SNR in dB; `inf` for a noiseless capture.
        #[arg(long, default_value = "inf")]
        snr: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trial index selecting the random stream.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            trials,
            seed,
            jobs,
            frames,
        } => {
            let mut cfg = SimConfig::from_path(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(f) = frames {
                cfg.frames = f;
            }
            let sim = Simulation::new(cfg)?;
            let rows = sim.run_sweep(jobs)?;
            let (csv, sidecar) = emit_results(&rows, sim.config(), &out)?;
            for r in &rows {
                println!(
                    "{:>6} dB  joint {:.4}  ber blind {:.3e}  non-blind {:.3e}",
                    r.snr_db, r.joint_success_rate, r.ber_blind, r.ber_nonblind
                );
            }
            println!("wrote {} and {}", csv.display(), sidecar.display());
        }
        Command::Classify {
            input,
            format,
            base,
            candidates,
            json,
        } => {
            let base = parse_base_params(&base)?;
            let candidates = parse_candidates(&candidates)?;
            let report = classify_iq_file(&input, format, &base, &candidates)?;
            let text = report.to_json()?;
            print!("{}", report.to_text());
            println!("{text}");
            if let Some(path) = json {
                std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Synth {
            out,
            format,
            config,
            scenario,
            snr,
            seed,
            index,
        } => {
            let mut cfg = match config {
                Some(p) => SimConfig::from_path(&p)?,
                None => {
                    let preset = match scenario.as_str() {
                        "scenario1" => ScenarioPreset::Scenario1,
                        "scenario2" => ScenarioPreset::Scenario2,
                        other => anyhow::bail!("unknown scenario {other:?}"),
                    };
                    SimConfig {
                        scenario: ScenarioSpec::Preset(preset),
                        ..SimConfig::default()
                    }
                }
            };
            cfg.seed = seed;
            let sim = Simulation::new(cfg)?;
            let signal = sim.synthesize(snr, TrialId { snr_index: 0, index })?;
            std::fs::write(&out, encode_iq(&signal.received, format))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} samples to {}", signal.received.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
