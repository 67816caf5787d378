use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quantum_domino::config::{load_config, ExperimentConfig};
use quantum_domino::gate::gate_check;
use quantum_domino::runner::{self, StateSelector};
use quantum_domino::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "domino", version, about = "Driven spin-chain polarization-wave simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (JSON, schema_version 1).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `outputs` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the validated config with defaults applied and exit.
    #[arg(long)]
    print_config: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<Option<(ExperimentConfig, PathBuf)>, Error> {
        let config = load_config(&self.config)?;
        if self.print_config {
            println!("{}", config.to_json());
            return Ok(None);
        }
        let out = self.out.clone().unwrap_or_else(|| config.outputs.clone());
        Ok(Some((config, out)))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the driven chain and write trajectories plus summary.json.
    Simulate {
        #[command(flatten)]
        common: ConfigArgs,
        /// Run both the triggered and untriggered variants.
        #[arg(long)]
        paired: bool,
        /// Incremented-length protocol `start:stop:steps` (seconds); writes sweep.csv.
        #[arg(long, value_name = "START:STOP:STEPS")]
        sweep_t_end: Option<String>,
    },
    /// Write stick and broadened spectra of a population state.
    Spectrum {
        #[command(flatten)]
        common: ConfigArgs,
        /// thermal | pseudopure | pseudopure_flipped | trajectory:<seconds>
        #[arg(long, default_value = "thermal")]
        state: String,
    },
    /// Print domino tones and the conditional-resonance table as JSON.
    Tones {
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Check the CNOT chain on random inputs.
    GateCheck {
        #[arg(long, short = 'n')]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate {
            common,
            paired,
            sweep_t_end,
        } => {
            let Some((config, out)) = common.load()? else {
                return Ok(0);
            };
            if let Some(range) = sweep_t_end {
                let t_ends = runner::parse_sweep(&range)?;
                let points = runner::sweep(&config, &t_ends, &out)?;
                eprintln!("wrote {} sweep points to {}", points.len(), out.join(runner::SWEEP_CSV).display());
                return Ok(0);
            }
            let output = runner::simulate(&config, paired, &out)?;
            println!("{}", serde_json::to_string_pretty(&output.summary).map_err(|e| Error::Json(e.to_string()))?);
            for f in &output.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Spectrum { common, state } => {
            let Some((config, out)) = common.load()? else {
                return Ok(0);
            };
            let selector: StateSelector = state.parse()?;
            let report = runner::spectrum(&config, selector, &out)?;
            println!("{} lines", report.sticks.lines.len());
            for (i, peaks) in report.multiplets.iter().enumerate() {
                let centers: Vec<String> = peaks.iter().map(|m| format!("{:.3}", m.center)).collect();
                println!("spin {}: {} peak(s) at [{}] Hz", i + 1, peaks.len(), centers.join(", "));
            }
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Tones { common } => {
            let Some((config, _)) = common.load()? else {
                return Ok(0);
            };
            let report = runner::tones(&config)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Json(e.to_string()))?);
        }
        Command::GateCheck { n, trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = gate_check(n, trials, &mut rng)?;
            println!(
                "N={} trials={} min_fidelity={:.17} max_polarization_error={:.3e}",
                report.n_spins, report.trials, report.min_fidelity, report.max_polarization_error
            );
            if report.min_fidelity < 1.0 - 1e-12 {
                eprintln!("gate check failed");
                return Ok(EXIT_NUMERICAL);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Accuracy { .. } => EXIT_NUMERICAL,
                e if e.is_validation() => EXIT_VALIDATION,
                _ => EXIT_FAILURE,
            })
        }
    }
}
