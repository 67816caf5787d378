//! Command implementations behind the `domino` binary. Each writes its
//! artifacts into an output directory and returns a report.

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::chain::{domino_tones, resonance_table, ResonanceEntry};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::propagator::{amplification_coefficient, evolve, flip_spin, sweep_t_end, SimParams, SweepPoint, Trajectory};
use crate::spectroscopy::{
    broadened_spectrum, flip_populations, pseudopure_ground, stick_spectrum, thermal_populations, Multiplet,
    PopulationVector, StickSpectrum,
};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub trigger: bool,
    pub amplification: f64,
    /// Time of the largest departure of the total polarization from t = 0.
    pub t_max_inversion: f64,
    /// 2π·a·t_max_inversion for a uniform drive amplitude a.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1_t: Option<f64>,
    pub initial_total: f64,
    pub min_total: f64,
    pub final_total: f64,
}

impl RunSummary {
    fn from_trajectory(traj: &Trajectory, trigger: bool, amplitude: Option<f64>) -> Self {
        let t_max_inversion = traj.time_of_max_change().unwrap_or(0.0);
        RunSummary {
            trigger,
            amplification: amplification_coefficient(traj),
            t_max_inversion,
            omega1_t: amplitude.map(|a| 2.0 * std::f64::consts::PI * a * t_max_inversion),
            initial_total: traj.total_polarization[0],
            min_total: traj.min_total(),
            final_total: *traj.total_polarization.last().unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub n_spins: usize,
    /// Taken from the triggered run when there is one.
    pub amplification: f64,
    pub t_max_inversion: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triggered: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub untriggered: Option<RunSummary>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub summary: SimulateSummary,
    pub triggered: Option<Trajectory>,
    pub untriggered: Option<Trajectory>,
    pub files: Vec<PathBuf>,
}

pub const TRIGGERED_CSV: &str = "trajectory_triggered.csv";
pub const UNTRIGGERED_CSV: &str = "trajectory_untriggered.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SWEEP_CSV: &str = "sweep.csv";

/// Runs the configured simulation; with `paired` both the triggered and the
/// untriggered variant, otherwise the one selected by `config.trigger`.
pub fn simulate(config: &ExperimentConfig, paired: bool, out_dir: &Path) -> Result<SimulateOutput> {
    let spec = &config.chain;
    let drive = config.drive_spec()?;
    let params = config.sim_params()?;
    let initial = config.initial_state()?;
    let amplitude = config.uniform_amplitude();
    fs::create_dir_all(out_dir)?;

    let run_triggered = paired || config.trigger;
    let run_untriggered = paired || !config.trigger;
    let mut files = Vec::new();

    let triggered = if run_triggered {
        let start = flip_spin(&initial, 1)?;
        let traj = evolve(&start, spec, &drive, &params)?;
        let path = out_dir.join(TRIGGERED_CSV);
        traj.write_csv(create(&path)?)?;
        files.push(path);
        Some(traj)
    } else {
        None
    };
    let untriggered = if run_untriggered {
        let traj = evolve(&initial, spec, &drive, &params)?;
        let path = out_dir.join(UNTRIGGERED_CSV);
        traj.write_csv(create(&path)?)?;
        files.push(path);
        Some(traj)
    } else {
        None
    };

    let t_summary = triggered.as_ref().map(|t| RunSummary::from_trajectory(t, true, amplitude));
    let u_summary = untriggered.as_ref().map(|t| RunSummary::from_trajectory(t, false, amplitude));
    let primary = t_summary.as_ref().or(u_summary.as_ref()).expect("at least one run");
    let summary = SimulateSummary {
        n_spins: spec.n_spins,
        amplification: primary.amplification,
        t_max_inversion: primary.t_max_inversion,
        triggered: t_summary.clone(),
        untriggered: u_summary.clone(),
    };
    let path = out_dir.join(SUMMARY_JSON);
    write_json(&path, &summary)?;
    files.push(path);

    Ok(SimulateOutput {
        summary,
        triggered,
        untriggered,
        files,
    })
}

/// Parses `start:stop:steps` into `steps` evenly spaced drive lengths
/// (inclusive of both ends).
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::validation("--sweep-t-end", format!("{msg} (expected start:stop:steps, got {text:?})"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(bad("wrong number of fields"));
    };
    let start: f64 = start.trim().parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad("stop is not a number"))?;
    let steps: usize = steps.trim().parse().map_err(|_| bad("steps is not a positive integer"))?;
    if !(start.is_finite() && stop.is_finite() && start >= 0.0 && stop >= start) {
        return Err(bad("need 0 <= start <= stop"));
    }
    match steps {
        0 => Err(bad("steps must be >= 1")),
        1 => Ok(vec![stop]),
        _ => Ok((0..steps)
            .map(|k| {
                if k == steps - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (steps - 1) as f64
                }
            })
            .collect()),
    }
}

/// Incremented-length protocol: one independent run per drive length.
/// Writes `sweep.csv` with the trajectory column layout.
pub fn sweep(config: &ExperimentConfig, t_ends: &[f64], out_dir: &Path) -> Result<Vec<SweepPoint>> {
    let drive = config.drive_spec()?;
    let params = config.sim_params()?;
    let mut start = config.initial_state()?;
    if config.trigger {
        start = flip_spin(&start, 1)?;
    }
    let points = sweep_t_end(&start, &config.chain, &drive, &params, t_ends)?;
    fs::create_dir_all(out_dir)?;
    let traj_like = Trajectory {
        times: points.iter().map(|p| p.t_end).collect(),
        per_spin_polarization: (0..config.chain.n_spins)
            .map(|i| points.iter().map(|p| p.per_spin[i]).collect())
            .collect(),
        total_polarization: points.iter().map(|p| p.total).collect(),
        final_state: start,
    };
    traj_like.write_csv(create(&out_dir.join(SWEEP_CSV))?)?;
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSelector {
    Thermal,
    Pseudopure,
    PseudopureFlipped,
    /// Populations |ψ(t)|² of the configured run at time t (seconds).
    FromTrajectory(f64),
}

impl FromStr for StateSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let time = |t: &str| -> Result<Self> {
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::validation("state", format!("bad time in {s:?}")))?;
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::validation("state", "time must be >= 0"));
            }
            Ok(StateSelector::FromTrajectory(t))
        };
        match s {
            "thermal" => Ok(StateSelector::Thermal),
            "pseudopure" => Ok(StateSelector::Pseudopure),
            "pseudopure_flipped" => Ok(StateSelector::PseudopureFlipped),
            _ => {
                if let Some(t) = s.strip_prefix("trajectory:") {
                    time(t)
                } else if let Some(t) = s.strip_prefix("from_trajectory(").and_then(|r| r.strip_suffix(')')) {
                    time(t)
                } else {
                    Err(Error::validation(
                        "state",
                        format!("unknown selector {s:?}; use thermal, pseudopure, pseudopure_flipped or trajectory:<t>"),
                    ))
                }
            }
        }
    }
}

impl fmt::Display for StateSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSelector::Thermal => write!(f, "thermal"),
            StateSelector::Pseudopure => write!(f, "pseudopure"),
            StateSelector::PseudopureFlipped => write!(f, "pseudopure_flipped"),
            StateSelector::FromTrajectory(t) => write!(f, "trajectory_{t}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub selector: String,
    pub sticks: StickSpectrum,
    /// Resolved peaks per spin (index 0 = spin 1).
    pub multiplets: Vec<Vec<Multiplet>>,
    pub files: Vec<PathBuf>,
}

pub fn selected_populations(config: &ExperimentConfig, selector: StateSelector) -> Result<PopulationVector> {
    let spec = &config.chain;
    match selector {
        StateSelector::Thermal => thermal_populations(spec),
        StateSelector::Pseudopure => pseudopure_ground(spec),
        StateSelector::PseudopureFlipped => flip_populations(&pseudopure_ground(spec)?, 1),
        StateSelector::FromTrajectory(t) => {
            let mut state = config.initial_state()?;
            if config.trigger {
                state = flip_spin(&state, 1)?;
            }
            if t > 0.0 {
                let base = config.sim_params()?;
                let params = SimParams::new(t, base.dt.min(t), usize::MAX, base.method)?;
                state = evolve(&state, spec, &config.drive_spec()?, &params)?.final_state;
            }
            Ok(PopulationVector::from_state(&state))
        }
    }
}

/// Writes `spectrum_<selector>_sticks.csv` and `spectrum_<selector>_broadened.csv`.
pub fn spectrum(config: &ExperimentConfig, selector: StateSelector, out_dir: &Path) -> Result<SpectrumReport> {
    let pops = selected_populations(config, selector)?;
    let sticks = stick_spectrum(&config.chain, &pops)?;
    let curve = broadened_spectrum(&sticks, config.spectrum.fwhm, &config.grid_for(&sticks))?;
    fs::create_dir_all(out_dir)?;
    let stick_path = out_dir.join(format!("spectrum_{selector}_sticks.csv"));
    let curve_path = out_dir.join(format!("spectrum_{selector}_broadened.csv"));
    sticks.write_csv(create(&stick_path)?)?;
    curve.write_csv(create(&curve_path)?)?;
    let multiplets = (1..=config.chain.n_spins)
        .map(|i| sticks.multiplet(i, config.spectrum.merge_within_hz))
        .collect();
    Ok(SpectrumReport {
        selector: selector.to_string(),
        sticks,
        multiplets,
        files: vec![stick_path, curve_path],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneReport {
    /// Tones for spins 2..N, Hz.
    pub domino_tones: Vec<f64>,
    pub resonances: Vec<ResonanceEntry>,
}

pub fn tones(config: &ExperimentConfig) -> Result<ToneReport> {
    Ok(ToneReport {
        domino_tones: domino_tones(&config.chain)?,
        resonances: resonance_table(&config.chain)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_parse() {
        assert_eq!("thermal".parse::<StateSelector>().unwrap(), StateSelector::Thermal);
        assert_eq!("pseudopure_flipped".parse::<StateSelector>().unwrap(), StateSelector::PseudopureFlipped);
        assert_eq!("trajectory:0.11".parse::<StateSelector>().unwrap(), StateSelector::FromTrajectory(0.11));
        assert_eq!("from_trajectory(0.5)".parse::<StateSelector>().unwrap(), StateSelector::FromTrajectory(0.5));
        assert!("excited".parse::<StateSelector>().is_err());
        assert!("trajectory:-1".parse::<StateSelector>().is_err());
    }

    #[test]
    fn sweep_ranges() {
        let points = parse_sweep("0:0.15:4").unwrap();
        for (p, want) in points.iter().zip([0.0, 0.05, 0.1, 0.15]) {
            assert!((p - want).abs() < 1e-15);
        }
        assert_eq!(points[3], 0.15);
        assert_eq!(parse_sweep("0:0.1:1").unwrap(), vec![0.1]);
        assert!(parse_sweep("0:0.1").is_err());
        assert!(parse_sweep("0.2:0.1:3").is_err());
        assert!(parse_sweep("0:0.1:0").is_err());
    }
}
