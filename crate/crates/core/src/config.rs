//! Experiment configuration files (JSON, `schema_version: 1`).
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "chain": { "n_spins": 2, "offsets": [-300.0, 200.0],
//!              "couplings": [[0.0, 40.0], [40.0, 0.0]], "coupling_form": "zz" },
//!   "drive": { "auto_domino": { "amplitude": 7.5 } },
//!   "sim": { "t_end": 0.15, "dt": 1e-5, "sample_every": 10, "method": "expm_midpoint" },
//!   "initial": "pseudopure_ground",
//!   "trigger": true,
//!   "outputs": "out",
//!   "spectrum": { "fwhm": 1.0 }
//! }
//! ```
//!
//! `drive` is either `{"harmonics": [{"frequency", "amplitude", "phase"}]}` or
//! `{"auto_domino": {"amplitude"}}`. `initial` is `"pseudopure_ground"` or
//! `{"basis": "1000"}`. Omitted `sim.dt` is filled by
//! [`default_dt`]; omitted phases are 0; omitted `spectrum.fwhm` is 1 Hz.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{domino_tones, ChainSpec, DriveSpec, Harmonic};
use crate::error::{Error, Result};
use crate::gate::basis_state;
use crate::propagator::{default_dt, Method, SimParams};
use crate::spectroscopy::{Grid, DEFAULT_FWHM};
use crate::state::StateVector;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveSource {
    Harmonics(Vec<Harmonic>),
    /// Tones from [`domino_tones`] with one shared amplitude in Hz.
    AutoDomino { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Pure-state counterpart of the pseudopure ground state: all spins up.
    PseudopureGround,
    Basis(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub sample_every: usize,
    #[serde(default)]
    pub method: Method,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_fwhm")]
    pub fwhm: f64,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_max: Option<f64>,
    /// Lines of one spin closer than this are counted as one peak.
    #[serde(default = "default_merge")]
    pub merge_within_hz: f64,
}

fn default_fwhm() -> f64 {
    DEFAULT_FWHM
}

fn default_points() -> usize {
    4001
}

fn default_merge() -> f64 {
    5.0
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            fwhm: default_fwhm(),
            n_points: default_points(),
            f_min: None,
            f_max: None,
            merge_within_hz: default_merge(),
        }
    }
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub chain: ChainSpec,
    pub drive: DriveSource,
    pub sim: SimSection,
    pub initial: InitialState,
    /// Flip spin 1 at t = 0.
    #[serde(default)]
    pub trigger: bool,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub spectrum: SpectrumSection,
}

fn within(prefix: &str, err: Error) -> Error {
    match err {
        Error::Validation { path, message } => Error::Validation {
            path: format!("{prefix}.{path}"),
            message,
        },
        other => other,
    }
}

impl ExperimentConfig {
    /// Parses JSON, validates, and fills defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation {
                path: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        config.validate()?;
        config.apply_defaults()?;
        Ok(config)
    }

    /// Canonical serialization; parses back to an identical config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        self.chain.validate().map_err(|e| within("chain", e))?;
        match &self.drive {
            DriveSource::Harmonics(h) => DriveSpec::new(h.clone()).validate().map_err(|e| within("drive", e))?,
            DriveSource::AutoDomino { amplitude } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::validation("drive.auto_domino.amplitude", "must be finite and >= 0"));
                }
                if self.chain.n_spins < 2 {
                    return Err(Error::validation("drive.auto_domino", "needs at least 2 spins"));
                }
                domino_tones(&self.chain).map_err(|e| within("drive.auto_domino", e))?;
            }
        }
        let sim = &self.sim;
        if !(sim.t_end.is_finite() && sim.t_end > 0.0) {
            return Err(Error::validation("sim.t_end", "must be finite and > 0"));
        }
        if let Some(dt) = sim.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::validation("sim.dt", "must be finite and > 0"));
            }
            if dt > sim.t_end {
                return Err(Error::validation("sim.dt", "must not exceed sim.t_end"));
            }
        }
        if sim.sample_every == 0 {
            return Err(Error::validation("sim.sample_every", "must be >= 1"));
        }
        if let InitialState::Basis(label) = &self.initial {
            let state = basis_state(label).map_err(|e| within("initial.basis", e))?;
            if state.n_spins() != self.chain.n_spins {
                return Err(Error::validation(
                    "initial.basis",
                    format!("label has {} spins, chain has {}", state.n_spins(), self.chain.n_spins),
                ));
            }
        }
        let sp = &self.spectrum;
        if !(sp.fwhm.is_finite() && sp.fwhm > 0.0) {
            return Err(Error::validation("spectrum.fwhm", "must be finite and > 0"));
        }
        if sp.n_points < 2 {
            return Err(Error::validation("spectrum.n_points", "must be >= 2"));
        }
        if let (Some(lo), Some(hi)) = (sp.f_min, sp.f_max) {
            if hi.is_nan() || lo.is_nan() || hi <= lo {
                return Err(Error::validation("spectrum.f_max", "must exceed spectrum.f_min"));
            }
        }
        if !(sp.merge_within_hz.is_finite() && sp.merge_within_hz >= 0.0) {
            return Err(Error::validation("spectrum.merge_within_hz", "must be finite and >= 0"));
        }
        Ok(())
    }

    fn apply_defaults(&mut self) -> Result<()> {
        if self.sim.dt.is_none() {
            let drive = self.drive_spec()?;
            let dt = default_dt(&self.chain, &drive).unwrap_or(self.sim.t_end / 1000.0);
            self.sim.dt = Some(dt.min(self.sim.t_end));
        }
        Ok(())
    }

    pub fn drive_spec(&self) -> Result<DriveSpec> {
        match &self.drive {
            DriveSource::Harmonics(h) => Ok(DriveSpec::new(h.clone())),
            DriveSource::AutoDomino { amplitude } => Ok(DriveSpec::from_tones(&domino_tones(&self.chain)?, *amplitude)),
        }
    }

    /// The shared drive amplitude when every harmonic has the same one.
    pub fn uniform_amplitude(&self) -> Option<f64> {
        match &self.drive {
            DriveSource::AutoDomino { amplitude } => Some(*amplitude),
            DriveSource::Harmonics(h) => {
                let first = h.first()?.amplitude;
                h.iter().all(|x| x.amplitude == first).then_some(first)
            }
        }
    }

    pub fn sim_params(&self) -> Result<SimParams> {
        let dt = self.sim.dt.ok_or_else(|| Error::validation("sim.dt", "unresolved"))?;
        SimParams::new(self.sim.t_end, dt, self.sim.sample_every, self.sim.method).map_err(|e| within("sim", e))
    }

    /// Initial pure state before any trigger flip.
    pub fn initial_state(&self) -> Result<StateVector> {
        match &self.initial {
            InitialState::PseudopureGround => basis_state(&"0".repeat(self.chain.n_spins)),
            InitialState::Basis(label) => basis_state(label),
        }
    }

    pub fn grid_for(&self, sticks: &crate::spectroscopy::StickSpectrum) -> Grid {
        let auto = Grid::around(sticks, self.spectrum.fwhm, self.spectrum.n_points);
        Grid {
            f_min: self.spectrum.f_min.unwrap_or(auto.f_min),
            f_max: self.spectrum.f_max.unwrap_or(auto.f_max),
            n_points: self.spectrum.n_points,
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "chain": {"n_spins": 2, "offsets": [-300.0, 200.0], "couplings": [[0.0, 40.0], [40.0, 0.0]]},
        "drive": {"auto_domino": {"amplitude": 7.5}},
        "sim": {"t_end": 0.1},
        "initial": "pseudopure_ground"
    }"#;

    fn with(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn error_path(text: &str) -> String {
        match ExperimentConfig::from_json(text) {
            Err(Error::Validation { path, .. }) => path,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.sim.dt, Some(1.0 / (50.0 * 300.0)));
        assert_eq!(c.sim.sample_every, 1);
        assert_eq!(c.sim.method, Method::ExpmMidpoint);
        assert_eq!(c.spectrum.fwhm, 1.0);
        assert!(!c.trigger);
        assert_eq!(c.drive_spec().unwrap().harmonics, vec![Harmonic::new(200.0 - 20.0, 7.5)]);
    }

    #[test]
    fn round_trip_is_identical() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let text = c.to_json();
        let again = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_json());
    }

    #[test]
    fn negative_dt_names_field() {
        assert_eq!(error_path(&with(|v| v["sim"]["dt"] = (-1e-5).into())), "sim.dt");
    }

    #[test]
    fn asymmetric_couplings_rejected() {
        let text = with(|v| v["chain"]["couplings"][0][1] = 41.0.into());
        assert_eq!(error_path(&text), "chain.couplings[0][1]");
    }

    #[test]
    fn parse_errors_carry_paths() {
        assert_eq!(error_path(&with(|v| v["sim"]["t_end"] = "soon".into())), "sim.t_end");
        assert_eq!(error_path(&with(|v| v["sim"]["bogus"] = 1.into())), "sim.bogus");
        assert_eq!(error_path(&with(|v| v["drive"] = serde_json::json!({"auto_domino": {}}))), "drive.auto_domino");
        assert_eq!(error_path(&with(|v| v["schema_version"] = 2.into())), "schema_version");
    }

    #[test]
    fn basis_initial_must_match_chain() {
        let text = with(|v| v["initial"] = serde_json::json!({"basis": "100"}));
        assert_eq!(error_path(&text), "initial.basis");
        let text = with(|v| v["initial"] = serde_json::json!({"basis": "10"}));
        let c = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(c.initial_state().unwrap(), basis_state("10").unwrap());
    }

    #[test]
    fn explicit_harmonics_default_phase() {
        let text = with(|v| v["drive"] = serde_json::json!({"harmonics": [{"frequency": 10.0, "amplitude": 2.0}]}));
        let c = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(c.drive_spec().unwrap().harmonics[0].phase, 0.0);
        let bad = with(|v| v["drive"] = serde_json::json!({"harmonics": [{"frequency": 10.0, "amplitude": -2.0}]}));
        assert_eq!(error_path(&bad), "drive.harmonics[0].amplitude");
    }
}
