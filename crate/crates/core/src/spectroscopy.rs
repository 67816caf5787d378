//! Population-state models and linear-response stick spectra.
//!
//! # Sign conventions
//!
//! Deviation populations follow the linear high-temperature expansion
//! p_b ∝ −⟨b|H_static|b⟩, normalized so max |p| = 1. Lower energy means larger
//! population; only ratios are meaningful.
//!
//! Each stick belongs to one spin-flip pair and is assigned `from` = the state
//! with the flipped spin up, `to` = the same state with it down. Its
//! `frequency` is (E_from − E_to)/2π, which is exactly
//! [`conditional_resonance`](crate::chain::conditional_resonance) for that spin
//! and partner configuration. Its intensity is p_from − p_to (the σˣ matrix
//! element is 1).
//!
//! When up is the ground state (negative offsets in the rotating frame), the
//! physical absorption frequency of a line is −`frequency`. Spectra are drawn
//! in NMR convention, absorption frequency increasing to the left, so the
//! stick `frequency` axis increases to the right: a line whose `frequency`
//! decreases moves left. CSV files store plain `frequency` in Hz.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain::{build_static_hamiltonian, check_spin, spin_mask, ChainSpec, CouplingForm};
use crate::error::{Error, Result};
use crate::state::{basis_label, StateVector};

/// Lines with smaller |intensity| are dropped.
pub const INTENSITY_THRESHOLD: f64 = 1e-12;

pub const DEFAULT_FWHM: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    n_spins: usize,
    populations: Vec<f64>,
}

impl PopulationVector {
    pub fn new(n_spins: usize, populations: Vec<f64>) -> Result<Self> {
        if populations.len() != 1 << n_spins {
            return Err(Error::Dimension {
                expected: 1 << n_spins,
                found: populations.len(),
            });
        }
        Ok(PopulationVector { n_spins, populations })
    }

    /// |ψ_b|² of a pure state.
    pub fn from_state(state: &StateVector) -> Self {
        PopulationVector {
            n_spins: state.n_spins(),
            populations: state.probabilities(),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        let index = crate::state::basis_index(label)?;
        self.populations.get(index).copied().ok_or(Error::Dimension {
            expected: self.populations.len(),
            found: index + 1,
        })
    }
}

fn require_zz(spec: &ChainSpec, operation: &'static str) -> Result<()> {
    spec.validate()?;
    if spec.coupling_form != CouplingForm::Zz {
        return Err(Error::UnsupportedForm { operation });
    }
    Ok(())
}

/// p_b = −⟨b|H_static|b⟩ / max_b |⟨b|H_static|b⟩|. For the zz form the
/// diagonal entries are the eigen-energies.
pub fn thermal_populations(spec: &ChainSpec) -> Result<PopulationVector> {
    let h = build_static_hamiltonian(spec)?;
    let energies = h.diagonal();
    let scale = energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let populations = if scale > 0.0 {
        energies.iter().map(|e| -e / scale).collect()
    } else {
        vec![0.0; energies.len()]
    };
    PopulationVector::new(spec.n_spins, populations)
}

/// Outcome of partial saturation: the all-up population keeps its thermal
/// value, every other population is replaced by their mean.
pub fn pseudopure_ground(spec: &ChainSpec) -> Result<PopulationVector> {
    require_zz(spec, "pseudopure_ground")?;
    let mut pops = thermal_populations(spec)?;
    let rest = &mut pops.populations[1..];
    let mean = rest.iter().sum::<f64>() / rest.len() as f64;
    rest.iter_mut().for_each(|p| *p = mean);
    Ok(pops)
}

/// Ideal π pulse on spin `i` of a diagonal state.
pub fn flip_populations(pops: &PopulationVector, i: usize) -> Result<PopulationVector> {
    check_spin(pops.n_spins, i)?;
    let mask = spin_mask(pops.n_spins, i);
    let mut out = pops.clone();
    for b in 0..out.populations.len() {
        if b & mask == 0 {
            out.populations.swap(b, b | mask);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickLine {
    pub frequency: f64,
    pub intensity: f64,
    pub from: String,
    pub to: String,
    /// The spin whose state differs between `from` and `to`.
    pub spin: usize,
}

impl StickLine {
    /// Frequency of the line when up is the ground state.
    pub fn absorption_frequency(&self) -> f64 {
        -self.frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisDirection {
    Left,
    Right,
    None,
}

/// Where a line moves on an NMR-convention plot when its `frequency`
/// changes by `delta` Hz.
pub fn plot_direction(delta: f64) -> AxisDirection {
    if delta < 0.0 {
        AxisDirection::Left
    } else if delta > 0.0 {
        AxisDirection::Right
    } else {
        AxisDirection::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub spin: usize,
    /// Basis index with the spin up.
    pub from: usize,
    /// Basis index with the spin down.
    pub to: usize,
    pub frequency: f64,
}

/// All N·2^(N−1) single-flip transitions of a zz-form chain, ordered by spin
/// then by `from` index.
pub fn transitions(spec: &ChainSpec) -> Result<Vec<Transition>> {
    require_zz(spec, "transitions")?;
    let h = build_static_hamiltonian(spec)?;
    let energies = h.diagonal();
    let n = spec.n_spins;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Vec::with_capacity(n << (n - 1));
    for spin in 1..=n {
        let mask = spin_mask(n, spin);
        for from in (0..spec.dim()).filter(|b| b & mask == 0) {
            let to = from | mask;
            out.push(Transition {
                spin,
                from,
                to,
                frequency: (energies[from] - energies[to]) / two_pi,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StickSpectrum {
    pub lines: Vec<StickLine>,
}

pub fn stick_spectrum(spec: &ChainSpec, pops: &PopulationVector) -> Result<StickSpectrum> {
    require_zz(spec, "stick_spectrum")?;
    if pops.n_spins != spec.n_spins {
        return Err(Error::Dimension {
            expected: spec.dim(),
            found: pops.populations.len(),
        });
    }
    let n = spec.n_spins;
    let lines = transitions(spec)?
        .into_iter()
        .filter_map(|tr| {
            let intensity = pops.populations[tr.from] - pops.populations[tr.to];
            (intensity.abs() >= INTENSITY_THRESHOLD).then(|| StickLine {
                frequency: tr.frequency,
                intensity,
                from: basis_label(tr.from, n),
                to: basis_label(tr.to, n),
                spin: tr.spin,
            })
        })
        .collect();
    Ok(StickSpectrum { lines })
}

/// A group of lines of one spin lying within the merge distance of each other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplet {
    pub spin: usize,
    /// Intensity-weighted mean frequency (plain mean if intensities cancel).
    pub center: f64,
    pub intensity: f64,
    pub n_lines: usize,
}

impl StickSpectrum {
    pub fn lines_for_spin(&self, spin: usize) -> impl Iterator<Item = &StickLine> {
        self.lines.iter().filter(move |l| l.spin == spin)
    }

    pub fn total_intensity(&self) -> f64 {
        self.lines.iter().map(|l| l.intensity).sum()
    }

    /// Resolved peaks of `spin`: lines are sorted by frequency and a new peak
    /// starts whenever the gap to the previous line exceeds `merge_within_hz`.
    pub fn multiplet(&self, spin: usize, merge_within_hz: f64) -> Vec<Multiplet> {
        let mut lines: Vec<&StickLine> = self.lines_for_spin(spin).collect();
        lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        let mut groups: Vec<Vec<&StickLine>> = Vec::new();
        for line in lines {
            match groups.last_mut() {
                Some(g) if line.frequency - g.last().unwrap().frequency <= merge_within_hz => g.push(line),
                _ => groups.push(vec![line]),
            }
        }
        groups
            .into_iter()
            .map(|g| {
                let intensity: f64 = g.iter().map(|l| l.intensity).sum();
                let center = if intensity.abs() > INTENSITY_THRESHOLD {
                    g.iter().map(|l| l.frequency * l.intensity).sum::<f64>() / intensity
                } else {
                    g.iter().map(|l| l.frequency).sum::<f64>() / g.len() as f64
                };
                Multiplet {
                    spin,
                    center,
                    intensity,
                    n_lines: g.len(),
                }
            })
            .collect()
    }

    /// `freq_hz,intensity,from,to`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "freq_hz,intensity,from,to")?;
        for l in &self.lines {
            writeln!(w, "{:.15e},{:.15e},{},{}", l.frequency, l.intensity, l.from, l.to)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub f_min: f64,
    pub f_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min.is_finite() && self.f_max.is_finite()) {
            return Err(Error::validation("grid", "bounds must be finite"));
        }
        if self.f_max <= self.f_min {
            return Err(Error::validation("grid.f_max", "must exceed f_min"));
        }
        if self.n_points < 2 {
            return Err(Error::validation("grid.n_points", "must be >= 2"));
        }
        Ok(())
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.f_min + (self.f_max - self.f_min) * k as f64 / (self.n_points - 1) as f64
    }

    /// Covers every line with 20 linewidths of margin.
    pub fn around(sticks: &StickSpectrum, fwhm: f64, n_points: usize) -> Grid {
        let (lo, hi) = sticks
            .lines
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l.frequency), hi.max(l.frequency)));
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        let margin = 20.0 * fwhm;
        Grid {
            f_min: lo - margin,
            f_max: hi + margin,
            n_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl SampledCurve {
    /// `freq_hz,amplitude`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "freq_hz,amplitude")?;
        for (f, a) in self.frequencies.iter().zip(&self.amplitudes) {
            writeln!(w, "{f:.15e},{a:.15e}")?;
        }
        Ok(())
    }

    /// Indices of strict local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        let a = &self.amplitudes;
        (1..a.len().saturating_sub(1))
            .filter(|&k| a[k] > a[k - 1] && a[k] > a[k + 1])
            .collect()
    }
}

/// Sum of Lorentzians intensity·(w/2)² / ((f − f₀)² + (w/2)²).
pub fn broadened_spectrum(sticks: &StickSpectrum, fwhm: f64, grid: &Grid) -> Result<SampledCurve> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(Error::validation("fwhm", "must be finite and > 0"));
    }
    grid.validate()?;
    let hw2 = (0.5 * fwhm).powi(2);
    let frequencies: Vec<f64> = (0..grid.n_points).map(|k| grid.frequency(k)).collect();
    let amplitudes = frequencies
        .iter()
        .map(|f| {
            sticks
                .lines
                .iter()
                .map(|l| l.intensity * hw2 / ((f - l.frequency).powi(2) + hw2))
                .sum()
        })
        .collect();
    Ok(SampledCurve {
        frequencies,
        amplitudes,
    })
}
