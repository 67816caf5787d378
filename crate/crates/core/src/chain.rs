//! Spin-chain data model and Hamiltonian assembly.
//!
//! Basis convention: spin `i` (1-based, left end = 1) is bit `N - i` of the
//! basis index, so spin 1 is the most significant bit. Bit value 0 is "up"
//! (σᶻ = +1). The label `"1000"` reads spins 1..N left to right and has only
//! spin 1 down.
//!
//! All configuration is in Hz; operators are in rad/s (factor 2π).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

const TWO_PI: f64 = 2.0 * PI;

/// Largest chain the dense/state-vector machinery accepts.
pub const MAX_SPINS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// Secular (truncated) coupling J·σᶻσᶻ/4.
    #[default]
    Zz,
    /// Full scalar coupling J·(σˣσˣ + σʸσʸ + σᶻσᶻ)/4.
    Isotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinState {
    Up,
    Down,
}

impl SpinState {
    /// σᶻ eigenvalue.
    pub fn z(self) -> f64 {
        match self {
            SpinState::Up => 1.0,
            SpinState::Down => -1.0,
        }
    }
}

/// Bit mask of 1-based `spin` in an `n_spins` basis index.
#[inline]
pub fn spin_mask(n_spins: usize, spin: usize) -> usize {
    1 << (n_spins - spin)
}

/// σᶻ eigenvalue of 1-based `spin` in basis state `index`.
#[inline]
pub fn z_value(n_spins: usize, index: usize, spin: usize) -> f64 {
    if index & spin_mask(n_spins, spin) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn check_spin(n_spins: usize, spin: usize) -> Result<()> {
    if spin == 0 || spin > n_spins {
        Err(Error::SpinIndex {
            index: spin,
            n_spins,
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n_spins: usize,
    /// Rotating-frame offset of each spin, Hz.
    pub offsets: Vec<f64>,
    /// Symmetric coupling matrix J_ij in Hz with zero diagonal.
    pub couplings: Vec<Vec<f64>>,
    #[serde(default)]
    pub coupling_form: CouplingForm,
}

impl ChainSpec {
    pub fn new(offsets: Vec<f64>, couplings: Vec<Vec<f64>>, coupling_form: CouplingForm) -> Result<Self> {
        let spec = ChainSpec {
            n_spins: offsets.len(),
            offsets,
            couplings,
            coupling_form,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from a sparse list of `(i, j, J_ij)` with 1-based spins.
    pub fn from_pairs(offsets: Vec<f64>, pairs: &[(usize, usize, f64)], coupling_form: CouplingForm) -> Result<Self> {
        let n = offsets.len();
        let mut couplings = vec![vec![0.0; n]; n];
        for &(i, j, value) in pairs {
            check_spin(n, i)?;
            check_spin(n, j)?;
            if i == j {
                return Err(Error::validation(
                    format!("couplings[{}][{}]", i - 1, j - 1),
                    "a spin cannot couple to itself",
                ));
            }
            couplings[i - 1][j - 1] = value;
            couplings[j - 1][i - 1] = value;
        }
        Self::new(offsets, couplings, coupling_form)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_spins;
        if n == 0 {
            return Err(Error::validation("n_spins", "must be at least 1"));
        }
        if n > MAX_SPINS {
            return Err(Error::validation("n_spins", format!("must be at most {MAX_SPINS}")));
        }
        if self.offsets.len() != n {
            return Err(Error::validation(
                "offsets",
                format!("expected {n} entries, found {}", self.offsets.len()),
            ));
        }
        if let Some(k) = self.offsets.iter().position(|x| !x.is_finite()) {
            return Err(Error::validation(format!("offsets[{k}]"), "must be finite"));
        }
        if self.couplings.len() != n {
            return Err(Error::validation(
                "couplings",
                format!("expected {n} rows, found {}", self.couplings.len()),
            ));
        }
        for (i, row) in self.couplings.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(
                    format!("couplings[{i}]"),
                    format!("expected {n} columns, found {}", row.len()),
                ));
            }
            for (j, &value) in row.iter().enumerate() {
                let path = || format!("couplings[{i}][{j}]");
                if !value.is_finite() {
                    return Err(Error::validation(path(), "must be finite"));
                }
                if i == j && value != 0.0 {
                    return Err(Error::validation(path(), "diagonal must be zero"));
                }
                if value != self.couplings[j][i] {
                    return Err(Error::validation(
                        path(),
                        format!("matrix is not symmetric ({value} vs {})", self.couplings[j][i]),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    /// J_ij for 1-based spins.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i - 1][j - 1]
    }

    /// Diagonal energies (rad/s) of the static Hamiltonian in the computational
    /// basis. For the zz form these are its eigenvalues.
    pub fn diagonal_energies(&self) -> Vec<f64> {
        let n = self.n_spins;
        (0..self.dim())
            .map(|b| {
                let mut e = 0.0;
                for i in 1..=n {
                    let zi = z_value(n, b, i);
                    e += PI * self.offsets[i - 1] * zi;
                    for j in i + 1..=n {
                        let jij = self.coupling(i, j);
                        if jij != 0.0 {
                            e += 0.5 * PI * jij * zi * z_value(n, b, j);
                        }
                    }
                }
                e
            })
            .collect()
    }

    /// Largest frequency scale of the static part, Hz.
    pub fn max_frequency(&self) -> f64 {
        let offsets = self.offsets.iter().map(|x| x.abs());
        let couplings = self.couplings.iter().flatten().map(|x| x.abs());
        offsets.chain(couplings).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    /// Tone frequency in the rotating frame, Hz.
    pub frequency: f64,
    /// ω₁/2π in Hz; multiplies Σσˣ directly.
    pub amplitude: f64,
    /// Radians.
    #[serde(default)]
    pub phase: f64,
}

impl Harmonic {
    pub fn new(frequency: f64, amplitude: f64) -> Self {
        Harmonic {
            frequency,
            amplitude,
            phase: 0.0,
        }
    }
}

/// Global transverse drive: every harmonic acts on every spin.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

impl DriveSpec {
    pub fn new(harmonics: Vec<Harmonic>) -> Self {
        DriveSpec { harmonics }
    }

    /// Same amplitude on every tone, zero phase.
    pub fn from_tones(tones: &[f64], amplitude: f64) -> Self {
        DriveSpec::new(tones.iter().map(|&f| Harmonic::new(f, amplitude)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for (k, h) in self.harmonics.iter().enumerate() {
            let path = |field: &str| format!("harmonics[{k}].{field}");
            if !h.frequency.is_finite() {
                return Err(Error::validation(path("frequency"), "must be finite"));
            }
            if !(h.amplitude.is_finite() && h.amplitude >= 0.0) {
                return Err(Error::validation(path("amplitude"), "must be finite and >= 0"));
            }
            if !h.phase.is_finite() {
                return Err(Error::validation(path("phase"), "must be finite"));
            }
        }
        Ok(())
    }

    /// Coefficient of Σσˣ at time `t`, rad/s.
    pub fn field_at(&self, t: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| TWO_PI * h.amplitude * (TWO_PI * h.frequency * t + h.phase).cos())
            .sum()
    }

    pub fn max_frequency(&self) -> f64 {
        self.harmonics.iter().map(|h| h.frequency.abs()).fold(0.0, f64::max)
    }

    /// Drive whose field at time `s` equals this drive's field at `t_end - s`.
    /// Evolving the complex-conjugated final state under it retraces the
    /// forward trajectory.
    pub fn time_reversed(&self, t_end: f64) -> DriveSpec {
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| Harmonic {
                frequency: h.frequency,
                amplitude: h.amplitude,
                phase: -h.phase - TWO_PI * h.frequency * t_end,
            })
            .collect();
        DriveSpec { harmonics }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Exchange {
    mask: usize,
    /// Coefficient c of c·(σˣσˣ + σʸσʸ), rad/s.
    coeff: f64,
}

/// Structured Hermitian operator on the 2^N computational basis:
/// a real diagonal, a uniform transverse field Σσˣ, and flip-flop exchange
/// terms. Applies matrix-free; [`HermitianOperator::to_dense`] materializes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    n_spins: usize,
    diagonal: Vec<f64>,
    transverse: f64,
    exchange: Vec<Exchange>,
}

impl HermitianOperator {
    pub fn zero(n_spins: usize) -> Self {
        HermitianOperator {
            n_spins,
            diagonal: vec![0.0; 1 << n_spins],
            transverse: 0.0,
            exchange: Vec::new(),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Coefficient of Σσˣ, rad/s.
    pub fn transverse(&self) -> f64 {
        self.transverse
    }

    pub fn is_diagonal(&self) -> bool {
        self.transverse == 0.0 && self.exchange.iter().all(|e| e.coeff == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.is_diagonal() && self.diagonal.iter().all(|&d| d == 0.0)
    }

    pub fn plus(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.n_spins != other.n_spins {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diagonal = self.diagonal.iter().zip(&other.diagonal).map(|(a, b)| a + b).collect();
        let mut exchange = self.exchange.clone();
        exchange.extend_from_slice(&other.exchange);
        Ok(HermitianOperator {
            n_spins: self.n_spins,
            diagonal,
            transverse: self.transverse + other.transverse,
            exchange,
        })
    }

    /// `out = (H + extra·Σσˣ) psi`.
    pub fn apply_with_transverse(&self, extra: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_spins;
        let field = self.transverse + extra;
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = psi[b] * self.diagonal[b];
            if field != 0.0 {
                let mut flipped = Complex64::new(0.0, 0.0);
                for i in 1..=n {
                    flipped += psi[b ^ spin_mask(n, i)];
                }
                acc += flipped * field;
            }
            for ex in &self.exchange {
                let bits = b & ex.mask;
                if bits != 0 && bits != ex.mask {
                    acc += psi[b ^ ex.mask] * (2.0 * ex.coeff);
                }
            }
            *o = acc;
        }
    }

    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_with_transverse(0.0, psi, out);
    }

    /// Upper bound on the spectral norm of `H + extra·Σσˣ`.
    pub fn norm_bound(&self, extra: f64) -> f64 {
        let diag = self.diagonal.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let exchange: f64 = self.exchange.iter().map(|e| 2.0 * e.coeff.abs()).sum();
        diag + (self.transverse + extra).abs() * self.n_spins as f64 + exchange
    }

    /// ⟨ψ|H|ψ⟩ (real for Hermitian H).
    pub fn expectation(&self, state: &StateVector) -> f64 {
        let psi = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut out);
        psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let n = self.n_spins;
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for b in 0..d {
            m[(b, b)] += Complex64::new(self.diagonal[b], 0.0);
            if self.transverse != 0.0 {
                for i in 1..=n {
                    m[(b ^ spin_mask(n, i), b)] += Complex64::new(self.transverse, 0.0);
                }
            }
            for ex in &self.exchange {
                let bits = b & ex.mask;
                if bits != 0 && bits != ex.mask {
                    m[(b ^ ex.mask, b)] += Complex64::new(2.0 * ex.coeff, 0.0);
                }
            }
        }
        m
    }
}

/// H_static = Σᵢ π·νᵢ·σᵢᶻ + Σ_{i<j} (π·J_ij/2)·(σᵢᶻσⱼᶻ [+ σᵢˣσⱼˣ + σᵢʸσⱼʸ]).
pub fn build_static_hamiltonian(spec: &ChainSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let n = spec.n_spins;
    let mut exchange = Vec::new();
    if spec.coupling_form == CouplingForm::Isotropic {
        for i in 1..=n {
            for j in i + 1..=n {
                let jij = spec.coupling(i, j);
                if jij != 0.0 {
                    exchange.push(Exchange {
                        mask: spin_mask(n, i) | spin_mask(n, j),
                        coeff: 0.5 * PI * jij,
                    });
                }
            }
        }
    }
    Ok(HermitianOperator {
        n_spins: n,
        diagonal: spec.diagonal_energies(),
        transverse: 0.0,
        exchange,
    })
}

/// H_d(t) = Σ_k 2π·a_k·cos(2π·ν_k·t + φ_k) · Σᵢ σᵢˣ.
pub fn drive_hamiltonian_at(spec: &ChainSpec, drive: &DriveSpec, t: f64) -> Result<HermitianOperator> {
    spec.validate()?;
    drive.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::validation("t", "must be finite and >= 0"));
    }
    let mut op = HermitianOperator::zero(spec.n_spins);
    op.transverse = drive.field_at(t);
    Ok(op)
}

/// Single-quantum frequency of spin `i` (Hz) given definite states of its
/// coupling partners: ν = νᵢ + Σ_{j≠i} (J_ij/2)·z_j. This is the gap between
/// the spin-up and spin-down basis states divided by 2π. Entries for uncoupled
/// spins are ignored.
pub fn conditional_resonance(spec: &ChainSpec, i: usize, neighbor_states: &BTreeMap<usize, SpinState>) -> Result<f64> {
    spec.validate()?;
    check_spin(spec.n_spins, i)?;
    if spec.coupling_form != CouplingForm::Zz {
        return Err(Error::UnsupportedForm {
            operation: "conditional_resonance",
        });
    }
    let mut freq = spec.offsets[i - 1];
    for j in (1..=spec.n_spins).filter(|&j| j != i) {
        let jij = spec.coupling(i, j);
        if jij == 0.0 {
            continue;
        }
        let state = neighbor_states.get(&j).ok_or_else(|| {
            Error::validation(
                format!("neighbor_states[{j}]"),
                format!("spin {j} couples to spin {i} but has no assigned state"),
            )
        })?;
        freq += 0.5 * jij * state.z();
    }
    Ok(freq)
}

/// Tones for spins 2..N: left neighbor down, every other spin up.
pub fn domino_tones(spec: &ChainSpec) -> Result<Vec<f64>> {
    if spec.n_spins < 2 {
        return Err(Error::validation("n_spins", "domino tones need at least 2 spins"));
    }
    (2..=spec.n_spins)
        .map(|i| {
            let states = (1..=spec.n_spins)
                .filter(|&j| j != i)
                .map(|j| (j, if j == i - 1 { SpinState::Down } else { SpinState::Up }))
                .collect();
            conditional_resonance(spec, i, &states)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceEntry {
    pub spin: usize,
    /// States of the coupled partners, keyed by 1-based spin.
    pub partners: BTreeMap<usize, SpinState>,
    pub frequency: f64,
}

/// Conditional resonance of every spin under every configuration of its
/// coupling partners.
pub fn resonance_table(spec: &ChainSpec) -> Result<Vec<ResonanceEntry>> {
    let n = spec.n_spins;
    let mut table = Vec::new();
    for i in 1..=n {
        let partners: Vec<usize> = (1..=n).filter(|&j| j != i && spec.coupling(i, j) != 0.0).collect();
        for config in 0..(1usize << partners.len()) {
            let states: BTreeMap<usize, SpinState> = partners
                .iter()
                .enumerate()
                .map(|(k, &j)| {
                    let down = config >> (partners.len() - 1 - k) & 1 == 1;
                    (j, if down { SpinState::Down } else { SpinState::Up })
                })
                .collect();
            let frequency = conditional_resonance(spec, i, &states)?;
            table.push(ResonanceEntry {
                spin: i,
                partners: states,
                frequency,
            });
        }
    }
    Ok(table)
}
