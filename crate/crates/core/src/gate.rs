//! Gate-level reference for the amplification chain
//! U = CNOT(N-1,N) ··· CNOT(2,3) CNOT(1,2).
//!
//! U is an operator product, so CNOT(1,2) acts first. Every gate is a basis
//! permutation; nothing here builds a matrix.

use num_complex::Complex64;
use rand::Rng;

use crate::chain::{check_spin, MAX_SPINS};
use crate::error::{Error, Result};
use crate::state::basis_index;
pub use crate::state::StateVector;

pub fn basis_state(label: &str) -> Result<StateVector> {
    let index = basis_index(label)?;
    let n = label.len();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    amplitudes[index] = Complex64::new(1.0, 0.0);
    StateVector::new(n, amplitudes)
}

/// (a|0⟩ + b|1⟩) on spin 1, all other spins up.
pub fn prepare_initial(a: Complex64, b: Complex64, n_spins: usize) -> Result<StateVector> {
    if n_spins == 0 || n_spins > MAX_SPINS {
        return Err(Error::validation("n_spins", format!("must be in 1..={MAX_SPINS}")));
    }
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::validation("(a, b)", format!("|a|^2 + |b|^2 = {norm}, expected 1")));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
    amplitudes[0] = a;
    amplitudes[1 << (n_spins - 1)] = b;
    StateVector::new(n_spins, amplitudes)
}

/// Flips `target` wherever `control` is down (|1⟩).
pub fn apply_cnot(state: &StateVector, control: usize, target: usize) -> Result<StateVector> {
    let n = state.n_spins();
    check_spin(n, control)?;
    check_spin(n, target)?;
    if control == target {
        return Err(Error::validation("target", "control and target must differ"));
    }
    let mut out = state.clone();
    out.permute_flip(state.spin_mask(target), state.spin_mask(control));
    Ok(out)
}

pub fn domino_circuit(state: &StateVector) -> Result<StateVector> {
    let n = state.n_spins();
    if n < 2 {
        return Err(Error::validation("n_spins", "the CNOT chain needs at least 2 spins"));
    }
    (1..n).try_fold(state.clone(), |s, m| apply_cnot(&s, m, m + 1))
}

/// U⁻¹: the same CNOTs in reverse order.
pub fn domino_circuit_inverse(state: &StateVector) -> Result<StateVector> {
    let n = state.n_spins();
    if n < 2 {
        return Err(Error::validation("n_spins", "the CNOT chain needs at least 2 spins"));
    }
    (1..n).rev().try_fold(state.clone(), |s, m| apply_cnot(&s, m, m + 1))
}

/// |⟨x|y⟩|².
pub fn fidelity(x: &StateVector, y: &StateVector) -> Result<f64> {
    Ok(x.inner(y)?.norm_sqr().min(1.0))
}

/// a|0…0⟩ + b|1…1⟩, the expected chain output.
pub fn cat_state(a: Complex64, b: Complex64, n_spins: usize) -> Result<StateVector> {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
    amplitudes[0] = a;
    amplitudes[(1 << n_spins) - 1] = b;
    StateVector::new(n_spins, amplitudes)
}

/// Random normalized (a, b) with independent phases.
pub fn random_amplitudes<R: Rng + ?Sized>(rng: &mut R) -> (Complex64, Complex64) {
    use std::f64::consts::{FRAC_PI_2, TAU};
    let theta = rng.random_range(0.0..=FRAC_PI_2);
    let a = Complex64::from_polar(theta.cos(), rng.random_range(0.0..TAU));
    let b = Complex64::from_polar(theta.sin(), rng.random_range(0.0..TAU));
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateCheckReport {
    pub n_spins: usize,
    pub trials: usize,
    pub min_fidelity: f64,
    /// Largest deviation of Σ⟨σᶻ⟩ from (|a|² − |b|²)·N.
    pub max_polarization_error: f64,
}

/// Runs the chain on `trials` random inputs and compares with a|0…0⟩ + b|1…1⟩.
pub fn gate_check<R: Rng + ?Sized>(n_spins: usize, trials: usize, rng: &mut R) -> Result<GateCheckReport> {
    if n_spins < 2 {
        return Err(Error::validation("n", "gate check needs N >= 2"));
    }
    let mut min_fidelity = f64::INFINITY;
    let mut max_polarization_error: f64 = 0.0;
    for _ in 0..trials {
        let (a, b) = random_amplitudes(rng);
        let out = domino_circuit(&prepare_initial(a, b, n_spins)?)?;
        min_fidelity = min_fidelity.min(fidelity(&out, &cat_state(a, b, n_spins)?)?);
        let expected = (a.norm_sqr() - b.norm_sqr()) * n_spins as f64;
        max_polarization_error = max_polarization_error.max((out.total_polarization() - expected).abs());
    }
    Ok(GateCheckReport {
        n_spins,
        trials,
        min_fidelity,
        max_polarization_error,
    })
}
