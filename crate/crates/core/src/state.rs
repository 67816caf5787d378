use num_complex::Complex64;

use crate::chain::{check_spin, spin_mask, z_value, MAX_SPINS};
use crate::error::{Error, Result};

/// Tolerance on the unit-norm invariant of validated states.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Pure state of an N-spin chain over the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_spins: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Validates length `2^n_spins` and unit norm.
    pub fn new(n_spins: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::validation("n_spins", format!("must be in 1..={MAX_SPINS}")));
        }
        if amplitudes.len() != 1 << n_spins {
            return Err(Error::Dimension {
                expected: 1 << n_spins,
                found: amplitudes.len(),
            });
        }
        let state = StateVector { n_spins, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::validation("amplitudes", format!("norm is {norm}, expected 1")));
        }
        Ok(state)
    }

    /// Skips the norm check; used for integrator output whose drift is
    /// reported separately.
    pub(crate) fn from_raw(n_spins: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_spins);
        StateVector { n_spins, amplitudes }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn conjugate(&self) -> StateVector {
        StateVector {
            n_spins: self.n_spins,
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Swaps amplitudes of every pair of basis states differing only in the
    /// bits of `mask`, restricted to states where `control_mask` bits are set.
    pub(crate) fn permute_flip(&mut self, flip_mask: usize, control_mask: usize) {
        for b in 0..self.amplitudes.len() {
            let partner = b ^ flip_mask;
            if b < partner && b & control_mask == control_mask {
                self.amplitudes.swap(b, partner);
            }
        }
    }

    /// ⟨σᵢᶻ⟩ for 1-based spin `i`.
    pub fn polarization(&self, i: usize) -> Result<f64> {
        check_spin(self.n_spins, i)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * z_value(self.n_spins, b, i))
            .sum())
    }

    /// Σᵢ⟨σᵢᶻ⟩.
    pub fn total_polarization(&self) -> f64 {
        (1..=self.n_spins).map(|i| self.polarization(i).unwrap()).sum()
    }

    pub(crate) fn spin_mask(&self, i: usize) -> usize {
        spin_mask(self.n_spins, i)
    }
}

/// Basis index for a label such as `"1000"` (spin 1 first, `1` = down).
pub fn basis_index(label: &str) -> Result<usize> {
    if label.is_empty() || label.len() > MAX_SPINS {
        return Err(Error::validation(
            "label",
            format!("length must be in 1..={MAX_SPINS}, got {}", label.len()),
        ));
    }
    label.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        other => Err(Error::validation("label", format!("non-binary character {other:?} in {label:?}"))),
    })
}

pub fn basis_label(index: usize, n_spins: usize) -> String {
    (1..=n_spins)
        .map(|i| if index & spin_mask(n_spins, i) == 0 { '0' } else { '1' })
        .collect()
}
