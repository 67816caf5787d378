//! Independent oracles shared by the integration tests. Nothing here calls
//! into the operator builders it is used to check.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use quantum_domino::config::{load_config, ExperimentConfig};
use quantum_domino::{ChainSpec, CouplingForm};

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `ops[i]` acting on 1-based spin `i + 1`, identity elsewhere; spin 1 is the
/// leftmost Kronecker factor (most significant bit).
pub fn kron_chain(n: usize, factors: &[(usize, CMatrix)]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for spin in 1..=n {
        let op = factors
            .iter()
            .find(|(s, _)| *s == spin)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(identity2);
        out = out.kronecker(&op);
    }
    out
}

/// Dense static Hamiltonian from explicit Pauli tensor products (rad/s).
pub fn kron_static_hamiltonian(spec: &ChainSpec) -> CMatrix {
    let n = spec.n_spins;
    let d = 1 << n;
    let mut h = CMatrix::zeros(d, d);
    for i in 1..=n {
        h += kron_chain(n, &[(i, pauli_z())]) * c(2.0 * PI * spec.offsets[i - 1] / 2.0, 0.0);
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let jij = spec.couplings[i - 1][j - 1];
            if jij == 0.0 {
                continue;
            }
            let w = c(2.0 * PI * jij / 4.0, 0.0);
            h += kron_chain(n, &[(i, pauli_z()), (j, pauli_z())]) * w;
            if spec.coupling_form == CouplingForm::Isotropic {
                h += kron_chain(n, &[(i, pauli_x()), (j, pauli_x())]) * w;
                h += kron_chain(n, &[(i, pauli_y()), (j, pauli_y())]) * w;
            }
        }
    }
    h
}

/// Σᵢ σᵢˣ from Kronecker products.
pub fn kron_sum_x(n: usize) -> CMatrix {
    let d = 1 << n;
    (1..=n).fold(CMatrix::zeros(d, d), |acc, i| acc + kron_chain(n, &[(i, pauli_x())]))
}

/// Largest |a − b| divided by the largest |b| (or 1 if b is zero).
pub fn max_relative_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().map(|x| x.norm()).fold(0.0_f64, f64::max).max(1.0);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0_f64, f64::max) / scale
}

/// Basis index from spin states, spin 1 first, `true` = down.
pub fn index_of(downs: &[bool]) -> usize {
    downs.iter().fold(0, |acc, &d| acc << 1 | usize::from(d))
}

/// (E_up − E_down)/2π for spin `i` from the diagonal of a dense oracle
/// Hamiltonian, partners fixed by `downs` (entry i−1 ignored).
pub fn eigen_gap_hz(h: &CMatrix, downs: &[bool], i: usize) -> f64 {
    let mut up = downs.to_vec();
    up[i - 1] = false;
    let mut down = downs.to_vec();
    down[i - 1] = true;
    let (a, b) = (index_of(&up), index_of(&down));
    (h[(a, a)].re - h[(b, b)].re) / (2.0 * PI)
}

pub fn butyrate_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/butyrate_like.json")
}

pub fn butyrate_config() -> ExperimentConfig {
    load_config(butyrate_path()).expect("butyrate_like.json loads")
}

pub fn butyrate_spec() -> ChainSpec {
    butyrate_config().chain
}

/// Four spins with evenly spaced offsets and the small long-range couplings
/// of a butyrate-like chain.
pub fn symmetric_four_spin() -> ChainSpec {
    ChainSpec::from_pairs(
        vec![-450.0, -150.0, 150.0, 450.0],
        &[(1, 2, 35.0), (2, 3, 35.0), (3, 4, 35.0), (1, 3, 2.0), (2, 4, 2.0), (1, 4, 4.0)],
        CouplingForm::Zz,
    )
    .unwrap()
}
