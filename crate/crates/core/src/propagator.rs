//! Time evolution under H(t) = H_static + H_d(t) in the shared rotating frame.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_static_hamiltonian, check_spin, ChainSpec, DriveSpec, HermitianOperator};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Norm drift beyond which [`evolve`] fails.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Largest accepted dt × (max drive frequency) before a warning, in cycles.
pub const MAX_CYCLES_PER_STEP: f64 = 0.1;

/// Steps per period of the fastest frequency in the default dt rule.
pub const DEFAULT_STEPS_PER_CYCLE: f64 = 50.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// exp(−i·H(t + dt/2)·dt) per step.
    #[default]
    ExpmMidpoint,
    /// Classical fourth-order Runge–Kutta on the amplitudes.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    #[serde(default)]
    pub method: Method,
}

impl SimParams {
    pub fn new(t_end: f64, dt: f64, sample_every: usize, method: Method) -> Result<Self> {
        let params = SimParams {
            t_end,
            dt,
            sample_every,
            method,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::validation("t_end", "must be finite and > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation("dt", "must be finite and > 0"));
        }
        if self.dt > self.t_end {
            return Err(Error::validation("dt", "must not exceed t_end"));
        }
        if self.sample_every == 0 {
            return Err(Error::validation("sample_every", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of integration steps; the step is shortened so that an integer
    /// number of steps spans `t_end` exactly.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }
}

/// 1 / (50 · max(|offsets|, |tones|, |J|)) seconds. `None` when every
/// frequency is zero.
pub fn default_dt(spec: &ChainSpec, drive: &DriveSpec) -> Option<f64> {
    let fmax = spec.max_frequency().max(drive.max_frequency());
    (fmax > 0.0).then(|| 1.0 / (DEFAULT_STEPS_PER_CYCLE * fmax))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `per_spin_polarization[i]` is the ⟨σᶻ⟩ series of spin `i + 1`.
    pub per_spin_polarization: Vec<Vec<f64>>,
    pub total_polarization: Vec<f64>,
    pub final_state: StateVector,
}

impl Trajectory {
    fn start(state: &StateVector) -> Self {
        let n = state.n_spins();
        let mut traj = Trajectory {
            times: Vec::new(),
            per_spin_polarization: vec![Vec::new(); n],
            total_polarization: Vec::new(),
            final_state: state.clone(),
        };
        traj.record(0.0, state.amplitudes());
        traj
    }

    fn record(&mut self, t: f64, psi: &[Complex64]) {
        let n = self.per_spin_polarization.len();
        let mut pols = vec![0.0; n];
        for (b, a) in psi.iter().enumerate() {
            let p = a.norm_sqr();
            for (i, pol) in pols.iter_mut().enumerate() {
                if b >> (n - 1 - i) & 1 == 0 {
                    *pol += p;
                } else {
                    *pol -= p;
                }
            }
        }
        self.times.push(t);
        self.total_polarization.push(pols.iter().sum());
        for (series, p) in self.per_spin_polarization.iter_mut().zip(pols) {
            series.push(p);
        }
    }

    pub fn n_spins(&self) -> usize {
        self.per_spin_polarization.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample index and value of the largest |P_tot(t) − P_tot(0)|.
    pub fn max_change(&self) -> Option<(usize, f64)> {
        let p0 = *self.total_polarization.first()?;
        self.total_polarization
            .iter()
            .map(|p| (p - p0).abs())
            .enumerate()
            .fold(None, |best, (k, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((k, d)),
            })
    }

    /// Time at which the total polarization departs furthest from its start.
    pub fn time_of_max_change(&self) -> Option<f64> {
        self.max_change().map(|(k, _)| self.times[k])
    }

    pub fn min_total(&self) -> f64 {
        self.total_polarization.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `t,p1,…,pN,total`, one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.n_spins();
        let mut header = String::from("t");
        for i in 1..=n {
            header.push_str(&format!(",p{i}"));
        }
        header.push_str(",total");
        writeln!(w, "{header}")?;
        for k in 0..self.len() {
            write!(w, "{:.15e}", self.times[k])?;
            for series in &self.per_spin_polarization {
                write!(w, ",{:.15e}", series[k])?;
            }
            writeln!(w, ",{:.15e}", self.total_polarization[k])?;
        }
        Ok(())
    }
}

/// Ideal π pulse on spin `i`: applies σᵢˣ.
pub fn flip_spin(state: &StateVector, i: usize) -> Result<StateVector> {
    check_spin(state.n_spins(), i)?;
    let mut out = state.clone();
    out.permute_flip(out.spin_mask(i), 0);
    Ok(out)
}

/// ⟨ψ|σᵢᶻ|ψ⟩.
pub fn polarization(state: &StateVector, i: usize) -> Result<f64> {
    state.polarization(i)
}

/// max_t |P_tot(t) − P_tot(0)| / 2; a single flip changes ⟨σᶻ⟩ by 2.
pub fn amplification_coefficient(traj: &Trajectory) -> f64 {
    traj.max_change().map_or(0.0, |(_, d)| d / 2.0)
}

struct Workspace {
    term: Vec<Complex64>,
    scratch: Vec<Complex64>,
    acc: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
}

impl Workspace {
    fn new(dim: usize) -> Self {
        let v = || vec![ZERO; dim];
        Workspace {
            term: v(),
            scratch: v(),
            acc: v(),
            k: [v(), v(), v(), v()],
        }
    }
}

/// psi ← exp(−i·(H + field·Σσˣ)·dt)·psi by a Taylor series on the vector,
/// split into substeps with ‖H‖·τ ≤ 1/2 so the series converges to roundoff.
fn expm_step(h: &HermitianOperator, field: f64, dt: f64, psi: &mut [Complex64], ws: &mut Workspace) {
    const MAX_TERMS: usize = 60;
    let theta = h.norm_bound(field) * dt;
    let substeps = (theta / 0.5).ceil().max(1.0) as usize;
    let tau = dt / substeps as f64;
    for _ in 0..substeps {
        ws.term.copy_from_slice(psi);
        for k in 1..=MAX_TERMS {
            h.apply_with_transverse(field, &ws.term, &mut ws.scratch);
            let scale = MINUS_I * (tau / k as f64);
            let mut term_norm = 0.0;
            for ((t, s), p) in ws.term.iter_mut().zip(&ws.scratch).zip(psi.iter_mut()) {
                *t = s * scale;
                *p += *t;
                term_norm += t.norm_sqr();
            }
            if term_norm < 1e-36 {
                break;
            }
        }
    }
}

fn rk4_step(h: &HermitianOperator, drive: &DriveSpec, t: f64, dt: f64, psi: &mut [Complex64], ws: &mut Workspace) {
    let fields = [drive.field_at(t), drive.field_at(t + 0.5 * dt), drive.field_at(t + dt)];
    let [k1, k2, k3, k4] = &mut ws.k;
    let deriv = |field: f64, y: &[Complex64], out: &mut [Complex64]| {
        h.apply_with_transverse(field, y, out);
        out.iter_mut().for_each(|v| *v *= MINUS_I);
    };
    deriv(fields[0], psi, k1);
    for ((a, p), k) in ws.acc.iter_mut().zip(psi.iter()).zip(k1.iter()) {
        *a = p + k * (0.5 * dt);
    }
    deriv(fields[1], &ws.acc, k2);
    for ((a, p), k) in ws.acc.iter_mut().zip(psi.iter()).zip(k2.iter()) {
        *a = p + k * (0.5 * dt);
    }
    deriv(fields[1], &ws.acc, k3);
    for ((a, p), k) in ws.acc.iter_mut().zip(psi.iter()).zip(k3.iter()) {
        *a = p + k * dt;
    }
    deriv(fields[2], &ws.acc, k4);
    for (i, p) in psi.iter_mut().enumerate() {
        *p += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
    }
}

/// Undriven diagonal H: populations are exact invariants, only phases move.
fn diagonal_run(state: &StateVector, h: &HermitianOperator, params: &SimParams) -> Trajectory {
    let n_steps = params.n_steps();
    let dt = params.step();
    let mut traj = Trajectory::start(state);
    for step in (1..=n_steps).filter(|s| s % params.sample_every == 0 || *s == n_steps) {
        let t = if step == n_steps { params.t_end } else { step as f64 * dt };
        traj.record(t, state.amplitudes());
    }
    let psi = state
        .amplitudes()
        .iter()
        .zip(h.diagonal())
        .map(|(a, e)| a * Complex64::from_polar(1.0, -e * params.t_end))
        .collect();
    traj.final_state = StateVector::from_raw(state.n_spins(), psi);
    traj
}

/// Integrates i·d|ψ⟩/dt = H(t)|ψ⟩ from t = 0 to `params.t_end`.
///
/// Samples are taken at step boundaries: the initial state, every
/// `sample_every` steps, and the final step. The state is never renormalized;
/// a norm drift above [`NORM_DRIFT_LIMIT`] is an [`Error::Accuracy`].
pub fn evolve(state: &StateVector, spec: &ChainSpec, drive: &DriveSpec, params: &SimParams) -> Result<Trajectory> {
    params.validate()?;
    drive.validate()?;
    let h = build_static_hamiltonian(spec)?;
    if state.dim() != h.dim() {
        return Err(Error::Dimension {
            expected: h.dim(),
            found: state.dim(),
        });
    }
    let n_steps = params.n_steps();
    let dt = params.step();
    let cycles = dt * drive.max_frequency();
    if cycles > MAX_CYCLES_PER_STEP {
        log::warn!("dt = {dt:e} s spans {cycles:.3} drive cycles (> {MAX_CYCLES_PER_STEP}); results may be inaccurate");
    }

    if h.is_diagonal() && drive.harmonics.iter().all(|hm| hm.amplitude == 0.0) {
        return Ok(diagonal_run(state, &h, params));
    }

    let norm0 = state.norm();
    let mut psi = state.amplitudes().to_vec();
    let mut ws = Workspace::new(psi.len());
    let mut traj = Trajectory::start(state);

    for step in 1..=n_steps {
        let t0 = (step - 1) as f64 * dt;
        match params.method {
            Method::ExpmMidpoint => {
                let field = drive.field_at(t0 + 0.5 * dt);
                expm_step(&h, field, dt, &mut psi, &mut ws);
            }
            Method::Rk4 => rk4_step(&h, drive, t0, dt, &mut psi, &mut ws),
        }
        if step % params.sample_every == 0 || step == n_steps {
            let t = if step == n_steps { params.t_end } else { step as f64 * dt };
            let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let drift = (norm - norm0).abs();
            if drift.is_nan() || drift > NORM_DRIFT_LIMIT {
                return Err(Error::Accuracy {
                    drift,
                    limit: NORM_DRIFT_LIMIT,
                    time: t,
                });
            }
            traj.record(t, &psi);
        }
    }
    traj.final_state = StateVector::from_raw(state.n_spins(), psi);
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub t_end: f64,
    pub per_spin: Vec<f64>,
    pub total: f64,
}

/// Independent runs of increasing drive length, one final sample each.
/// Points run in parallel; the output keeps the order of `t_ends`.
pub fn sweep_t_end(
    state: &StateVector,
    spec: &ChainSpec,
    drive: &DriveSpec,
    params: &SimParams,
    t_ends: &[f64],
) -> Result<Vec<SweepPoint>> {
    t_ends
        .par_iter()
        .map(|&t_end| {
            let final_state = if t_end == 0.0 {
                state.clone()
            } else {
                let run = SimParams {
                    t_end,
                    dt: params.dt.min(t_end),
                    sample_every: usize::MAX,
                    method: params.method,
                };
                evolve(state, spec, drive, &run)?.final_state
            };
            let per_spin: Vec<f64> = (1..=state.n_spins())
                .map(|i| final_state.polarization(i))
                .collect::<Result<_>>()?;
            Ok(SweepPoint {
                t_end,
                total: per_spin.iter().sum(),
                per_spin,
            })
        })
        .collect()
}
