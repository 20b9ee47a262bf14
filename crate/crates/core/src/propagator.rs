//! Time-dependent Schrödinger equation `i ∂ψ/∂t = H(t) ψ` on a uniform grid.
//!
//! Each step applies the fourth-order Magnus exponential built from the
//! samples H(t), H(t+dt/2), H(t+dt):
//!
//! ```text
//! K = dt/6 (H₀ + 4H½ + H₁) + i dt²/12 [H₀, H₁],    ψ ← exp(−iK) ψ
//! ```
//!
//! `K` is Hermitian, so every step is unitary up to rounding.

use crate::error::{PulseError, Result};
use crate::grid::TimeGrid;
use crate::hamiltonian::{Hamiltonian2x2, Picture};
use crate::linalg::{Mat2, StateVector, I};

/// Hard floor of the resolution rule (steps per fastest period).
pub const MIN_STEPS_PER_PERIOD: f64 = 4.0;
/// Steps per period below which a run is flagged as under-resolved.
pub const WARN_STEPS_PER_PERIOD: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub grid: TimeGrid,
    pub states: Vec<StateVector>,
    pub p_g: Vec<f64>,
    pub p_e: Vec<f64>,
    /// |‖ψ(t)‖ − 1| per sample.
    pub norm_error: Vec<f64>,
    pub picture: Picture,
    /// Steps per period of the largest instantaneous level splitting.
    pub steps_per_period: f64,
}

impl PropagationResult {
    pub fn final_state(&self) -> StateVector {
        *self.states.last().expect("propagation has at least one sample")
    }

    pub fn max_norm_error(&self) -> f64 {
        self.norm_error.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_under_resolved(&self) -> bool {
        self.steps_per_period < WARN_STEPS_PER_PERIOD
    }
}

/// One Magnus step from the three Hamiltonian samples `[H(t), H(t+dt/2), H(t+dt)]`.
pub fn propagate_step(h_samples: &[Mat2; 3], psi: &StateVector, dt: f64) -> StateVector {
    step_unitary(h_samples, dt).apply(psi)
}

fn step_unitary(h: &[Mat2; 3], dt: f64) -> Mat2 {
    let avg = (h[0] + h[1].scale_re(4.0) + h[2]).scale_re(dt / 6.0);
    let corr = h[0].commutator(&h[2]).scale(I * (dt * dt / 12.0));
    (avg + corr).expm_neg_i_hermitian()
}

/// Level splitting of a Hermitian 2×2 matrix (difference of eigenvalues).
fn splitting(m: &Mat2) -> f64 {
    let half_gap = 0.5 * (m.ee.re - m.gg.re);
    2.0 * half_gap.hypot(0.5 * (m.ge.norm() + m.eg.norm()))
}

fn checked(h: &Hamiltonian2x2, t: f64) -> Result<Mat2> {
    let m = h.at(t);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(PulseError::NonFiniteHamiltonian { t })
    }
}

fn check_initial(psi0: &StateVector) -> Result<()> {
    let norm = psi0.norm();
    if !psi0.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(PulseError::NotNormalized { norm });
    }
    Ok(())
}

/// Integrates from `psi0` over `grid`, recording every sample.
pub fn propagate(h: &Hamiltonian2x2, psi0: StateVector, grid: &TimeGrid) -> Result<PropagationResult> {
    check_initial(&psi0)?;
    let samples = grid.samples();
    let dt = grid.dt();

    let mut states = Vec::with_capacity(samples.len());
    states.push(psi0);
    let mut psi = psi0;
    let mut h_left = checked(h, samples[0])?;
    let mut max_split = splitting(&h_left);
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h_mid = checked(h, 0.5 * (a + b))?;
        let h_right = checked(h, b)?;
        max_split = max_split.max(splitting(&h_mid)).max(splitting(&h_right));
        psi = propagate_step(&[h_left, h_mid, h_right], &psi, b - a);
        states.push(psi);
        h_left = h_right;
    }

    let steps_per_period = resolution(max_split, dt)?;
    let p_g: Vec<f64> = states.iter().map(StateVector::p_g).collect();
    let p_e: Vec<f64> = states.iter().map(StateVector::p_e).collect();
    let norm_error = states.iter().map(|s| (s.norm() - 1.0).abs()).collect();
    Ok(PropagationResult {
        grid: grid.clone(),
        states,
        p_g,
        p_e,
        norm_error,
        picture: h.picture(),
        steps_per_period,
    })
}

/// Integrates to `grid.tf()` keeping only the final state.
pub fn propagate_final(h: &Hamiltonian2x2, psi0: StateVector, grid: &TimeGrid) -> Result<StateVector> {
    check_initial(&psi0)?;
    let samples = grid.samples();
    let mut psi = psi0;
    let mut h_left = checked(h, samples[0])?;
    let mut max_split = splitting(&h_left);
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h_mid = checked(h, 0.5 * (a + b))?;
        let h_right = checked(h, b)?;
        max_split = max_split.max(splitting(&h_mid)).max(splitting(&h_right));
        psi = propagate_step(&[h_left, h_mid, h_right], &psi, b - a);
        h_left = h_right;
    }
    resolution(max_split, grid.dt())?;
    Ok(psi)
}

fn resolution(max_split: f64, dt: f64) -> Result<f64> {
    let steps_per_period = if max_split > 0.0 {
        std::f64::consts::TAU / (max_split * dt)
    } else {
        f64::INFINITY
    };
    if steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(PulseError::Resolution { steps_per_period, minimum: MIN_STEPS_PER_PERIOD });
    }
    Ok(steps_per_period)
}

/// Runs forward on `grid` and again with twice the steps; returns the
/// largest amplitude difference of the final states (a posteriori error estimate).
pub fn step_halving_error(h: &Hamiltonian2x2, psi0: StateVector, grid: &TimeGrid) -> Result<f64> {
    let coarse = propagate_final(h, psi0, grid)?;
    let fine = propagate_final(h, psi0, &grid.refined())?;
    Ok((coarse.cg - fine.cg).norm().max((coarse.ce - fine.ce).norm()))
}

/// Propagates `psi_end` backwards from `grid.tf()` to `grid.t0()`.
pub fn propagate_backward(h: &Hamiltonian2x2, psi_end: StateVector, grid: &TimeGrid) -> Result<StateVector> {
    let reversed = h.time_reversed(grid.tf());
    let span = TimeGrid::uniform(0.0, grid.duration(), grid.n_steps())?;
    propagate_final(&reversed, psi_end, &span)
}

/// Final excited-state population P_e(t_f).
pub fn fidelity_inversion(result: &PropagationResult) -> f64 {
    *result.p_e.last().expect("propagation has at least one sample")
}
