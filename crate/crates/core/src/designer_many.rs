//! Many-oscillation inversion with a linear chirp and a Gaussian envelope.
//!
//! Δ(t) = a(t − t_f/2), Ω_R(t) = Ω₀ exp[−A(t − t_f/2)²] and, with constant
//! ω₀ and φ(0) = π/2, φ(t) = −a t²/2 + (ω₀ + a t_f/2) t + π/2. The slope `a`
//! and peak `Ω₀` are tuned to minimize [θ(t_f) − π]².

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};
use crate::grid::TimeGrid;
use crate::hamiltonian::{h_interaction, h_rwa};
use crate::invariants::{auxiliary_odes_exact_with, auxiliary_odes_rwa_with, AngleOdeOptions};
use crate::linalg::StateVector;
use crate::propagator::propagate_final;
use crate::pulse::{PulseSpec, SharedPulse};
use crate::simplex::{nelder_mead, Evaluation, NelderMeadOptions};

/// Evaluations between trace checkpoints.
pub const CHECKPOINT_EVERY: usize = 10;
/// Objective below which the inversion counts as achieved.
pub const TARGET_OBJECTIVE: f64 = 1e-3;
pub const DEFAULT_BUDGET: usize = 200;
/// Default integration steps for t_f = 100 ns.
pub const DEFAULT_STEPS: usize = 160_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpGaussParams {
    /// Detuning slope (rad/ns²).
    pub a: f64,
    /// Peak Rabi frequency Ω₀ (rad/ns).
    pub omega_0_rabi: f64,
    /// Gaussian width parameter A (1/ns²).
    pub big_a: f64,
    pub tf: f64,
    /// Constant atomic transition frequency (rad/ns).
    pub omega_atom: f64,
}

impl ChirpGaussParams {
    /// Starting point of the optimization: a = (2π)²×254.648 MHz², Ω₀ = 2π×2 GHz.
    pub fn seed() -> Self {
        Self {
            a: TAU * TAU * 254.648e-6,
            omega_0_rabi: TAU * 2.0,
            big_a: TAU * TAU * 506.606e-6,
            tf: 100.0,
            omega_atom: TAU * 5.0,
        }
    }

    /// A published inverting pair: a = (2π)²×272.824 MHz², Ω₀ = 2π×2.202 GHz.
    pub fn reference_optimum() -> Self {
        Self { a: TAU * TAU * 272.824e-6, omega_0_rabi: TAU * 2.202, ..Self::seed() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: &str| Err(PulseError::InvalidParameter { name: name.into(), reason: reason.into() });
        if !(self.big_a > 0.0 && self.big_a.is_finite()) {
            return bad("big_a", "must be positive");
        }
        if !(self.tf > 0.0 && self.tf.is_finite()) {
            return bad("tf", "must be positive");
        }
        if !(self.a.is_finite() && self.omega_0_rabi.is_finite() && self.omega_atom.is_finite()) {
            return bad("a/omega_0_rabi/omega_atom", "must be finite");
        }
        Ok(())
    }

    pub fn with_point(&self, a: f64, omega_0_rabi: f64) -> Self {
        Self { a, omega_0_rabi, ..*self }
    }
}

/// The chirped Gaussian pulse with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpGaussPulse {
    pub params: ChirpGaussParams,
}

pub fn chirp_gauss_pulse(params: ChirpGaussParams) -> Result<ChirpGaussPulse> {
    params.validate()?;
    Ok(ChirpGaussPulse { params })
}

impl ChirpGaussPulse {
    fn centre(&self) -> f64 {
        0.5 * self.params.tf
    }

    pub fn shared(self) -> SharedPulse {
        Arc::new(self)
    }
}

impl PulseSpec for ChirpGaussPulse {
    fn rabi(&self, t: f64) -> f64 {
        let x = t - self.centre();
        self.params.omega_0_rabi * (-self.params.big_a * x * x).exp()
    }
    fn phase(&self, t: f64) -> f64 {
        let p = &self.params;
        -0.5 * p.a * t * t + (p.omega_atom + 0.5 * p.a * p.tf) * t + FRAC_PI_2
    }
    fn phase_rate(&self, t: f64) -> f64 {
        self.params.omega_atom - self.params.a * (t - self.centre())
    }
    fn omega0(&self, _t: f64) -> f64 {
        self.params.omega_atom
    }
    fn rabi_rate(&self, t: f64) -> f64 {
        -2.0 * self.params.big_a * (t - self.centre()) * self.rabi(t)
    }
    fn phase_accel(&self, _t: f64) -> f64 {
        -self.params.a
    }
    fn omega0_rate(&self, _t: f64) -> f64 {
        0.0
    }
    fn detuning(&self, t: f64) -> f64 {
        self.params.a * (t - self.centre())
    }
    fn detuning_rate(&self, _t: f64) -> f64 {
        self.params.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Exact,
    Rwa,
}

/// (θ − π)² for a polar angle θ.
pub fn objective_from_theta(theta: f64) -> f64 {
    (theta - PI).powi(2)
}

/// θ = 2 arcsin √P_e.
pub fn theta_from_population(p_e: f64) -> f64 {
    2.0 * p_e.clamp(0.0, 1.0).sqrt().asin()
}

fn model_hamiltonian(pulse: SharedPulse, model: Model) -> crate::hamiltonian::Hamiltonian2x2 {
    match model {
        Model::Exact => h_interaction(pulse),
        Model::Rwa => h_rwa(pulse),
    }
}

/// Final excited population after propagating |g⟩.
pub fn final_excited_population(params: &ChirpGaussParams, grid: &TimeGrid, model: Model) -> Result<f64> {
    let pulse = chirp_gauss_pulse(*params)?.shared();
    let psi = propagate_final(&model_hamiltonian(pulse, model), StateVector::ground(), grid)?;
    Ok(psi.p_e())
}

/// [θ(t_f) − π]² with θ(t_f) recovered from the propagated state.
pub fn inversion_objective(params: &ChirpGaussParams, grid: &TimeGrid, model: Model) -> Result<f64> {
    Ok(objective_from_theta(theta_from_population(final_excited_population(params, grid, model)?)))
}

/// [θ(t_f) − π]² with θ from the auxiliary angle equations started at
/// θ(0) = ε, β(0) = 0.
pub fn inversion_objective_ode(params: &ChirpGaussParams, grid: &TimeGrid, model: Model, opts: AngleOdeOptions) -> Result<f64> {
    let pulse = chirp_gauss_pulse(*params)?;
    let traj = match model {
        Model::Exact => auxiliary_odes_exact_with(&pulse, 0.0, 0.0, grid, opts)?,
        Model::Rwa => auxiliary_odes_rwa_with(&pulse, 0.0, 0.0, grid, opts)?,
    };
    Ok(objective_from_theta(traj.final_theta()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub evaluation: usize,
    pub a: f64,
    pub omega_0_rabi: f64,
    pub objective: f64,
    pub best_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub iterations: Vec<TraceRow>,
    pub best: TraceRow,
    pub evaluations: usize,
    /// The simplex met its spread or target test within the budget.
    pub converged: bool,
    /// Best objective is below [`TARGET_OBJECTIVE`].
    pub target_reached: bool,
}

fn trace_of(history: &[Evaluation], converged: bool) -> OptimizationTrace {
    let mut best_so_far = f64::INFINITY;
    let mut best = None;
    let iterations: Vec<TraceRow> = history
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let row = TraceRow { evaluation: k + 1, a: e.x[0], omega_0_rabi: e.x[1], objective: e.f, best_objective: best_so_far.min(e.f) };
            if e.f < best_so_far {
                best_so_far = e.f;
                best = Some(row);
            }
            row
        })
        .collect();
    let best = best.unwrap_or(iterations[0]);
    OptimizationTrace {
        evaluations: iterations.len(),
        target_reached: best.objective < TARGET_OBJECTIVE,
        iterations,
        best,
        converged,
    }
}

/// Nelder–Mead over (a, Ω₀) with A, t_f and ω₀ fixed, using the exact model.
pub fn optimize_inversion(seed: &ChirpGaussParams, grid: &TimeGrid, budget: usize) -> Result<(ChirpGaussParams, OptimizationTrace)> {
    optimize_inversion_with(seed, grid, budget, Model::Exact, &mut |_| {})
}

/// As [`optimize_inversion`], choosing the model and receiving the partial
/// trace every [`CHECKPOINT_EVERY`] evaluations.
pub fn optimize_inversion_with(
    seed: &ChirpGaussParams,
    grid: &TimeGrid,
    budget: usize,
    model: Model,
    checkpoint: &mut dyn FnMut(&OptimizationTrace),
) -> Result<(ChirpGaussParams, OptimizationTrace)> {
    seed.validate()?;
    if budget == 0 {
        return Err(PulseError::InvalidParameter { name: "budget".into(), reason: "must be at least 1".into() });
    }
    // surface grid problems before the search swallows them as infinities
    inversion_objective(seed, grid, model)?;
    let objective = |x: &[f64]| inversion_objective(&seed.with_point(x[0], x[1]), grid, model).unwrap_or(f64::INFINITY);
    let opts = NelderMeadOptions { budget, ..Default::default() };
    let mut observer = |h: &[Evaluation]| {
        if h.len() % CHECKPOINT_EVERY == 0 {
            checkpoint(&trace_of(h, false));
        }
    };
    let r = nelder_mead(objective, &[seed.a, seed.omega_0_rabi], opts, &mut observer);
    let trace = trace_of(&r.history, r.converged);
    Ok((seed.with_point(trace.best.a, trace.best.omega_0_rabi), trace))
}

/// CSV rendering of a trace; Ω₀ is exported divided by 2π in GHz.
pub fn trace_csv(trace: &OptimizationTrace) -> String {
    let mut s = String::from("evaluation,a_rad_per_ns2,omega_0_rabi_over_2pi_GHz,objective,best_objective\n");
    for r in &trace.iterations {
        s.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{:.12e}\n", r.evaluation, r.a, r.omega_0_rabi / TAU, r.objective, r.best_objective));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_shape_at_reference_times() {
        let p = chirp_gauss_pulse(ChirpGaussParams::seed()).unwrap();
        let tc = 50.0;
        assert!((p.phase(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert!((p.phase_rate(tc) - TAU * 5.0).abs() < 1e-12);
        assert!(p.detuning(tc).abs() < 1e-15);
        assert!((p.rabi(tc) - TAU * 2.0).abs() < 1e-12);
        // Δ = ω₀ − φ̇ holds everywhere
        for &t in &[0.0, 13.0, 77.7, 100.0] {
            assert!((p.omega0(t) - p.phase_rate(t) - p.detuning(t)).abs() < 1e-12);
            let h = 1e-3;
            let fd = (p.phase(t + h) - p.phase(t - h)) / (2.0 * h);
            assert!((fd - p.phase_rate(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn objective_identity() {
        assert_eq!(objective_from_theta(theta_from_population(1.0)), 0.0);
        let p = (0.5 * (PI - 1e-3f64.sqrt())).sin().powi(2);
        assert!((objective_from_theta(theta_from_population(p)) - 1e-3).abs() < 1e-12);
        assert!(p > 0.99975 && p < 0.99976);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = ChirpGaussParams::seed();
        p.big_a = 0.0;
        assert!(chirp_gauss_pulse(p).is_err());
        p = ChirpGaussParams::seed();
        p.tf = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn trace_best_is_monotone() {
        let h = vec![
            Evaluation { x: vec![1.0, 2.0], f: 3.0 },
            Evaluation { x: vec![1.1, 2.0], f: 4.0 },
            Evaluation { x: vec![1.0, 2.1], f: 1.0 },
            Evaluation { x: vec![0.9, 2.0], f: 2.0 },
        ];
        let t = trace_of(&h, false);
        let best: Vec<f64> = t.iterations.iter().map(|r| r.best_objective).collect();
        assert_eq!(best, vec![3.0, 3.0, 1.0, 1.0]);
        assert_eq!(t.best.evaluation, 3);
    }
}
