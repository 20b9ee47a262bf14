//! Few-oscillation inversion pulses designed through the invariant angles.
//!
//! The phase is fixed to φ = ω_L t. θ(t) is a polynomial that rises from 0 to
//! π with vanishing slope at every zero of cos φ, so that
//! Ω_R = −θ̇/(2 cos φ sin α) stays finite; α(t) is a low-order polynomial that
//! equals π/2 wherever sin θ vanishes. Ω_R, Δ and ω₀ follow from the exact
//! inverse formulas.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};
use crate::grid::TimeGrid;
use crate::hamiltonian::h_interaction;
use crate::invariants::{
    inverse_exact, invariance_residual, AngleFn, InverseExact, LinearAngle, SharedAngle,
};
use crate::linalg::StateVector;
use crate::numeric::bisect;
use crate::polynomial::{solve_polynomial, ConstraintKind, ConstraintSet, PolynomialAnsatz};
use crate::propagator::{propagate, PropagationResult};
use crate::pulse::{FrequencyScan, PulseSpec, SharedPulse};

/// Shaping values (t in ns, θ) that give a smooth ascent for t_f = 5 ns.
pub const DEFAULT_SHAPING: [(f64, f64); 5] = [(1.0, 2.0), (1.6, 2.4), (2.5, 2.8), (4.0, 2.8), (4.5, 3.0)];
pub const DEFAULT_ALPHA_MIDPOINT: f64 = 2.0;
pub const DEFAULT_THETA_DEGREE: usize = 13;
pub const DEFAULT_ALPHA_DEGREE: usize = 4;
/// Verification propagation resolution.
pub const VERIFY_STEPS_PER_PERIOD: f64 = 200.0;
/// |sin θ| below which θ is treated as sitting on a pole.
pub const POLE_TOL: f64 = 1e-9;

/// Zeros of cos(ω_L t) in the open interval (0, t_f).
pub fn cos_phase_zeros(omega_l: f64, tf: f64) -> Vec<f64> {
    if !(omega_l > 0.0) {
        return Vec::new();
    }
    (0..)
        .map(|k| (k as f64 + 0.5) * PI / omega_l)
        .take_while(|&z| z < tf)
        .collect()
}

/// Boundary conditions θ(0)=0, θ(t_f)=π, θ̇(0)=θ̇(t_f)=0, cancellation
/// conditions θ̇(z)=0 and shaping values.
pub fn build_theta_constraints(tf: f64, zeros: &[f64], shaping: &[(f64, f64)], degree: usize) -> Result<ConstraintSet> {
    let mut cs = ConstraintSet::new(tf)?
        .value(0.0, 0.0)?
        .value(tf, PI)?
        .derivative(0.0, 0.0)?
        .derivative(tf, 0.0)?;
    for &z in zeros {
        cs.push(ConstraintKind::Derivative, z, 0.0)?;
    }
    for &(t, v) in shaping {
        if !(v > 0.0 && v < PI) {
            return Err(PulseError::InvalidParameter {
                name: "shaping".into(),
                reason: format!("θ({t}) = {v} must lie in (0, π)"),
            });
        }
        cs.push(ConstraintKind::Value, t, v)?;
    }
    cs.require_square(degree)?;
    Ok(cs)
}

/// α = π/2 with zero slope at every zero of sin θ, plus α(t_f/2) = midpoint.
pub fn build_alpha_constraints(tf: f64, singularities: &[f64], midpoint: f64, degree: usize) -> Result<ConstraintSet> {
    let mut cs = ConstraintSet::new(tf)?;
    for &s in singularities {
        cs.push(ConstraintKind::Value, s, FRAC_PI_2)?;
        cs.push(ConstraintKind::Derivative, s, 0.0)?;
    }
    cs.push(ConstraintKind::Value, 0.5 * tf, midpoint)?;
    cs.require_square(degree)?;
    Ok(cs)
}

/// Zeros of sin θ on `[0, tf]`: sign changes refined by bisection, and
/// touching zeros taken at the smallest |sin θ| of each run of samples
/// below [`POLE_TOL`].
pub fn sin_theta_zeros(theta: &dyn AngleFn, tf: f64) -> Vec<f64> {
    let n = 20_000;
    let f = |t: f64| theta.value(t).sin();
    let ts: Vec<f64> = (0..=n).map(|k| tf * k as f64 / n as f64).collect();
    let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut out: Vec<f64> = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for k in 0..=n {
        if fs[k].abs() < POLE_TOL {
            if run.map_or(true, |(_, v)| fs[k].abs() < v) {
                run = Some((ts[k], fs[k].abs()));
            }
            continue;
        }
        if let Some((t, _)) = run.take() {
            out.push(t);
        }
        if k < n && fs[k] * fs[k + 1] < 0.0 && fs[k + 1].abs() >= POLE_TOL {
            out.push(bisect(f, ts[k], ts[k + 1], 1e-14 * tf));
        }
    }
    if let Some((t, _)) = run {
        out.push(t);
    }
    out
}

/// Inputs of the few-oscillation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewParams {
    pub omega_l: f64,
    pub tf: f64,
    pub shaping: Vec<(f64, f64)>,
    pub alpha_midpoint: f64,
    pub theta_degree: usize,
    pub alpha_degree: usize,
    pub steps_per_period: f64,
}

impl Default for FewParams {
    fn default() -> Self {
        Self {
            omega_l: TAU * 0.5,
            tf: 5.0,
            shaping: DEFAULT_SHAPING.to_vec(),
            alpha_midpoint: DEFAULT_ALPHA_MIDPOINT,
            theta_degree: DEFAULT_THETA_DEGREE,
            alpha_degree: DEFAULT_ALPHA_DEGREE,
            steps_per_period: VERIFY_STEPS_PER_PERIOD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewDiagnostics {
    pub final_excited_population: f64,
    pub max_norm_error: f64,
    pub verification_steps: usize,
    pub max_rabi: f64,
    pub omega0_start: f64,
    pub omega0_end: f64,
    pub omega0_changes_sign: bool,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub theta_constraint_residual: f64,
    pub alpha_constraint_residual: f64,
    pub theta_condition: f64,
    pub alpha_condition: f64,
    pub max_invariance_residual: f64,
    pub lhopital_samples: usize,
    pub max_cancellation_ratio: f64,
}

/// A synthesized few-oscillation pulse with its construction record.
#[derive(Clone)]
pub struct FewOscillationDesign {
    pub params: FewParams,
    pub zeros: Vec<f64>,
    pub singularities: Vec<f64>,
    pub theta_constraints: ConstraintSet,
    pub alpha_constraints: ConstraintSet,
    pub theta: Arc<PolynomialAnsatz>,
    pub alpha: Arc<PolynomialAnsatz>,
    pub inverse: Arc<InverseExact>,
    pub verification: PropagationResult,
    pub diagnostics: FewDiagnostics,
}

impl FewOscillationDesign {
    pub fn pulse(&self) -> SharedPulse {
        self.inverse.clone()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.verification.grid
    }

    /// Reproducible record: coefficients in both bases, constraints and
    /// diagnostics.
    pub fn document(&self) -> FewDesignDocument {
        let poly = |p: &PolynomialAnsatz| PolynomialRecord {
            degree: p.degree(),
            chebyshev_coefficients: p.chebyshev_coefficients.clone(),
            scaled_coefficients: p.scaled_coefficients(),
            raw_coefficients: p.raw_coefficients(),
            condition: p.condition,
        };
        FewDesignDocument {
            params: self.params.clone(),
            cos_phase_zeros: self.zeros.clone(),
            sin_theta_zeros: self.singularities.clone(),
            theta: poly(&self.theta),
            alpha: poly(&self.alpha),
            theta_constraints: self.theta_constraints.clone(),
            alpha_constraints: self.alpha_constraints.clone(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRecord {
    pub degree: usize,
    /// Coefficients of T_n(2t/t_f − 1).
    pub chebyshev_coefficients: Vec<f64>,
    /// Coefficients of (t/t_f)^n.
    pub scaled_coefficients: Vec<f64>,
    /// Coefficients of t^n, t in ns.
    pub raw_coefficients: Vec<f64>,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewDesignDocument {
    pub params: FewParams,
    pub cos_phase_zeros: Vec<f64>,
    pub sin_theta_zeros: Vec<f64>,
    pub theta: PolynomialRecord,
    pub alpha: PolynomialRecord,
    pub theta_constraints: ConstraintSet,
    pub alpha_constraints: ConstraintSet,
    pub diagnostics: FewDiagnostics,
}

/// Runs the full pipeline: zeros of cos φ, θ ansatz, α ansatz, exact inverse
/// and a verification propagation of |g⟩ under the exact Hamiltonian.
pub fn design_few_oscillation(params: &FewParams) -> Result<FewOscillationDesign> {
    if !(params.omega_l > 0.0 && params.tf > 0.0 && params.steps_per_period >= 4.0) {
        return Err(PulseError::InvalidParameter {
            name: "omega_l/tf/steps_per_period".into(),
            reason: "must be positive (at least 4 steps per period)".into(),
        });
    }
    let tf = params.tf;
    let zeros = cos_phase_zeros(params.omega_l, tf);
    let theta_constraints = build_theta_constraints(tf, &zeros, &params.shaping, params.theta_degree)?;
    let theta = Arc::new(solve_polynomial(&theta_constraints, params.theta_degree)?);

    let singularities = sin_theta_zeros(theta.as_ref(), tf);
    let alpha_constraints = build_alpha_constraints(tf, &singularities, params.alpha_midpoint, params.alpha_degree)?;
    let alpha = Arc::new(solve_polynomial(&alpha_constraints, params.alpha_degree)?);

    let phase: SharedAngle = Arc::new(LinearAngle { offset: 0.0, slope: params.omega_l });
    let inverse = Arc::new(inverse_exact(theta.clone(), alpha.clone(), phase, (0.0, tf)));

    // size the verification grid from a coarse survey of the synthesized pulse
    let survey = TimeGrid::uniform(0.0, tf, 4000)?;
    inverse.check(&survey)?;
    let fastest = FrequencyScan::of(inverse.as_ref(), &survey).fastest();
    let n_steps = ((params.steps_per_period * fastest * tf / TAU).ceil() as usize).max(100);
    let grid = TimeGrid::uniform(0.0, tf, n_steps)?;
    inverse.check(&grid)?;

    let pulse: SharedPulse = inverse.clone();
    let h = h_interaction(pulse.clone());
    let verification = propagate(&h, StateVector::ground(), &grid)?;

    let invariant = inverse.invariant();
    let mut diag = FewDiagnostics {
        final_excited_population: *verification.p_e.last().expect("non-empty"),
        max_norm_error: verification.max_norm_error(),
        verification_steps: n_steps,
        max_rabi: 0.0,
        omega0_start: pulse.omega0(0.0),
        omega0_end: pulse.omega0(tf),
        omega0_changes_sign: false,
        alpha_min: f64::INFINITY,
        alpha_max: f64::NEG_INFINITY,
        theta_constraint_residual: theta_constraints.max_residual(&theta),
        alpha_constraint_residual: alpha_constraints.max_residual(&alpha),
        theta_condition: theta.condition,
        alpha_condition: alpha.condition,
        max_invariance_residual: 0.0,
        lhopital_samples: 0,
        max_cancellation_ratio: 0.0,
    };
    let (mut pos, mut neg) = (false, false);
    for &t in grid.samples() {
        diag.max_rabi = diag.max_rabi.max(pulse.rabi(t).abs());
        let w0 = pulse.omega0(t);
        pos |= w0 > 1e-9;
        neg |= w0 < -1e-9;
        let a = alpha.value(t);
        diag.alpha_min = diag.alpha_min.min(a);
        diag.alpha_max = diag.alpha_max.max(a);
        diag.max_invariance_residual = diag.max_invariance_residual.max(invariance_residual(&invariant, &h, t));
        if inverse.is_lhopital(t) {
            diag.lhopital_samples += 1;
        }
    }
    diag.omega0_changes_sign = pos && neg;
    diag.max_cancellation_ratio = zeros
        .iter()
        .map(|&z| theta.rate(z).abs() / inverse.rate_scale())
        .fold(0.0, f64::max);

    Ok(FewOscillationDesign {
        params: params.clone(),
        zeros,
        singularities,
        theta_constraints,
        alpha_constraints,
        theta,
        alpha,
        inverse,
        verification,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_of_cos_phase() {
        let z = cos_phase_zeros(TAU * 0.5, 5.0);
        assert_eq!(z.len(), 5);
        for (k, v) in z.iter().enumerate() {
            assert!((v - (0.5 + k as f64)).abs() < 1e-14);
        }
        assert!(cos_phase_zeros(1.0, 1.5).is_empty());
        // zero exactly at t_f is excluded
        assert_eq!(cos_phase_zeros(PI, 1.5).len(), 1);
    }

    #[test]
    fn theta_constraint_count() {
        let cs = build_theta_constraints(5.0, &cos_phase_zeros(PI, 5.0), &DEFAULT_SHAPING, 13).unwrap();
        assert_eq!(cs.len(), 14);
        assert!(build_theta_constraints(5.0, &cos_phase_zeros(PI, 5.0), &DEFAULT_SHAPING[..4], 13).is_err());
        let minimal = build_theta_constraints(2.0, &[], &[], 3).unwrap();
        assert_eq!(minimal.len(), 4);
        assert!(build_theta_constraints(5.0, &[], &[(1.0, 2.0), (1.0, 2.5)], 5).is_err());
        assert!(build_theta_constraints(5.0, &[], &[(1.0, 3.5)], 4).is_err());
    }

    #[test]
    fn alpha_constraints_and_constant_solution() {
        let cs = build_alpha_constraints(5.0, &[0.0, 5.0], FRAC_PI_2, 4).unwrap();
        assert_eq!(cs.len(), 5);
        let p = solve_polynomial(&cs, 4).unwrap();
        for k in 0..=10 {
            assert!((p.eval(0.5 * k as f64) - FRAC_PI_2).abs() < 1e-12);
        }
        assert!(build_alpha_constraints(5.0, &[0.0], 2.0, 4).is_err());
    }

    #[test]
    fn poles_of_a_smooth_ramp() {
        let ramp = solve_polynomial(&build_theta_constraints(2.0, &[], &[], 3).unwrap(), 3).unwrap();
        assert_eq!(sin_theta_zeros(&ramp, 2.0), vec![0.0, 2.0]);
        let crossing = crate::invariants::LinearAngle { offset: 0.5, slope: 1.0 };
        let z = sin_theta_zeros(&crossing, 5.0);
        assert_eq!(z.len(), 1);
        assert!((z[0] - (PI - 0.5)).abs() < 1e-12);
    }
}
