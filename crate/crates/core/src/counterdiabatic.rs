//! Counterdiabatic (CD) driving of the exact interaction-picture Hamiltonian
//! and the repair of the resulting phase inconsistency.
//!
//! For `H = ½[[−Δ, Ω], [Ω*, Δ]]` the CD term is
//!
//! ```text
//! H₁ = (i / 2C₁) [[−B₁/2, A₁], [−A₁*, B₁/2]]
//! A₁ = Ω̇Δ − Δ̇Ω,   B₁ = Ω̇*Ω − Ω̇Ω*,   C₁ = Δ² + |Ω|²
//! ```
//!
//! and `H + H₁ = ½[[−Δ̃, Ω̃], [Ω̃*, Δ̃]]` with `Ω̃ = Ω + iA₁/C₁`,
//! `Δ̃ = Δ + iB₁/2C₁`. Writing `Ω̃ = 2Ω̃_R cos φ̃ e^{−iφ̃}` with a continuous
//! φ̃ and `ω̃₀ = Δ̃ + dφ̃/dt` gives a Schrödinger-picture Hamiltonian S″ whose
//! coupling `Ω̃_R cos φ̃ = |Ω̃|/2` stays finite even where Ω̃_R diverges.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};
use crate::grid::TimeGrid;
use crate::hamiltonian::{Hamiltonian2x2, Picture};
use crate::linalg::{Mat2, I};
use crate::numeric::{sampled_derivative, wrap_angle};
use crate::pulse::{PulseSpec, SharedPulse};

/// Guard on C₁ = Δ² + |Ω|² in (rad/ns)².
pub const C1_MIN: f64 = 1e-18;
/// |cos φ̃| below which Ω̃_R is reported singular.
pub const SINGULAR_COS: f64 = 1e-6;
/// |Ω̃| relative to its maximum below which φ̃ is undefined.
const PHASE_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// Ω_M sech(x), the usual Allen-Eberly envelope.
    #[default]
    Sech,
    /// Ω_M sinh(x), the literal printed form.
    SinhLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllenEberlyParams {
    pub omega_m: f64,
    pub delta_param: f64,
    pub t0_param: f64,
    pub tf: f64,
    pub omega_l: f64,
    #[serde(default)]
    pub envelope: Envelope,
}

impl AllenEberlyParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("omega_m", self.omega_m),
            ("delta", self.delta_param),
            ("t0", self.t0_param),
            ("tf", self.tf),
            ("omega_l", self.omega_l),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(PulseError::InvalidParameter {
                    name: name.into(),
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Allen-Eberly sweep: Δ(t) = (2δ²t₀/π) tanh x, x = π(t − t_f/2)/(2t₀),
/// bell-shaped Rabi envelope, φ = ω_L t and ω₀ = Δ + ω_L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllenEberlyPulse {
    pub params: AllenEberlyParams,
}

impl AllenEberlyPulse {
    fn x(&self, t: f64) -> f64 {
        let p = &self.params;
        PI * (t - 0.5 * p.tf) / (2.0 * p.t0_param)
    }

    fn dx(&self) -> f64 {
        PI / (2.0 * self.params.t0_param)
    }

    fn sweep(&self, t: f64) -> f64 {
        let p = &self.params;
        2.0 * p.delta_param * p.delta_param * p.t0_param / PI * self.x(t).tanh()
    }

    fn sweep_rate(&self, t: f64) -> f64 {
        let d = self.params.delta_param;
        let sech = 1.0 / self.x(t).cosh();
        d * d * sech * sech
    }
}

/// Builds the Allen-Eberly pulse.
pub fn allen_eberly_pulse(params: AllenEberlyParams) -> Result<AllenEberlyPulse> {
    params.validate()?;
    Ok(AllenEberlyPulse { params })
}

impl PulseSpec for AllenEberlyPulse {
    fn rabi(&self, t: f64) -> f64 {
        let x = self.x(t);
        match self.params.envelope {
            Envelope::Sech => self.params.omega_m / x.cosh(),
            Envelope::SinhLiteral => self.params.omega_m * x.sinh(),
        }
    }

    fn rabi_rate(&self, t: f64) -> f64 {
        let x = self.x(t);
        let m = self.params.omega_m * self.dx();
        match self.params.envelope {
            Envelope::Sech => -m * x.tanh() / x.cosh(),
            Envelope::SinhLiteral => m * x.cosh(),
        }
    }

    fn phase(&self, t: f64) -> f64 {
        self.params.omega_l * t
    }

    fn phase_rate(&self, _t: f64) -> f64 {
        self.params.omega_l
    }

    fn phase_accel(&self, _t: f64) -> f64 {
        0.0
    }

    fn omega0(&self, t: f64) -> f64 {
        self.sweep(t) + self.params.omega_l
    }

    fn omega0_rate(&self, t: f64) -> f64 {
        self.sweep_rate(t)
    }

    fn detuning(&self, t: f64) -> f64 {
        self.sweep(t)
    }

    fn detuning_rate(&self, t: f64) -> f64 {
        self.sweep_rate(t)
    }
}

/// The CD quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdSample {
    pub omega: C64,
    pub delta: f64,
    pub a1: C64,
    pub b1: C64,
    pub c1: f64,
}

impl CdSample {
    /// Ω̃ = Ω + iA₁/C₁
    pub fn omega_tilde(&self) -> C64 {
        self.omega + I * self.a1 / self.c1
    }

    /// Δ̃ = Δ + iB₁/2C₁ (real, B₁ is imaginary)
    pub fn delta_tilde(&self) -> f64 {
        self.delta + self.cd_detuning()
    }

    /// iB₁/2C₁
    pub fn cd_detuning(&self) -> f64 {
        (I * self.b1 / (2.0 * self.c1)).re
    }

    /// H₁ in closed form.
    pub fn h1(&self) -> Mat2 {
        let f = I / (2.0 * self.c1);
        Mat2::new(
            f * (-0.5 * self.b1),
            f * self.a1,
            f * (-self.a1.conj()),
            f * (0.5 * self.b1),
        )
    }
}

pub fn cd_sample(pulse: &dyn PulseSpec, t: f64) -> Result<CdSample> {
    let omega = pulse.omega_complex(t);
    let omega_dot = pulse.omega_complex_rate(t);
    let delta = pulse.detuning(t);
    let delta_dot = pulse.detuning_rate(t);
    let c1 = delta * delta + omega.norm_sqr();
    if !(c1 >= C1_MIN) {
        return Err(PulseError::CdDegenerate { t, c1 });
    }
    let a1 = omega_dot * delta - delta_dot * omega;
    let b1 = omega_dot.conj() * omega - omega_dot * omega.conj();
    Ok(CdSample { omega, delta, a1, b1, c1 })
}

/// CD term H₁(t) of the exact interaction-picture Hamiltonian of `pulse`.
pub fn cd_term(pulse: &dyn PulseSpec, t: f64) -> Result<Mat2> {
    cd_sample(pulse, t).map(|s| s.h1())
}

/// Sampled A₁, B₁, C₁, Ω̃, Δ̃.
#[derive(Debug, Clone)]
pub struct CdDecomposition {
    pub grid: TimeGrid,
    pub a1: Vec<C64>,
    pub b1: Vec<C64>,
    pub c1: Vec<f64>,
    pub omega: Vec<C64>,
    pub delta: Vec<f64>,
    pub omega_tilde: Vec<C64>,
    pub delta_tilde: Vec<f64>,
}

impl CdDecomposition {
    pub fn sample(pulse: &dyn PulseSpec, grid: &TimeGrid) -> Result<Self> {
        let n = grid.len();
        let mut d = Self {
            grid: grid.clone(),
            a1: Vec::with_capacity(n),
            b1: Vec::with_capacity(n),
            c1: Vec::with_capacity(n),
            omega: Vec::with_capacity(n),
            delta: Vec::with_capacity(n),
            omega_tilde: Vec::with_capacity(n),
            delta_tilde: Vec::with_capacity(n),
        };
        for &t in grid.samples() {
            let s = cd_sample(pulse, t)?;
            d.a1.push(s.a1);
            d.b1.push(s.b1);
            d.c1.push(s.c1);
            d.omega.push(s.omega);
            d.delta.push(s.delta);
            d.omega_tilde.push(s.omega_tilde());
            d.delta_tilde.push(s.delta_tilde());
        }
        Ok(d)
    }

    /// Largest |Re B₁| / |B₁| over the grid.
    pub fn max_b1_real_fraction(&self) -> f64 {
        self.b1
            .iter()
            .filter(|b| b.norm() > 0.0)
            .map(|b| b.re.abs() / b.norm())
            .fold(0.0, f64::max)
    }
}

/// `H + H₁` in picture I′ together with its sampled decomposition.
///
/// Fails if C₁ falls below [`C1_MIN`] at any grid sample or midpoint. The
/// returned evaluator yields a non-finite matrix at degenerate instants so
/// that propagation rejects it.
pub fn total_hamiltonian(pulse: SharedPulse, grid: &TimeGrid) -> Result<(Hamiltonian2x2, CdDecomposition)> {
    let decomp = CdDecomposition::sample(pulse.as_ref(), grid)?;
    for w in grid.samples().windows(2) {
        cd_sample(pulse.as_ref(), 0.5 * (w[0] + w[1]))?;
    }
    let h = Hamiltonian2x2::new(Picture::IPrime, move |t| match cd_sample(pulse.as_ref(), t) {
        Ok(s) => Mat2::hermitian(-0.5 * s.delta_tilde(), 0.5 * s.omega_tilde(), 0.5 * s.delta_tilde()),
        Err(_) => Mat2::hermitian(f64::NAN, C64::new(f64::NAN, f64::NAN), f64::NAN),
    });
    Ok((h, decomp))
}

/// φ̃ = −arg Ω̃ + 2πn with n chosen per sample so consecutive differences
/// lie in (−π, π]; the first sample is taken in (−π, π].
pub fn extract_phase_tilde(omega_tilde: &[C64], grid: &TimeGrid) -> Result<(Vec<f64>, Vec<i64>)> {
    let max = omega_tilde.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let mut phase = Vec::with_capacity(omega_tilde.len());
    let mut branch = Vec::with_capacity(omega_tilde.len());
    for (w, &t) in omega_tilde.iter().zip(grid.samples()) {
        if !(w.norm() > PHASE_ZERO * max) {
            return Err(PulseError::PhaseUndefined { t });
        }
        let principal = wrap_angle(-w.arg());
        let value = match phase.last() {
            None => principal,
            Some(&prev) => prev + wrap_angle(principal - prev),
        };
        let n = ((value - principal) / TAU).round() as i64;
        phase.push(value);
        branch.push(n);
    }
    Ok((phase, branch))
}

/// Phase-consistent pulse behind `H + H₁`.
#[derive(Debug, Clone)]
pub struct RepairedPulse {
    pub grid: TimeGrid,
    pub phase_tilde: Vec<f64>,
    pub branch_indices: Vec<i64>,
    /// Ω̃_R = |Ω̃| / (2 cos φ̃); diverges at zeros of cos φ̃.
    pub rabi_tilde: Vec<f64>,
    pub singular: Vec<bool>,
    /// ω̃₀ = Δ̃ + dφ̃/dt
    pub omega0_tilde: Vec<f64>,
    /// 2Ω̃_R cos φ̃ = |Ω̃|
    pub field: Vec<f64>,
    pub omega_tilde: Vec<C64>,
    pub delta_tilde: Vec<f64>,
}

impl RepairedPulse {
    pub fn singular_count(&self) -> usize {
        self.singular.iter().filter(|s| **s).count()
    }

    pub fn max_field(&self) -> f64 {
        self.field.iter().copied().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn max_phase_jump(&self) -> f64 {
        self.phase_tilde.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }

    /// Largest relative error of Ω̃_R(1 + e^{−2iφ̃}) against Ω̃ at non-singular samples.
    pub fn reconstruction_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.grid.len() {
            if self.singular[k] {
                continue;
            }
            let rebuilt = self.rabi_tilde[k] * (1.0 + C64::from_polar(1.0, -2.0 * self.phase_tilde[k]));
            let target = self.omega_tilde[k];
            worst = worst.max((rebuilt - target).norm() / target.norm());
        }
        worst
    }

    /// S″ matrix at grid sample `k`.
    pub fn s_doubleprime_at_sample(&self, k: usize) -> Mat2 {
        let w = self.omega0_tilde[k];
        Mat2::hermitian(-0.5 * w, C64::from(0.5 * self.field[k]), 0.5 * w)
    }
}

/// Splits Ω̃ into a continuous phase φ̃, Rabi frequency Ω̃_R and transition
/// frequency ω̃₀ = ω₀ − φ̇ + iB₁/2C₁ + dφ̃/dt.
///
/// A sample is flagged singular when |cos φ̃| < [`SINGULAR_COS`], or when
/// cos φ̃ changes sign before the next sample and this sample is the closer one
/// to the zero.
pub fn repair_consistency(decomp: &CdDecomposition, pulse: &dyn PulseSpec, grid: &TimeGrid) -> Result<RepairedPulse> {
    let (phase_tilde, branch_indices) = extract_phase_tilde(&decomp.omega_tilde, grid)?;
    let n = grid.len();
    let cos: Vec<f64> = phase_tilde.iter().map(|p| p.cos()).collect();
    let mut singular: Vec<bool> = cos.iter().map(|c| c.abs() < SINGULAR_COS).collect();
    for k in 0..n.saturating_sub(1) {
        if cos[k] != 0.0 && cos[k + 1] != 0.0 && (cos[k] < 0.0) != (cos[k + 1] < 0.0) {
            let j = if cos[k].abs() <= cos[k + 1].abs() { k } else { k + 1 };
            singular[j] = true;
        }
    }

    let field: Vec<f64> = decomp.omega_tilde.iter().map(|w| w.norm()).collect();
    let rabi_tilde: Vec<f64> = field.iter().zip(&cos).map(|(f, c)| f / (2.0 * c)).collect();

    let phase_rate = if n >= 5 {
        sampled_derivative(&phase_tilde, grid.dt())
    } else {
        return Err(PulseError::InvalidGrid("need at least 4 steps to differentiate the phase".into()));
    };
    let omega0_tilde: Vec<f64> = grid
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let cd_shift = decomp.delta_tilde[k] - decomp.delta[k];
            pulse.omega0(t) - pulse.phase_rate(t) + cd_shift + phase_rate[k]
        })
        .collect();

    Ok(RepairedPulse {
        grid: grid.clone(),
        phase_tilde,
        branch_indices,
        rabi_tilde,
        singular,
        omega0_tilde,
        field,
        omega_tilde: decomp.omega_tilde.clone(),
        delta_tilde: decomp.delta_tilde.clone(),
    })
}

/// Continuous φ̃(t) between grid samples: the principal value of −arg Ω̃(t)
/// unwrapped against the nearest sample of `repaired`.
pub fn phase_tilde_at(pulse: &dyn PulseSpec, repaired: &RepairedPulse, t: f64) -> f64 {
    let g = &repaired.grid;
    let k = (((t - g.t0()) / g.dt()).round().max(0.0) as usize).min(g.n_steps());
    let reference = repaired.phase_tilde[k];
    let w = cd_sample(pulse, t).map(|s| s.omega_tilde()).unwrap_or(C64::new(f64::NAN, 0.0));
    reference + wrap_angle(-w.arg() - reference)
}

/// dφ̃/dt at any instant from the five-point stencil of step `h` on −arg Ω̃,
/// unwrapped locally around `t`.
pub fn phase_tilde_rate_at(pulse: &dyn PulseSpec, t: f64, h: f64) -> f64 {
    let arg = |s: f64| match cd_sample(pulse, s) {
        Ok(x) => -x.omega_tilde().arg(),
        Err(_) => f64::NAN,
    };
    let centre = arg(t);
    let p = |j: f64| centre + wrap_angle(arg(t + j * h) - centre);
    (p(-2.0) - 8.0 * p(-1.0) + 8.0 * p(1.0) - p(2.0)) / (12.0 * h)
}

/// Schrödinger-picture S″ Hamiltonian `½[[−ω̃₀, 2Ω̃_R cos φ̃], [2Ω̃_R cos φ̃, ω̃₀]]`.
///
/// The coupling is evaluated as |Ω̃|, so singular Ω̃_R never enters; ω̃₀ uses
/// the phase-rate stencil with the grid spacing of `repaired`.
pub fn h_s_doubleprime(pulse: SharedPulse, repaired: &RepairedPulse) -> Hamiltonian2x2 {
    let h = repaired.grid.dt();
    Hamiltonian2x2::new(Picture::SDoublePrime, move |t| match cd_sample(pulse.as_ref(), t) {
        Ok(s) => {
            let w = s.delta_tilde() + phase_tilde_rate_at(pulse.as_ref(), t, h);
            Mat2::hermitian(-0.5 * w, C64::from(0.5 * s.omega_tilde().norm()), 0.5 * w)
        }
        Err(_) => Mat2::hermitian(f64::NAN, C64::new(f64::NAN, 0.0), f64::NAN),
    })
}

/// Everything produced by one CD run on a grid.
#[derive(Debug, Clone)]
pub struct CdRun {
    pub total: Hamiltonian2x2,
    pub decomposition: CdDecomposition,
    pub repaired: RepairedPulse,
    pub s_doubleprime: Hamiltonian2x2,
}

pub fn counterdiabatic_run(pulse: SharedPulse, grid: &TimeGrid) -> Result<CdRun> {
    let (total, decomposition) = total_hamiltonian(pulse.clone(), grid)?;
    let repaired = repair_consistency(&decomposition, pulse.as_ref(), grid)?;
    let s_doubleprime = h_s_doubleprime(pulse, &repaired);
    Ok(CdRun { total, decomposition, repaired, s_doubleprime })
}

impl From<AllenEberlyPulse> for SharedPulse {
    fn from(p: AllenEberlyPulse) -> Self {
        Arc::new(p)
    }
}
