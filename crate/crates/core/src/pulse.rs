//! Physical control fields: Rabi envelope Ω_R(t), field phase φ(t) and
//! atomic transition frequency ω₀(t).

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::grid::TimeGrid;
use crate::numeric::central_diff;

/// Default finite-difference step (ns) for derivatives not supplied in closed form.
pub const DEFAULT_DIFF_STEP: f64 = 1e-4;

/// A semiclassical pulse acting on a two-level atom.
///
/// Implementors provide closed-form evaluators. Time derivatives default to
/// fourth-order central differences with [`PulseSpec::diff_step`]; built-in
/// protocols override them analytically.
pub trait PulseSpec: Send + Sync {
    fn rabi(&self, t: f64) -> f64;
    fn phase(&self, t: f64) -> f64;
    fn phase_rate(&self, t: f64) -> f64;
    fn omega0(&self, t: f64) -> f64;

    fn diff_step(&self) -> f64 {
        DEFAULT_DIFF_STEP
    }

    fn rabi_rate(&self, t: f64) -> f64 {
        central_diff(|s| self.rabi(s), t, self.diff_step())
    }

    fn phase_accel(&self, t: f64) -> f64 {
        central_diff(|s| self.phase_rate(s), t, self.diff_step())
    }

    fn omega0_rate(&self, t: f64) -> f64 {
        central_diff(|s| self.omega0(s), t, self.diff_step())
    }

    /// Δ = ω₀ − φ̇
    fn detuning(&self, t: f64) -> f64 {
        self.omega0(t) - self.phase_rate(t)
    }

    fn detuning_rate(&self, t: f64) -> f64 {
        self.omega0_rate(t) - self.phase_accel(t)
    }

    /// Ω = Ω_R(1 + e^{−2iφ})
    fn omega_complex(&self, t: f64) -> C64 {
        self.rabi(t) * (1.0 + C64::from_polar(1.0, -2.0 * self.phase(t)))
    }

    fn omega_complex_rate(&self, t: f64) -> C64 {
        let rot = C64::from_polar(1.0, -2.0 * self.phase(t));
        self.rabi_rate(t) * (1.0 + rot)
            + self.rabi(t) * C64::new(0.0, -2.0 * self.phase_rate(t)) * rot
    }
}

pub type SharedPulse = Arc<dyn PulseSpec>;

impl<P: PulseSpec + ?Sized> PulseSpec for Arc<P> {
    fn rabi(&self, t: f64) -> f64 {
        (**self).rabi(t)
    }
    fn phase(&self, t: f64) -> f64 {
        (**self).phase(t)
    }
    fn phase_rate(&self, t: f64) -> f64 {
        (**self).phase_rate(t)
    }
    fn omega0(&self, t: f64) -> f64 {
        (**self).omega0(t)
    }
    fn diff_step(&self) -> f64 {
        (**self).diff_step()
    }
    fn rabi_rate(&self, t: f64) -> f64 {
        (**self).rabi_rate(t)
    }
    fn phase_accel(&self, t: f64) -> f64 {
        (**self).phase_accel(t)
    }
    fn omega0_rate(&self, t: f64) -> f64 {
        (**self).omega0_rate(t)
    }
    fn detuning(&self, t: f64) -> f64 {
        (**self).detuning(t)
    }
    fn detuning_rate(&self, t: f64) -> f64 {
        (**self).detuning_rate(t)
    }
    fn omega_complex(&self, t: f64) -> C64 {
        (**self).omega_complex(t)
    }
    fn omega_complex_rate(&self, t: f64) -> C64 {
        (**self).omega_complex_rate(t)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Pulse assembled from user-supplied closures.
#[derive(Clone)]
pub struct FnPulse {
    rabi: ScalarFn,
    phase: ScalarFn,
    phase_rate: ScalarFn,
    omega0: ScalarFn,
    step: f64,
}

impl FnPulse {
    pub fn new(
        rabi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase_rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            rabi: Arc::new(rabi),
            phase: Arc::new(phase),
            phase_rate: Arc::new(phase_rate),
            omega0: Arc::new(omega0),
            step: DEFAULT_DIFF_STEP,
        }
    }

    pub fn with_diff_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl PulseSpec for FnPulse {
    fn rabi(&self, t: f64) -> f64 {
        (self.rabi)(t)
    }
    fn phase(&self, t: f64) -> f64 {
        (self.phase)(t)
    }
    fn phase_rate(&self, t: f64) -> f64 {
        (self.phase_rate)(t)
    }
    fn omega0(&self, t: f64) -> f64 {
        (self.omega0)(t)
    }
    fn diff_step(&self) -> f64 {
        self.step
    }
}

/// Constant Rabi frequency and transition frequency with a linear phase
/// φ(t) = ω_L t + φ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPulse {
    pub rabi: f64,
    pub omega_l: f64,
    pub phase0: f64,
    pub omega0: f64,
}

impl PulseSpec for ConstantPulse {
    fn rabi(&self, _t: f64) -> f64 {
        self.rabi
    }
    fn phase(&self, t: f64) -> f64 {
        self.omega_l * t + self.phase0
    }
    fn phase_rate(&self, _t: f64) -> f64 {
        self.omega_l
    }
    fn omega0(&self, _t: f64) -> f64 {
        self.omega0
    }
    fn rabi_rate(&self, _t: f64) -> f64 {
        0.0
    }
    fn phase_accel(&self, _t: f64) -> f64 {
        0.0
    }
    fn omega0_rate(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Largest mismatch between `phase_rate` and a central difference of `phase`
/// over the grid, relative to `max |φ̇|`.
pub fn phase_rate_mismatch(pulse: &dyn PulseSpec, grid: &TimeGrid, h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &t in grid.samples() {
        let fd = (pulse.phase(t + h) - pulse.phase(t - h)) / (2.0 * h);
        let rate = pulse.phase_rate(t);
        worst = worst.max((fd - rate).abs());
        scale = scale.max(rate.abs());
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Largest magnitudes over the grid, used by the resolution rule.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrequencyScan {
    pub max_phase_rate: f64,
    pub max_omega0: f64,
    pub max_rabi: f64,
    pub max_epsilon0: f64,
}

impl FrequencyScan {
    pub fn of(pulse: &dyn PulseSpec, grid: &TimeGrid) -> Self {
        let mut s = Self::default();
        for &t in grid.samples() {
            s.max_phase_rate = s.max_phase_rate.max(pulse.phase_rate(t).abs());
            s.max_omega0 = s.max_omega0.max(pulse.omega0(t).abs());
            s.max_rabi = s.max_rabi.max(pulse.rabi(t).abs());
            let eps = pulse.detuning(t).hypot(pulse.omega_complex(t).norm());
            s.max_epsilon0 = s.max_epsilon0.max(eps);
        }
        s
    }

    pub fn fastest(&self) -> f64 {
        self.max_phase_rate.max(self.max_omega0).max(self.max_rabi).max(self.max_epsilon0)
    }

    /// Integration steps per period of the fastest frequency.
    pub fn steps_per_period(&self, dt: f64) -> f64 {
        let w = self.fastest();
        if w == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::TAU / w / dt
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

    #[test]
    fn omega_complex_special_values() {
        let p = ConstantPulse { rabi: 1.0, omega_l: 0.0, phase0: 0.0, omega0: 0.0 };
        assert!((p.omega_complex(0.0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        let p = ConstantPulse { phase0: FRAC_PI_2, ..p };
        assert!(p.omega_complex(0.0).norm() < 1e-15);
        // 1 + e^{-iπ/2} = 1 - i
        let p = ConstantPulse { phase0: FRAC_PI_4, ..p };
        assert!((p.omega_complex(0.0) - C64::new(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn omega_complex_polar_identity() {
        let p = FnPulse::new(|t| 0.3 + t.sin(), |t| 2.0 * t * t, |t| 4.0 * t, |_| 1.0);
        for k in 0..50 {
            let t = k as f64 * 0.13;
            let phi = p.phase(t);
            let alt = 2.0 * p.rabi(t) * phi.cos() * C64::from_polar(1.0, -phi);
            assert!((p.omega_complex(t) - alt).norm() < 1e-13);
        }
    }

    #[test]
    fn detuning_is_omega0_minus_phase_rate() {
        let w = TAU * 5.0;
        let p = ConstantPulse { rabi: 0.0, omega_l: w, phase0: 0.0, omega0: w };
        assert_eq!(p.detuning(1.0), 0.0);
        let p = ConstantPulse { omega0: 0.0, omega_l: TAU * 10.0, ..p };
        assert_eq!(p.detuning(1.0), -TAU * 10.0);
    }

    #[test]
    fn numeric_rate_of_complex_coupling() {
        let p = FnPulse::new(|t| (0.5 * t).cos(), |t| 3.0 * t + 0.2 * t * t, |t| 3.0 + 0.4 * t, |_| 0.0);
        for k in 1..20 {
            let t = k as f64 * 0.2;
            let re = central_diff(|s| p.omega_complex(s).re, t, 1e-4);
            let im = central_diff(|s| p.omega_complex(s).im, t, 1e-4);
            let d = p.omega_complex_rate(t);
            assert!((d - C64::new(re, im)).norm() < 1e-8);
        }
    }

    #[test]
    fn phase_consistency_of_constant_pulse() {
        let g = make_uniform_grid(0.0, 2.0, 100).unwrap();
        let p = ConstantPulse { rabi: 1.0, omega_l: 7.0, phase0: 0.3, omega0: 7.0 };
        assert!(phase_rate_mismatch(&p, &g, 1e-5) < 1e-6);
        let bad = FnPulse::new(|_| 1.0, |t| 7.0 * t, |_| 6.0, |_| 7.0);
        assert!(phase_rate_mismatch(&bad, &g, 1e-5) > 1e-2);
    }
}
