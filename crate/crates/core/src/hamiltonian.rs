//! Two-level Hamiltonians in the Schrödinger, field-adapted interaction and
//! rotating-wave pictures, the phase transformation between them, and the
//! closed-form eigensystem of the interaction-picture Hamiltonian.
//!
//! ħ = 1 throughout, so matrix elements are angular frequencies (rad/ns).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};
use crate::grid::TimeGrid;
use crate::linalg::{Mat2, StateVector, ONE};
use crate::pulse::{PulseSpec, SharedPulse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Picture {
    /// Schrödinger picture of the bare atom in the field.
    S,
    /// Field-adapted interaction picture.
    I,
    /// Interaction picture with the counterdiabatic term added.
    IPrime,
    /// Schrödinger picture reached from `IPrime` through the repaired phase.
    SDoublePrime,
    /// Rotating-wave approximation.
    Rwa,
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::S => "S",
            Self::I => "I",
            Self::IPrime => "I'",
            Self::SDoublePrime => "S''",
            Self::Rwa => "RWA",
        };
        f.write_str(s)
    }
}

type MatrixFn = Arc<dyn Fn(f64) -> Mat2 + Send + Sync>;

/// A time-dependent 2×2 Hermitian operator tagged with its picture.
#[derive(Clone)]
pub struct Hamiltonian2x2 {
    picture: Picture,
    element_fn: MatrixFn,
}

impl fmt::Debug for Hamiltonian2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian2x2").field("picture", &self.picture).finish_non_exhaustive()
    }
}

impl Hamiltonian2x2 {
    pub fn new(picture: Picture, f: impl Fn(f64) -> Mat2 + Send + Sync + 'static) -> Self {
        Self { picture, element_fn: Arc::new(f) }
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn at(&self, t: f64) -> Mat2 {
        (self.element_fn)(t)
    }

    /// `−H(t_end − s)`: drives the state backwards from `t_end` as `s` grows.
    pub fn time_reversed(&self, t_end: f64) -> Self {
        let f = self.element_fn.clone();
        Self::new(self.picture, move |s| -f(t_end - s))
    }

    pub fn with_picture(self, picture: Picture) -> Self {
        Self { picture, ..self }
    }

    /// Largest relative Hermiticity defect over the given times.
    pub fn max_hermiticity_error(&self, times: impl IntoIterator<Item = f64>) -> f64 {
        times.into_iter().map(|t| self.at(t).hermiticity_error()).fold(0.0, f64::max)
    }
}

/// Δ(t) = ω₀(t) − φ̇(t)
pub fn detuning(pulse: &dyn PulseSpec, t: f64) -> f64 {
    pulse.detuning(t)
}

/// Ω(t) = Ω_R(t)(1 + e^{−2iφ(t)})
pub fn omega_complex(pulse: &dyn PulseSpec, t: f64) -> C64 {
    pulse.omega_complex(t)
}

/// Exact interaction-picture Hamiltonian `½[[−Δ, Ω], [Ω*, Δ]]`.
pub fn h_interaction(pulse: SharedPulse) -> Hamiltonian2x2 {
    Hamiltonian2x2::new(Picture::I, move |t| {
        let d = pulse.detuning(t);
        Mat2::hermitian(-0.5 * d, 0.5 * pulse.omega_complex(t), 0.5 * d)
    })
}

/// Schrödinger-picture Hamiltonian: diagonal ∓ω₀/2, real coupling Ω_R cos φ.
pub fn h_schrodinger(pulse: SharedPulse) -> Hamiltonian2x2 {
    Hamiltonian2x2::new(Picture::S, move |t| {
        let w = pulse.omega0(t);
        let c = pulse.rabi(t) * pulse.phase(t).cos();
        Mat2::hermitian(-0.5 * w, C64::from(c), 0.5 * w)
    })
}

/// Rotating-wave Hamiltonian `½[[−Δ, Ω_R], [Ω_R, Δ]]`; φ enters only through Δ.
pub fn h_rwa(pulse: SharedPulse) -> Hamiltonian2x2 {
    Hamiltonian2x2::new(Picture::Rwa, move |t| {
        let d = pulse.detuning(t);
        Mat2::hermitian(-0.5 * d, C64::from(0.5 * pulse.rabi(t)), 0.5 * d)
    })
}

/// U_φ = diag(e^{iφ/2}, e^{−iφ/2}) on (|g⟩, |e⟩).
pub fn u_phi(phase: f64) -> Mat2 {
    Mat2::diag(C64::from_polar(1.0, 0.5 * phase), C64::from_polar(1.0, -0.5 * phase))
}

/// H_φ = (φ̇/2)(|e⟩⟨e| − |g⟩⟨g|)
pub fn h_phi(phase_rate: f64) -> Mat2 {
    Mat2::diag(C64::from(-0.5 * phase_rate), C64::from(0.5 * phase_rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    SToI,
    IToS,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Applies `H_I = U_φ†(H_S − H_φ)U_φ` or its inverse `H_S = U_φ H_I U_φ† + H_φ`.
///
/// S ↔ I and S″ ↔ I′ are the admissible pairs.
pub fn transform_between_pictures(
    h: &Hamiltonian2x2,
    phase_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
    phase_rate_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
    direction: Direction,
) -> Result<Hamiltonian2x2> {
    let target = match (direction, h.picture()) {
        (Direction::SToI, Picture::S) => Picture::I,
        (Direction::SToI, Picture::SDoublePrime) => Picture::IPrime,
        (Direction::IToS, Picture::I) => Picture::S,
        (Direction::IToS, Picture::IPrime) => Picture::SDoublePrime,
        (d, p) => {
            return Err(PulseError::PictureMismatch(format!(
                "cannot apply {d:?} to a Hamiltonian in picture {p}"
            )))
        }
    };
    let phase: ScalarFn = Arc::new(phase_fn);
    let rate: ScalarFn = Arc::new(phase_rate_fn);
    let src = h.clone();
    Ok(Hamiltonian2x2::new(target, move |t| {
        let u = u_phi(phase(t));
        let hp = h_phi(rate(t));
        match direction {
            Direction::SToI => u.adjoint() * (src.at(t) - hp) * u,
            Direction::IToS => u * src.at(t) * u.adjoint() + hp,
        }
    }))
}

/// Instantaneous eigensystem of an interaction-picture Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub epsilon0: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub v_plus: StateVector,
    pub v_minus: StateVector,
    /// Set when ε₀ = 0 and the canonical pair (|g⟩, |e⟩) is returned.
    pub degenerate: bool,
}

impl EigenSystem {
    /// Largest residual `‖H v − E v‖` over both eigenpairs.
    pub fn residual(&self, h: &Mat2) -> f64 {
        let r = |v: &StateVector, e: f64| {
            let hv = h.apply(v);
            StateVector::new(hv.cg - e * v.cg, hv.ce - e * v.ce).norm()
        };
        r(&self.v_plus, self.e_plus).max(r(&self.v_minus, self.e_minus))
    }
}

/// Relative size of |Ω| below which the bare-basis limit is used.
const BARE_LIMIT: f64 = 1e-12;

/// Eigenvalues ±ε₀/2 and eigenvectors of `½[[−Δ, Ω], [Ω*, Δ]]`.
///
/// Eigenvectors follow the normalization with a real, non-negative |e⟩
/// component, `|±⟩ ∝ (−(Δ ∓ ε₀)/Ω*, 1)`, written in a cancellation-free form.
pub fn eigensystem(h: &Hamiltonian2x2, t: f64) -> EigenSystem {
    eigensystem_of(&h.at(t))
}

pub fn eigensystem_of(m: &Mat2) -> EigenSystem {
    let delta = m.ee.re - m.gg.re;
    let omega = m.ge + m.eg.conj();
    let abs_omega = omega.norm();
    let eps = delta.hypot(abs_omega);
    let shift = 0.5 * (m.gg.re + m.ee.re);

    if eps == 0.0 {
        return EigenSystem {
            epsilon0: 0.0,
            e_plus: shift,
            e_minus: shift,
            v_plus: StateVector::ground(),
            v_minus: StateVector::excited(),
            degenerate: true,
        };
    }

    let (v_plus, v_minus) = if abs_omega < BARE_LIMIT * eps {
        if delta > 0.0 {
            (StateVector::excited(), StateVector::ground())
        } else {
            (StateVector::ground(), StateVector::excited())
        }
    } else {
        // x± = −(Δ ∓ ε₀), computed without cancellation
        let (x_plus, x_minus) = if delta >= 0.0 {
            (abs_omega * abs_omega / (delta + eps), -(delta + eps))
        } else {
            (eps - delta, -(abs_omega * abs_omega) / (eps - delta))
        };
        let unit = omega / abs_omega;
        let vec = |x: f64| {
            let n = x.hypot(abs_omega);
            StateVector::new(unit * (x / n), C64::from(abs_omega / n))
        };
        (vec(x_plus), vec(x_minus))
    };

    EigenSystem {
        epsilon0: eps,
        e_plus: shift + 0.5 * eps,
        e_minus: shift - 0.5 * eps,
        v_plus,
        v_minus,
        degenerate: false,
    }
}

/// Eigensystems along a grid with eigenvector signs chosen to maximize
/// overlap with the previous sample.
pub fn eigenbasis_along(h: &Hamiltonian2x2, grid: &TimeGrid) -> Vec<EigenSystem> {
    let mut out: Vec<EigenSystem> = Vec::with_capacity(grid.len());
    for &t in grid.samples() {
        let mut es = eigensystem(h, t);
        if let Some(prev) = out.last() {
            if prev.v_plus.inner(&es.v_plus).re < 0.0 {
                es.v_plus = es.v_plus.scale(-ONE);
            }
            if prev.v_minus.inner(&es.v_minus).re < 0.0 {
                es.v_minus = es.v_minus.scale(-ONE);
            }
        }
        out.push(es);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use crate::pulse::{ConstantPulse, FnPulse};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};

    fn shared<P: PulseSpec + 'static>(p: P) -> SharedPulse {
        Arc::new(p)
    }

    fn wiggly() -> SharedPulse {
        shared(FnPulse::new(
            |t| 0.7 + 0.4 * (1.3 * t).sin(),
            |t| 9.0 * t + 0.3 * t * t,
            |t| 9.0 + 0.6 * t,
            |t| 8.0 + (0.5 * t).cos(),
        ))
    }

    #[test]
    fn interaction_picture_special_cases() {
        let zero = h_interaction(shared(ConstantPulse { rabi: 0.0, omega_l: 3.0, phase0: 0.0, omega0: 3.0 }));
        assert!(zero.at(0.7).frobenius() < 1e-15);

        let p = shared(FnPulse::new(|_| 2.0, |_| 0.0, |_| 0.0, |_| 3.0));
        let h = h_interaction(p);
        let es = eigensystem(&h, 0.0);
        // Δ = 3, Ω = 2Ω_R = 4
        assert!((es.epsilon0 - 5.0).abs() < 1e-14);
        assert!((es.e_plus - 2.5).abs() < 1e-14 && (es.e_minus + 2.5).abs() < 1e-14);
    }

    #[test]
    fn schrodinger_picture_coupling() {
        let p = ConstantPulse { rabi: 1.5, omega_l: 0.0, phase0: FRAC_PI_2, omega0: 2.0 };
        let h = h_schrodinger(shared(p)).at(0.0);
        assert!(h.ge.norm() < 1e-15);
        assert_eq!(h.gg.re, -1.0);
        assert_eq!(h.ee.re, 1.0);
        let bare = h_schrodinger(shared(ConstantPulse { rabi: 0.0, ..p })).at(0.3);
        assert_eq!(bare.ge, C64::from(0.0));
    }

    #[test]
    fn rwa_drops_phase_from_coupling() {
        let h = h_rwa(wiggly());
        for k in 0..20 {
            let t = 0.1 * k as f64;
            let m = h.at(t);
            assert_eq!(m.ge.im, 0.0);
            assert!((m.ge.re - 0.5 * (0.7 + 0.4 * (1.3 * t).sin())).abs() < 1e-15);
        }
    }

    #[test]
    fn u_phi_values() {
        assert!((u_phi(0.0) - Mat2::identity()).frobenius() < 1e-15);
        assert!((u_phi(TAU) + Mat2::identity()).frobenius() < 1e-15);
        let u = u_phi(0.83);
        assert!((u.adjoint() * u - Mat2::identity()).frobenius() < 1e-15);
    }

    #[test]
    fn schrodinger_to_interaction_reproduces_structure() {
        let pulse = wiggly();
        let hs = h_schrodinger(pulse.clone());
        let (p1, p2) = (pulse.clone(), pulse.clone());
        let hi = transform_between_pictures(&hs, move |t| p1.phase(t), move |t| p2.phase_rate(t), Direction::SToI).unwrap();
        assert_eq!(hi.picture(), Picture::I);
        let direct = h_interaction(pulse);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..5.0);
            let (a, b) = (hi.at(t), direct.at(t));
            assert!((a - b).frobenius() <= 1e-12 * b.frobenius().max(1.0));
        }
    }

    #[test]
    fn round_trip_and_h_phi_itself() {
        let pulse = wiggly();
        let hs = h_schrodinger(pulse.clone());
        let (p1, p2, p3, p4) = (pulse.clone(), pulse.clone(), pulse.clone(), pulse.clone());
        let hi = transform_between_pictures(&hs, move |t| p1.phase(t), move |t| p2.phase_rate(t), Direction::SToI).unwrap();
        let back = transform_between_pictures(&hi, move |t| p3.phase(t), move |t| p4.phase_rate(t), Direction::IToS).unwrap();
        assert_eq!(back.picture(), Picture::S);
        for k in 0..50 {
            let t = 0.09 * k as f64;
            assert!((back.at(t) - hs.at(t)).frobenius() < 1e-12 * hs.at(t).frobenius().max(1.0));
        }

        let p5 = pulse.clone();
        let only_phi = Hamiltonian2x2::new(Picture::S, move |t| h_phi(p5.phase_rate(t)));
        let (p6, p7) = (pulse.clone(), pulse);
        let z = transform_between_pictures(&only_phi, move |t| p6.phase(t), move |t| p7.phase_rate(t), Direction::SToI).unwrap();
        assert!(z.at(1.1).frobenius() < 1e-15);
    }

    #[test]
    fn transform_rejects_wrong_picture() {
        let h = h_rwa(wiggly());
        assert!(transform_between_pictures(&h, |t| t, |_| 1.0, Direction::SToI).is_err());
        let hi = h_interaction(wiggly());
        assert!(transform_between_pictures(&hi, |t| t, |_| 1.0, Direction::SToI).is_err());
    }

    #[test]
    fn eigenvectors_symmetric_case() {
        let m = Mat2::hermitian(0.0, C64::from(0.8), 0.0);
        let es = eigensystem_of(&m);
        assert!((es.v_plus.cg - C64::from(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((es.v_plus.ce - C64::from(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(!es.degenerate);
    }

    #[test]
    fn eigenvectors_far_detuned_limit() {
        // Δ/|Ω| = 1e6 with Δ > 0
        let m = Mat2::hermitian(-0.5, C64::new(0.5e-6, 0.0), 0.5);
        let es = eigensystem_of(&m);
        assert!(es.v_plus.p_e() > 1.0 - 1e-6);
        assert!(es.v_minus.p_g() > 1.0 - 1e-6);
        assert!(es.residual(&m) < 1e-10 * es.epsilon0);
    }

    #[test]
    fn degenerate_point_flagged() {
        let es = eigensystem_of(&Mat2::zero());
        assert!(es.degenerate);
        assert_eq!(es.v_plus, StateVector::ground());
        assert_eq!(es.epsilon0, 0.0);
        let bare = eigensystem_of(&Mat2::hermitian(0.4, C64::from(0.0), -0.4));
        assert!(!bare.degenerate);
        assert_eq!(bare.v_plus, StateVector::ground());
    }

    #[test]
    fn random_hamiltonians_are_hermitian_and_eigen_consistent() {
        let pulse = wiggly();
        let hs = [h_interaction(pulse.clone()), h_schrodinger(pulse.clone()), h_rwa(pulse)];
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for h in &hs {
            let times: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..10.0)).collect();
            assert!(h.max_hermiticity_error(times.iter().copied()) < 1e-12);
        }
        for _ in 0..1000 {
            let m = Mat2::hermitian(rng.gen_range(-3.0..3.0), C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), 0.0);
            let m = m - Mat2::identity().scale_re(0.5 * (m.gg.re + m.ee.re));
            let es = eigensystem_of(&m);
            assert!(es.epsilon0 >= 0.0);
            assert!(es.residual(&m) < 1e-10 * es.epsilon0.max(1.0));
            assert!(es.v_plus.inner(&es.v_minus).norm() < 1e-12);
            assert!((es.v_plus.norm() - 1.0).abs() < 1e-12 && (es.v_minus.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenbasis_is_continuous_along_grid() {
        let h = h_interaction(wiggly());
        let g = make_uniform_grid(0.0, 3.0, 3000).unwrap();
        let basis = eigenbasis_along(&h, &g);
        for w in basis.windows(2) {
            assert!(w[0].v_plus.inner(&w[1].v_plus).re > 0.0);
        }
    }
}
