use std::f64::consts::TAU;
use std::sync::Arc;

use nrwa_core::hamiltonian::{h_interaction, h_rwa, h_schrodinger, transform_between_pictures, Direction};
use nrwa_core::propagator::{propagate, propagate_backward, propagate_final, step_halving_error};
use nrwa_core::pulse::{FnPulse, SharedPulse};
use nrwa_core::{StateVector, TimeGrid};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

/// Resonant drive with a time-dependent envelope: the Hamiltonian commutes
/// with itself at all times, so P_e = sin²(½∫Ω_R) exactly.
fn commuting_oracle() -> (SharedPulse, impl Fn(f64) -> f64) {
    let rabi = |t: f64| 1.0 + 0.5 * (1.3 * t).sin();
    let area = |t: f64| t + 0.5 / 1.3 * (1.0 - (1.3 * t).cos());
    (Arc::new(FnPulse::new(rabi, |_| 0.0, |_| 0.0, |_| 0.0)), move |t| (0.5 * area(t)).sin().powi(2))
}

fn chirped_pulse() -> SharedPulse {
    Arc::new(FnPulse::new(
        |t| 1.2 * (-(t - 2.5f64).powi(2) / 2.0).exp(),
        |t| 8.0 * t + 0.3 * t * t,
        |t| 8.0 + 0.6 * t,
        |_| 9.0,
    ))
}

#[test]
fn observed_order_is_four() {
    let (pulse, exact) = commuting_oracle();
    let h = h_rwa(pulse);
    let tf = 10.0;
    let errs: Vec<f64> = [40, 80, 160, 320]
        .iter()
        .map(|&n| {
            let g = TimeGrid::uniform(0.0, tf, n).unwrap();
            (propagate_final(&h, StateVector::ground(), &g).unwrap().p_e() - exact(tf)).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((3.7..=4.3).contains(&order), "observed order {order}, errors {errs:?}");
    }
}

#[test]
fn order_on_non_commuting_sweep() {
    let h = h_interaction(chirped_pulse());
    let reference = propagate_final(&h, StateVector::ground(), &TimeGrid::uniform(0.0, 5.0, 40_000).unwrap()).unwrap();
    let err = |n: usize| {
        let psi = propagate_final(&h, StateVector::ground(), &TimeGrid::uniform(0.0, 5.0, n).unwrap()).unwrap();
        (psi.cg - reference.cg).norm() + (psi.ce - reference.ce).norm()
    };
    let order = (err(200) / err(400)).log2();
    assert!((3.7..=4.3).contains(&order), "observed order {order}");
}

#[test]
fn time_reversal_recovers_initial_state() {
    let h = h_interaction(chirped_pulse());
    let g = TimeGrid::uniform(0.0, 5.0, 5000).unwrap();
    let psi0 = StateVector::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    let end = propagate_final(&h, psi0, &g).unwrap();
    let back = propagate_backward(&h, end, &g).unwrap();
    assert!((back.cg - psi0.cg).norm() < 1e-7 && (back.ce - psi0.ce).norm() < 1e-7);
}

#[test]
fn schrodinger_and_interaction_pictures_agree() {
    let pulse = chirped_pulse();
    let g = TimeGrid::uniform(0.0, 5.0, 20_000).unwrap();
    let s = propagate(&h_schrodinger(pulse.clone()), StateVector::ground(), &g).unwrap();
    let i = propagate(&h_interaction(pulse.clone()), StateVector::ground(), &g).unwrap();
    let worst = s.p_g.iter().zip(&i.p_g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 2e-8, "picture mismatch {worst:e}");

    // the transformed S Hamiltonian is the interaction-picture one
    let p1 = pulse.clone();
    let p2 = pulse.clone();
    let via = transform_between_pictures(
        &h_schrodinger(pulse.clone()),
        move |t| p1.phase(t),
        move |t| p2.phase_rate(t),
        Direction::SToI,
    )
    .unwrap();
    let direct = h_interaction(pulse);
    for &t in &[0.0, 1.1, 3.7] {
        assert!((via.at(t) - direct.at(t)).frobenius() < 1e-12);
    }
}

#[test]
fn step_halving_estimate_shrinks() {
    let h = h_interaction(chirped_pulse());
    let coarse = step_halving_error(&h, StateVector::ground(), &TimeGrid::uniform(0.0, 5.0, 500).unwrap()).unwrap();
    let fine = step_halving_error(&h, StateVector::ground(), &TimeGrid::uniform(0.0, 5.0, 1000).unwrap()).unwrap();
    assert!(fine < coarse / 10.0 && fine < 1e-6, "{coarse:e} -> {fine:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_is_conserved(rabi in 0.1f64..5.0, w0 in 0.0f64..20.0, wl in 0.0f64..20.0, chirp in -1.0f64..1.0, theta in 0.0f64..3.1, phi in -3.1f64..3.1) {
        let pulse: SharedPulse = Arc::new(FnPulse::new(
            move |t| rabi * (1.0 + 0.3 * (2.0 * t).cos()),
            move |t| wl * t + chirp * t * t,
            move |t| wl + 2.0 * chirp * t,
            move |_| w0,
        ));
        let psi0 = StateVector::new(C64::from((0.5 * theta).cos()), C64::from_polar((0.5 * theta).sin(), phi));
        let fastest = rabi * 1.3 + w0 + wl + 2.0 * chirp.abs() * 3.0 + 1.0;
        let n = (fastest * 3.0 / TAU * 40.0).ceil() as usize;
        let g = TimeGrid::uniform(0.0, 3.0, n).unwrap();
        for h in [h_interaction(pulse.clone()), h_schrodinger(pulse.clone()), h_rwa(pulse)] {
            let r = propagate(&h, psi0, &g).unwrap();
            prop_assert!(r.max_norm_error() < 1e-8);
        }
    }
}
