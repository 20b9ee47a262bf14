use nrwa_core::designer_many::*;
use nrwa_core::invariants::{AngleOdeOptions, POLE_EPSILON};
use nrwa_core::TimeGrid;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

fn grid() -> TimeGrid {
    TimeGrid::uniform(0.0, 100.0, DEFAULT_STEPS).unwrap()
}

#[test]
fn seed_fails_to_invert_in_both_models() {
    let g = grid();
    let seed = ChirpGaussParams::seed();
    for m in [Model::Exact, Model::Rwa] {
        let pe = final_excited_population(&seed, &g, m).unwrap();
        assert!(pe < 0.9, "{m:?}: {pe}");
        assert!(inversion_objective(&seed, &g, m).unwrap() > 1.0);
    }
}

#[test]
fn reference_optimum_inverts_exact_model() {
    let pe = final_excited_population(&ChirpGaussParams::reference_optimum(), &grid(), Model::Exact).unwrap();
    assert!(pe >= 0.99, "{pe}");
}

#[test]
fn objective_paths_agree() {
    let g = grid();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let seed = ChirpGaussParams::seed();
    let points: Vec<(ChirpGaussParams, Model)> = (0..20)
        .map(|k| {
            let p = seed.with_point(seed.a * rng.gen_range(0.5..1.5), seed.omega_0_rabi * rng.gen_range(0.7..1.3));
            (p, if k % 2 == 0 { Model::Exact } else { Model::Rwa })
        })
        .collect();
    let worst = points
        .par_iter()
        .map(|(p, m)| {
            let a = inversion_objective(p, &g, *m).unwrap();
            let b = inversion_objective_ode(p, &g, *m, AngleOdeOptions::default()).unwrap();
            (a - b).abs()
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn regularization_is_insensitive_to_epsilon() {
    let g = grid();
    let p = ChirpGaussParams::seed();
    for m in [Model::Exact, Model::Rwa] {
        let full = inversion_objective_ode(&p, &g, m, AngleOdeOptions { pole_epsilon: Some(POLE_EPSILON), ..Default::default() }).unwrap();
        let half = inversion_objective_ode(&p, &g, m, AngleOdeOptions { pole_epsilon: Some(0.5 * POLE_EPSILON), ..Default::default() }).unwrap();
        assert!((full - half).abs() < 1e-9, "{m:?}: {:e}", full - half);
    }
}

#[test]
fn budget_of_one_returns_seed() {
    let seed = ChirpGaussParams::seed();
    let (best, trace) = optimize_inversion(&seed, &grid(), 1).unwrap();
    assert_eq!(best, seed);
    assert_eq!(trace.evaluations, 1);
    assert!(!trace.converged);
}

#[test]
fn optimization_is_deterministic_and_monotone() {
    let g = TimeGrid::uniform(0.0, 100.0, 40_000).unwrap();
    let seed = ChirpGaussParams::seed();
    let mut checkpoints = Vec::new();
    let (_, a) = optimize_inversion_with(&seed, &g, 25, Model::Exact, &mut |t| checkpoints.push(t.evaluations)).unwrap();
    let (_, b) = optimize_inversion(&seed, &g, 25).unwrap();
    assert_eq!(a, b);
    assert_eq!(checkpoints, vec![10, 20]);
    assert!(a.evaluations <= 25);
    for w in a.iterations.windows(2) {
        assert!(w[1].best_objective <= w[0].best_objective);
    }
    assert_eq!(trace_csv(&a), trace_csv(&b));
}

#[test]
fn optimizer_reaches_inversion_from_seed() {
    let g = grid();
    let (best, trace) = optimize_inversion(&ChirpGaussParams::seed(), &g, DEFAULT_BUDGET).unwrap();
    assert!(trace.evaluations <= DEFAULT_BUDGET);
    assert!(trace.best.objective < TARGET_OBJECTIVE, "{:?}", trace.best);
    assert!(trace.target_reached);
    assert!(final_excited_population(&best, &g, Model::Exact).unwrap() >= 0.99);
}
