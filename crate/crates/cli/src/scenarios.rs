//! The four scenario runners.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nrwa_core::config::ResolvedScenario;
use nrwa_core::counterdiabatic::{allen_eberly_pulse, counterdiabatic_run};
use nrwa_core::designer_few::design_few_oscillation;
use nrwa_core::designer_many::{
    chirp_gauss_pulse, objective_from_theta, optimize_inversion_with, theta_from_population, trace_csv, ChirpGaussParams, Model,
    DEFAULT_STEPS, TARGET_OBJECTIVE,
};
use nrwa_core::hamiltonian::{h_interaction, h_rwa, h_schrodinger};
use nrwa_core::invariants::AngleFn;
use nrwa_core::propagator::{propagate, PropagationResult};
use nrwa_core::pulse::FrequencyScan;
use nrwa_core::{PulseError, SharedPulse, StateVector, TimeGrid};
use serde::Serialize;

use crate::output::{render_csv, Check, Column, GridRecord, OutDir};
use crate::RunError;

/// What a runner hands back besides the files it wrote.
pub struct Outcome {
    pub grid: GridRecord,
    pub checks: Vec<Check>,
}

trait Stage<T> {
    fn at(self, stage: &'static str) -> Result<T, RunError>;
}

impl<T> Stage<T> for Result<T, PulseError> {
    fn at(self, stage: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Numerical { stage, source })
    }
}

fn io(e: std::io::Error) -> RunError {
    RunError::Io(e.to_string())
}

fn grid_record(g: &TimeGrid) -> GridRecord {
    GridRecord { t0_ns: g.t0(), tf_ns: g.tf(), n_steps: g.n_steps(), dt_ns: g.dt() }
}

fn over_2pi(xs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    xs.into_iter().map(|x| x / TAU).collect()
}

/// Runs two independent computations side by side.
fn pair<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    std::thread::scope(|s| {
        let ha = s.spawn(a);
        let rb = b();
        (ha.join().expect("worker thread panicked"), rb)
    })
}

fn last(v: &[f64]) -> f64 {
    *v.last().expect("non-empty series")
}

pub fn run_cd(r: &ResolvedScenario, out: &mut OutDir) -> Result<Outcome, RunError> {
    let pulse: SharedPulse = Arc::new(allen_eberly_pulse(r.allen_eberly_params()).at("pulse construction")?);
    let grid = r.grid_or(80_000).at("grid")?;
    let cd = counterdiabatic_run(pulse.clone(), &grid).at("counterdiabatic term")?;
    let h = h_interaction(pulse.clone());
    let (bare, corrected) =
        pair(|| propagate(&h, StateVector::ground(), &grid), || propagate(&cd.total, StateVector::ground(), &grid));
    let bare = bare.at("propagation under H")?;
    let corrected = corrected.at("propagation under H + H1")?;

    let t = grid.samples();
    let rep = &cd.repaired;
    if r.wants("phase_tilde") {
        let phi: Vec<f64> = t.iter().map(|&s| pulse.phase(s)).collect();
        let csv = render_csv(t, &[Column::Real("phi_rad", &phi), Column::Real("phi_tilde_rad", &rep.phase_tilde)]);
        out.write("phases.csv", &csv).map_err(io)?;
    }
    if r.wants("populations") {
        let csv = render_csv(
            t,
            &[
                Column::Real("p_g_h", &bare.p_g),
                Column::Real("p_g_h_plus_h1", &corrected.p_g),
                Column::Real("p_e_h", &bare.p_e),
                Column::Real("p_e_h_plus_h1", &corrected.p_e),
            ],
        );
        out.write("populations.csv", &csv).map_err(io)?;
    }
    if r.wants("omega0_tilde") {
        let w0 = over_2pi(t.iter().map(|&s| pulse.omega0(s)));
        let w0t = over_2pi(rep.omega0_tilde.iter().copied());
        let csv = render_csv(t, &[Column::Real("omega0_over_2pi_GHz", &w0), Column::Real("omega0_tilde_over_2pi_GHz", &w0t)]);
        out.write("omega0_tilde.csv", &csv).map_err(io)?;
    }
    if r.wants("field") || r.wants("rabi_tilde") {
        let field = over_2pi(rep.field.iter().copied());
        let rabi = over_2pi(rep.rabi_tilde.iter().copied());
        let csv = render_csv(
            t,
            &[
                Column::Real("field_over_2pi_GHz", &field),
                Column::Real("rabi_tilde_over_2pi_GHz", &rabi),
                Column::Flag("singular", &rep.singular),
            ],
        );
        out.write("field.csv", &csv).map_err(io)?;
    }

    let divergence = t.iter().zip(&rep.phase_tilde).map(|(&s, p)| (p - pulse.phase(s)).abs()).fold(0.0, f64::max);
    // max |2Ω̃_R cos φ̃| against max |Ω̃|; singular samples carry no information
    let product_max = (0..grid.len())
        .filter(|&k| !rep.singular[k])
        .map(|k| (2.0 * rep.rabi_tilde[k] * rep.phase_tilde[k].cos()).abs())
        .fold(0.0, f64::max);
    let field_max = rep.max_field();
    let checks = vec![
        Check::at_least("p_g_final_under_h", last(&bare.p_g), 0.9),
        Check::at_least("p_e_final_under_h_plus_h1", last(&corrected.p_e), 0.999),
        Check::above("phase_divergence_rad", divergence, 0.5),
        Check::below("phase_max_jump_rad", rep.max_phase_jump(), PI),
        Check::below("field_max_over_2pi_GHz", field_max / TAU, f64::INFINITY),
        Check::below("field_product_relative_mismatch", (product_max - field_max).abs() / field_max, 1e-9),
        Check::at_least("rabi_tilde_singular_flags", rep.singular_count() as f64, 1.0),
        Check::below("max_norm_error", bare.max_norm_error().max(corrected.max_norm_error()), 1e-8),
    ];
    Ok(Outcome { grid: grid_record(&grid), checks })
}

pub fn run_few(r: &ResolvedScenario, out: &mut OutDir) -> Result<Outcome, RunError> {
    let design = design_few_oscillation(&r.few_params()).at("inverse design")?;
    let pulse = design.pulse();
    let verification = match r.n_steps {
        Some(n) => {
            let g = r.grid_or(n).at("grid")?;
            propagate(&h_interaction(pulse.clone()), StateVector::ground(), &g).at("verification propagation")?
        }
        None => design.verification.clone(),
    };
    let grid = verification.grid.clone();
    let t = grid.samples();
    let beta = design.inverse.beta();

    if r.wants("angles") {
        let theta: Vec<f64> = t.iter().map(|&s| design.theta.value(s)).collect();
        let alpha: Vec<f64> = t.iter().map(|&s| design.alpha.value(s)).collect();
        let b: Vec<f64> = t.iter().map(|&s| beta.value(s)).collect();
        let csv = render_csv(t, &[Column::Real("theta_rad", &theta), Column::Real("alpha_rad", &alpha), Column::Real("beta_rad", &b)]);
        out.write("theta_alpha.csv", &csv).map_err(io)?;
    }
    if r.wants("field") {
        let rabi = over_2pi(t.iter().map(|&s| pulse.rabi(s)));
        let detuning = over_2pi(t.iter().map(|&s| pulse.detuning(s)));
        let field = over_2pi(t.iter().map(|&s| 2.0 * pulse.rabi(s) * pulse.phase(s).cos()));
        let csv = render_csv(
            t,
            &[
                Column::Real("rabi_over_2pi_GHz", &rabi),
                Column::Real("detuning_over_2pi_GHz", &detuning),
                Column::Real("field_over_2pi_GHz", &field),
            ],
        );
        out.write("rabi_detuning.csv", &csv).map_err(io)?;
    }
    if r.wants("populations") {
        let csv = render_csv(t, &[Column::Real("p_g", &verification.p_g), Column::Real("p_e", &verification.p_e)]);
        out.write("populations.csv", &csv).map_err(io)?;
    }
    if r.wants("omega0") {
        let w0 = over_2pi(t.iter().map(|&s| pulse.omega0(s)));
        out.write("omega0.csv", &render_csv(t, &[Column::Real("omega0_over_2pi_GHz", &w0)])).map_err(io)?;
    }
    out.write_json("design.json", &design.document()).map_err(io)?;

    let d = &design.diagnostics;
    let rabi_max = t.iter().map(|&s| pulse.rabi(s).abs()).fold(0.0, f64::max);
    let checks = vec![
        Check::below("theta_constraint_residual", d.theta_constraint_residual, 1e-9),
        Check::below("alpha_constraint_residual", d.alpha_constraint_residual, 1e-9),
        Check::below("rabi_max_over_2pi_GHz", rabi_max / TAU, f64::INFINITY),
        Check::at_least("p_e_final", last(&verification.p_e), 0.999),
        Check::below("omega0_start_abs", pulse.omega0(grid.t0()).abs(), 1e-6),
        Check::below("omega0_end_abs", pulse.omega0(grid.tf()).abs(), 1e-6),
        Check::at_least("omega0_changes_sign", if d.omega0_changes_sign { 1.0 } else { 0.0 }, 1.0),
        Check::below("max_norm_error", verification.max_norm_error(), 1e-8),
    ];
    Ok(Outcome { grid: grid_record(&grid), checks })
}

#[derive(Serialize)]
struct PointSummary {
    a_rad_per_ns2: f64,
    omega_0_rabi_rad_per_ns: f64,
    p_e_final_exact: f64,
    p_e_final_rwa: f64,
    objective_exact: f64,
}

#[derive(Serialize)]
struct SearchSummary {
    evaluations: usize,
    converged: bool,
    target_reached: bool,
    best_objective: f64,
}

#[derive(Serialize)]
struct ManySummary {
    start: PointSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimized: Option<PointSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<SearchSummary>,
}

struct Populations {
    exact: PropagationResult,
    rwa: PropagationResult,
}

impl Populations {
    fn of(params: &ChirpGaussParams, grid: &TimeGrid) -> Result<Self, RunError> {
        let pulse = chirp_gauss_pulse(*params).at("pulse construction")?.shared();
        let (exact, rwa) = pair(
            || propagate(&h_interaction(pulse.clone()), StateVector::ground(), grid),
            || propagate(&h_rwa(pulse.clone()), StateVector::ground(), grid),
        );
        Ok(Self { exact: exact.at("exact propagation")?, rwa: rwa.at("rotating-wave propagation")? })
    }

    fn csv(&self) -> String {
        let t = self.exact.grid.samples();
        render_csv(
            t,
            &[
                Column::Real("p_g_exact", &self.exact.p_g),
                Column::Real("p_g_rwa", &self.rwa.p_g),
                Column::Real("p_e_exact", &self.exact.p_e),
                Column::Real("p_e_rwa", &self.rwa.p_e),
            ],
        )
    }

    fn summary(&self, params: &ChirpGaussParams) -> PointSummary {
        let p_e = last(&self.exact.p_e);
        PointSummary {
            a_rad_per_ns2: params.a,
            omega_0_rabi_rad_per_ns: params.omega_0_rabi,
            p_e_final_exact: p_e,
            p_e_final_rwa: last(&self.rwa.p_e),
            objective_exact: objective_from_theta(theta_from_population(p_e)),
        }
    }

    /// Checks named by `expect`: `no_inversion` wants both models below 0.9,
    /// `exact_only` wants exact ≥ 0.99 and the rotating-wave model below 0.9.
    fn checks(&self, label: &str, expect: &str) -> Vec<Check> {
        let (exact, rwa) = (last(&self.exact.p_e), last(&self.rwa.p_e));
        match expect {
            "no_inversion" => vec![
                Check::below(&format!("{label}p_e_final_exact"), exact, 0.9),
                Check::below(&format!("{label}p_e_final_rwa"), rwa, 0.9),
            ],
            "exact_only" => vec![
                Check::at_least(&format!("{label}p_e_final_exact"), exact, 0.99),
                Check::below(&format!("{label}p_e_final_rwa"), rwa, 0.9),
            ],
            _ => Vec::new(),
        }
    }
}

pub fn run_many(r: &ResolvedScenario, out: &mut OutDir) -> Result<Outcome, RunError> {
    let grid = r.grid_or(DEFAULT_STEPS).at("grid")?;
    let start = r.chirp_params();
    let start_pop = Populations::of(&start, &grid)?;
    let mut checks = Vec::new();

    let summary = if r.flag("optimize") {
        let mut checkpoint_error = None;
        let mut checkpoint = |trace: &nrwa_core::designer_many::OptimizationTrace| {
            if r.wants("trace") && checkpoint_error.is_none() {
                checkpoint_error = out.write("trace.csv", &trace_csv(trace)).err();
            }
        };
        let (best, trace) =
            optimize_inversion_with(&start, &grid, r.count("budget") as usize, Model::Exact, &mut checkpoint).at("optimization")?;
        if let Some(e) = checkpoint_error {
            return Err(io(e));
        }
        if r.wants("trace") {
            out.write("trace.csv", &trace_csv(&trace)).map_err(io)?;
        }
        let best_pop = Populations::of(&best, &grid)?;
        if r.wants("populations") {
            out.write("populations_seed.csv", &start_pop.csv()).map_err(io)?;
            out.write("populations_opt.csv", &best_pop.csv()).map_err(io)?;
        }
        checks.extend(start_pop.checks("seed_", r.choice("expect")));
        checks.push(Check::below("best_objective", trace.best.objective, TARGET_OBJECTIVE));
        ManySummary {
            start: start_pop.summary(&start),
            optimized: Some(best_pop.summary(&best)),
            search: Some(SearchSummary {
                evaluations: trace.evaluations,
                converged: trace.converged,
                target_reached: trace.target_reached,
                best_objective: trace.best.objective,
            }),
        }
    } else {
        if r.wants("populations") {
            out.write("populations.csv", &start_pop.csv()).map_err(io)?;
        }
        checks.extend(start_pop.checks("", r.choice("expect")));
        ManySummary { start: start_pop.summary(&start), optimized: None, search: None }
    };
    out.write_json("summary.json", &summary).map_err(io)?;
    let norm = start_pop.exact.max_norm_error().max(start_pop.rwa.max_norm_error());
    checks.push(Check::below("max_norm_error", norm, 1e-8));
    Ok(Outcome { grid: grid_record(&grid), checks })
}

/// Steps giving 200 per period of the fastest frequency, at least 100.
fn default_custom_steps(pulse: &dyn nrwa_core::PulseSpec, tf: f64) -> usize {
    let probe = TimeGrid::uniform(0.0, tf, 100).expect("positive duration");
    let fastest = FrequencyScan::of(pulse, &probe).fastest();
    ((200.0 * fastest * tf / TAU).ceil() as usize).max(100)
}

pub fn run_custom(r: &ResolvedScenario, out: &mut OutDir) -> Result<Outcome, RunError> {
    let c = r.constant_pulse();
    let fallback = default_custom_steps(&c, r.number("tf"));
    let grid = r.grid_or(fallback).at("grid")?;
    let pulse: SharedPulse = Arc::new(c);
    let h = match r.choice("model") {
        "rwa" => h_rwa(pulse),
        "schrodinger" => h_schrodinger(pulse),
        _ => h_interaction(pulse),
    };
    let res = propagate(&h, StateVector::ground(), &grid).at("propagation")?;
    if r.wants("populations") {
        let csv = render_csv(grid.samples(), &[Column::Real("p_g", &res.p_g), Column::Real("p_e", &res.p_e)]);
        out.write("populations.csv", &csv).map_err(io)?;
    }
    let checks = vec![Check::below("max_norm_error", res.max_norm_error(), 1e-8)];
    Ok(Outcome { grid: grid_record(&grid), checks })
}
