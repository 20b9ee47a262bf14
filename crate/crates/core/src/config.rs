//! Scenario files: parsing, unit conversion and validation.
//!
//! A scenario is a JSON document
//!
//! ```json
//! {
//!   "scenario": "cd_allen_eberly",
//!   "comment": "free text",
//!   "parameters": { "omega_m": "2pi*3MHz", "t0": "0.05ns", "tf": 0.4 },
//!   "grid": { "n_steps": 80000 },
//!   "outputs": ["populations", "field"]
//! }
//! ```
//!
//! Quantities are either bare numbers, already in ns / rad/ns / rad/ns² / rad,
//! or strings in the grammar of [`crate::units`]. Everything is converted here;
//! the numerics never see a unit.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::counterdiabatic::{allen_eberly_pulse, AllenEberlyParams, Envelope};
use crate::designer_few::FewParams;
use crate::designer_many::{chirp_gauss_pulse, ChirpGaussParams, DEFAULT_STEPS};
use crate::error::{PulseError, Result};
use crate::grid::TimeGrid;
use crate::propagator::{MIN_STEPS_PER_PERIOD, WARN_STEPS_PER_PERIOD};
use crate::pulse::{ConstantPulse, FrequencyScan, PulseSpec};
use crate::units::{parse_quantity, Dimension};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    CdAllenEberly,
    InvariantFew,
    InvariantMany,
    PropagateCustom,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Self::CdAllenEberly, Self::InvariantFew, Self::InvariantMany, Self::PropagateCustom];

    pub fn name(self) -> &'static str {
        match self {
            Self::CdAllenEberly => "cd_allen_eberly",
            Self::InvariantFew => "invariant_few",
            Self::InvariantMany => "invariant_many",
            Self::PropagateCustom => "propagate_custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::CdAllenEberly => "counterdiabatic correction of an Allen-Eberly sweep, with the phase-consistent repaired pulse",
            Self::InvariantFew => "invariant-based inverse design of a few-oscillation inverting pulse",
            Self::InvariantMany => "chirped Gaussian pulse, exact vs rotating-wave populations, optional simplex optimization",
            Self::PropagateCustom => "propagation of |g> under a constant-amplitude drive",
        }
    }

    /// Example configuration shipped with the command-line tool.
    pub fn example(self) -> &'static str {
        match self {
            Self::CdAllenEberly => "configs/fig1.json",
            Self::InvariantFew => "configs/fig3.json",
            Self::InvariantMany => "configs/fig4_seed.json, fig4_opt.json, fig4_optimize.json",
            Self::PropagateCustom => "configs/custom.json",
        }
    }

    pub fn parameters(self) -> &'static [ParamSpec] {
        match self {
            Self::CdAllenEberly => CD_PARAMS,
            Self::InvariantFew => FEW_PARAMS,
            Self::InvariantMany => MANY_PARAMS,
            Self::PropagateCustom => CUSTOM_PARAMS,
        }
    }

    /// Accepted entries of `outputs`; an empty list requests all of them.
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Self::CdAllenEberly => &["populations", "phase_tilde", "omega0_tilde", "field", "rabi_tilde"],
            Self::InvariantFew => &["angles", "field", "populations", "omega0"],
            Self::InvariantMany => &["populations", "trace"],
            Self::PropagateCustom => &["populations"],
        }
    }

    /// Grid size used when the file does not give one. `None`: chosen by the run.
    pub fn default_steps(self) -> Option<usize> {
        match self {
            Self::CdAllenEberly => Some(80_000),
            Self::InvariantMany => Some(DEFAULT_STEPS),
            Self::InvariantFew | Self::PropagateCustom => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value types a parameter may take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Quantity(Dimension),
    /// Dimensionless real.
    Number,
    Count,
    Flag,
    Choice(&'static [&'static str]),
    /// List of `[time, angle]`-style pairs.
    Pairs(Dimension, Dimension),
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quantity(d) => write!(f, "{d}"),
            Self::Number => f.write_str("number"),
            Self::Count => f.write_str("non-negative integer"),
            Self::Flag => f.write_str("true/false"),
            Self::Choice(c) => write!(f, "one of {}", c.join("|")),
            Self::Pairs(a, b) => write!(f, "list of [{a}, {b}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    /// Default in config syntax; `None` marks a required key.
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn req(name: &'static str, kind: ParamKind, doc: &'static str) -> ParamSpec {
    ParamSpec { name, kind, default: None, doc }
}

const fn opt(name: &'static str, kind: ParamKind, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec { name, kind, default: Some(default), doc }
}

use Dimension::{Angle, Frequency, FrequencySquared, Time};
use ParamKind::{Choice, Count, Flag, Number, Pairs, Quantity};

const CD_PARAMS: &[ParamSpec] = &[
    req("omega_m", Quantity(Frequency), "peak Rabi frequency"),
    req("delta", Quantity(Frequency), "sweep parameter δ"),
    req("t0", Quantity(Time), "sweep time scale"),
    req("omega_l", Quantity(Frequency), "carrier frequency, φ = ω_L t"),
    req("tf", Quantity(Time), "duration"),
    opt("envelope", Choice(&["sech", "sinh_literal"]), "\"sech\"", "Rabi envelope"),
];

const FEW_PARAMS: &[ParamSpec] = &[
    req("omega_l", Quantity(Frequency), "carrier frequency, φ = ω_L t"),
    req("tf", Quantity(Time), "duration"),
    opt("shaping", Pairs(Time, Angle), "[[1,2],[1.6,2.4],[2.5,2.8],[4,2.8],[4.5,3]]", "θ values forcing a smooth ascent"),
    opt("alpha_midpoint", Quantity(Angle), "2", "α at t_f/2"),
    opt("steps_per_period", Number, "200", "verification resolution"),
];

const MANY_PARAMS: &[ParamSpec] = &[
    req("a", Quantity(FrequencySquared), "chirp slope"),
    req("omega_0_rabi", Quantity(Frequency), "peak Rabi frequency Ω₀"),
    opt("big_a", Quantity(FrequencySquared), "\"(2pi)^2*506.606MHz^2\"", "Gaussian width parameter"),
    opt("tf", Quantity(Time), "\"100ns\"", "duration"),
    opt("omega_atom", Quantity(Frequency), "\"2pi*5GHz\"", "transition frequency ω₀"),
    opt("optimize", Flag, "false", "run the simplex from (a, omega_0_rabi)"),
    opt("budget", Count, "200", "objective evaluations allowed to the simplex"),
    opt("expect", Choice(&["none", "no_inversion", "exact_only"]), "\"none\"", "population checks for the starting point"),
];

const CUSTOM_PARAMS: &[ParamSpec] = &[
    req("rabi", Quantity(Frequency), "constant Rabi frequency"),
    req("omega_l", Quantity(Frequency), "carrier frequency"),
    req("omega0", Quantity(Frequency), "transition frequency"),
    req("tf", Quantity(Time), "duration"),
    opt("phase0", Quantity(Angle), "0", "phase offset"),
    opt("model", Choice(&["exact", "rwa", "schrodinger"]), "\"exact\"", "Hamiltonian"),
];

/// A parameter after unit conversion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Count(u64),
    Flag(bool),
    Choice(String),
    Pairs(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

/// A scenario file as written. Parameters stay raw JSON until validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PulseError::Parse { input: "scenario file".into(), reason: e.to_string() })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PulseError::Parse { input: path.display().to_string(), reason: e.to_string() })?;
        Self::from_json(&text)
    }
}

/// Steps per period of the fastest frequency on the chosen grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionCheck {
    pub fastest: f64,
    pub steps_per_period: f64,
}

/// Fully converted, checked scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub parameters: BTreeMap<String, ParamValue>,
    /// `None` when the run chooses its own grid.
    pub n_steps: Option<usize>,
    pub outputs: Vec<String>,
    pub resolution: Option<ResolutionCheck>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub missing: Vec<String>,
    pub unit_violations: Vec<String>,
    pub errors: Vec<String>,
    /// Informational; do not affect `ok`.
    pub warnings: Vec<String>,
    pub resolved: Option<ResolvedScenario>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.missing.is_empty() && self.unit_violations.is_empty() && self.errors.is_empty()
    }

    /// All blocking problems, one per line.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self.missing.iter().map(|k| format!("missing parameter `{k}`")).collect();
        out.extend(self.unit_violations.iter().cloned());
        out.extend(self.errors.iter().cloned());
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.problems() {
            writeln!(f, "error: {p}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::String(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

enum Problem {
    Unit(String),
    Other(String),
}

fn quantity(name: &str, v: &Value, want: Option<Dimension>) -> Result<f64, Problem> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Problem::Other(format!("`{name}`: {n} is not representable"))),
        Value::String(s) => {
            let q = parse_quantity(s).map_err(|e| Problem::Other(format!("`{name}`: {e}")))?;
            match (q.dimension, want) {
                (None, _) => Ok(q.value),
                (Some(got), Some(w)) if got == w => Ok(q.value),
                (Some(got), Some(w)) => Err(Problem::Unit(format!("`{name}`: expected {w}, got {got} in \"{s}\""))),
                (Some(got), None) => Err(Problem::Unit(format!("`{name}`: expected a plain number, got {got} in \"{s}\""))),
            }
        }
        other => Err(Problem::Other(format!("`{name}`: expected a number or quantity string, got {}", describe(other)))),
    }
}

fn parse_param(spec: &ParamSpec, v: &Value) -> Result<ParamValue, Problem> {
    let name = spec.name;
    match spec.kind {
        ParamKind::Quantity(d) => quantity(name, v, Some(d)).map(ParamValue::Number),
        ParamKind::Number => quantity(name, v, None).map(ParamValue::Number),
        ParamKind::Count => v
            .as_u64()
            .map(ParamValue::Count)
            .ok_or_else(|| Problem::Other(format!("`{name}`: expected a non-negative integer, got {}", describe(v)))),
        ParamKind::Flag => v
            .as_bool()
            .map(ParamValue::Flag)
            .ok_or_else(|| Problem::Other(format!("`{name}`: expected true or false, got {}", describe(v)))),
        ParamKind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Ok(ParamValue::Choice(s.to_string())),
            _ => Err(Problem::Other(format!("`{name}`: expected one of {}, got {}", options.join("|"), describe(v)))),
        },
        ParamKind::Pairs(d1, d2) => {
            let bad = || Problem::Other(format!("`{name}`: expected a list of two-element lists, got {}", describe(v)));
            let items = v.as_array().ok_or_else(bad)?;
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item.as_array().map(Vec::as_slice) {
                    Some([x, y]) => out.push((quantity(name, x, Some(d1))?, quantity(name, y, Some(d2))?)),
                    _ => return Err(bad()),
                }
            }
            Ok(ParamValue::Pairs(out))
        }
    }
}

impl ResolvedScenario {
    fn value(&self, name: &str) -> &ParamValue {
        self.parameters.get(name).unwrap_or_else(|| panic!("resolved scenario lacks `{name}`"))
    }

    pub fn number(&self, name: &str) -> f64 {
        match self.value(name) {
            ParamValue::Number(x) => *x,
            ParamValue::Count(n) => *n as f64,
            other => panic!("`{name}` is not numeric: {other:?}"),
        }
    }

    pub fn count(&self, name: &str) -> u64 {
        match self.value(name) {
            ParamValue::Count(n) => *n,
            other => panic!("`{name}` is not a count: {other:?}"),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        matches!(self.value(name), ParamValue::Flag(true))
    }

    pub fn choice(&self, name: &str) -> &str {
        match self.value(name) {
            ParamValue::Choice(s) => s,
            other => panic!("`{name}` is not a choice: {other:?}"),
        }
    }

    pub fn pairs(&self, name: &str) -> &[(f64, f64)] {
        match self.value(name) {
            ParamValue::Pairs(p) => p,
            other => panic!("`{name}` is not a pair list: {other:?}"),
        }
    }

    pub fn wants(&self, output: &str) -> bool {
        self.outputs.iter().any(|o| o == output)
    }

    pub fn allen_eberly_params(&self) -> AllenEberlyParams {
        AllenEberlyParams {
            omega_m: self.number("omega_m"),
            delta_param: self.number("delta"),
            t0_param: self.number("t0"),
            tf: self.number("tf"),
            omega_l: self.number("omega_l"),
            envelope: match self.choice("envelope") {
                "sinh_literal" => Envelope::SinhLiteral,
                _ => Envelope::Sech,
            },
        }
    }

    pub fn few_params(&self) -> FewParams {
        FewParams {
            omega_l: self.number("omega_l"),
            tf: self.number("tf"),
            shaping: self.pairs("shaping").to_vec(),
            alpha_midpoint: self.number("alpha_midpoint"),
            steps_per_period: self.number("steps_per_period"),
            ..FewParams::default()
        }
    }

    pub fn chirp_params(&self) -> ChirpGaussParams {
        ChirpGaussParams {
            a: self.number("a"),
            omega_0_rabi: self.number("omega_0_rabi"),
            big_a: self.number("big_a"),
            tf: self.number("tf"),
            omega_atom: self.number("omega_atom"),
        }
    }

    pub fn constant_pulse(&self) -> ConstantPulse {
        ConstantPulse {
            rabi: self.number("rabi"),
            omega_l: self.number("omega_l"),
            phase0: self.number("phase0"),
            omega0: self.number("omega0"),
        }
    }

    /// Uniform grid on [0, t_f] with `n_steps`, or with `fallback` steps
    /// when the scenario left the choice to the run.
    pub fn grid_or(&self, fallback: usize) -> Result<TimeGrid> {
        TimeGrid::uniform(0.0, self.number("tf"), self.n_steps.unwrap_or(fallback))
    }
}

/// Semantic checks and the frequency scan, per scenario.
fn check_scenario(r: &ResolvedScenario, report: &mut ValidationReport) -> Option<ResolutionCheck> {
    let tf = r.number("tf");
    if !(tf > 0.0) {
        report.errors.push(format!("`tf` must be positive, got {tf}"));
        return None;
    }
    let scan = |pulse: &dyn PulseSpec, n: usize| -> Option<ResolutionCheck> {
        let grid = TimeGrid::uniform(0.0, tf, n).ok()?;
        let s = FrequencyScan::of(pulse, &grid);
        Some(ResolutionCheck { fastest: s.fastest(), steps_per_period: s.steps_per_period(grid.dt()) })
    };
    match r.scenario {
        Scenario::CdAllenEberly => match allen_eberly_pulse(r.allen_eberly_params()) {
            Ok(p) => scan(&p, r.n_steps?),
            Err(e) => {
                report.errors.push(e.to_string());
                None
            }
        },
        Scenario::InvariantFew => {
            let p = r.few_params();
            if !(p.omega_l > 0.0) {
                report.errors.push(format!("`omega_l` must be positive, got {}", p.omega_l));
            }
            for &(t, _) in &p.shaping {
                if !(t > 0.0 && t < tf) {
                    report.errors.push(format!("`shaping` time {t} ns lies outside (0, {tf}) ns"));
                }
            }
            if !(p.steps_per_period >= MIN_STEPS_PER_PERIOD) {
                report.errors.push(format!("`steps_per_period` must be at least {MIN_STEPS_PER_PERIOD}, got {}", p.steps_per_period));
            }
            // Ω_R and ω₀ are only known after the design; the carrier is a lower bound
            let n = r.n_steps?;
            let fastest = p.omega_l;
            Some(ResolutionCheck { fastest, steps_per_period: TAU / fastest / (tf / n as f64) })
        }
        Scenario::InvariantMany => {
            if r.count("budget") == 0 {
                report.errors.push("`budget` must be at least 1".into());
            }
            match chirp_gauss_pulse(r.chirp_params()) {
                Ok(p) => scan(&p, r.n_steps?),
                Err(e) => {
                    report.errors.push(e.to_string());
                    None
                }
            }
        }
        Scenario::PropagateCustom => {
            let n = r.n_steps?;
            scan(&r.constant_pulse(), n)
        }
    }
}

/// Checks a parsed file; never fails, the report carries every problem.
pub fn validate_scenario(config: &ScenarioConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let Some(scenario) = Scenario::from_name(&config.scenario) else {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
        report.errors.push(format!("unknown scenario `{}`; available: {}", config.scenario, names.join(", ")));
        return report;
    };

    let mut parameters = BTreeMap::new();
    for spec in scenario.parameters() {
        let default;
        let raw = match (config.parameters.get(spec.name), spec.default) {
            (Some(v), _) => v,
            (None, Some(d)) => {
                default = serde_json::from_str::<Value>(d).expect("built-in default is valid JSON");
                &default
            }
            (None, None) => {
                report.missing.push(spec.name.to_string());
                continue;
            }
        };
        match parse_param(spec, raw) {
            Ok(v) => {
                parameters.insert(spec.name.to_string(), v);
            }
            Err(Problem::Unit(m)) => report.unit_violations.push(m),
            Err(Problem::Other(m)) => report.errors.push(m),
        }
    }
    for key in config.parameters.keys() {
        if !scenario.parameters().iter().any(|s| s.name == key) {
            report.warnings.push(format!("parameter `{key}` is not used by {scenario}"));
        }
    }

    let allowed = scenario.outputs();
    for o in &config.outputs {
        if !allowed.contains(&o.as_str()) {
            report.errors.push(format!("unknown output `{o}` for {scenario}; available: {}", allowed.join(", ")));
        }
    }
    let outputs: Vec<String> =
        if config.outputs.is_empty() { allowed.iter().map(|s| s.to_string()).collect() } else { config.outputs.clone() };

    let n_steps = config.grid.n_steps.or(scenario.default_steps());
    if n_steps == Some(0) {
        report.errors.push("`grid.n_steps` must be at least 1".into());
    }
    if !report.ok() {
        return report;
    }

    let mut resolved = ResolvedScenario { scenario, parameters, n_steps, outputs, resolution: None };
    resolved.resolution = check_scenario(&resolved, &mut report);
    if let Some(res) = resolved.resolution {
        let spp = res.steps_per_period;
        if spp < MIN_STEPS_PER_PERIOD {
            report.errors.push(format!(
                "resolution: {spp:.2} steps per period of the fastest frequency {:.4} rad/ns (minimum {MIN_STEPS_PER_PERIOD})",
                res.fastest
            ));
        } else if spp < WARN_STEPS_PER_PERIOD {
            report.warnings.push(format!(
                "resolution: {spp:.2} steps per period of the fastest frequency {:.4} rad/ns (recommended {WARN_STEPS_PER_PERIOD})",
                res.fastest
            ));
        }
    }
    if report.ok() {
        report.resolved = Some(resolved);
    }
    report
}

/// Plain-text table of the scenarios, their parameters and defaults.
pub fn list_scenarios() -> String {
    let mut s = String::new();
    for sc in Scenario::ALL {
        s.push_str(&format!("{sc}\n  {}\n  example: {}\n", sc.description(), sc.example()));
        for p in sc.parameters() {
            let d = p.default.map(|d| format!("default {d}")).unwrap_or_else(|| "required".into());
            s.push_str(&format!("    {:<18} {:<44} {:<20} {}\n", p.name, p.kind.to_string(), d, p.doc));
        }
        let steps = sc.default_steps().map(|n| n.to_string()).unwrap_or_else(|| "chosen by the run".into());
        s.push_str(&format!("  grid.n_steps: {steps}\n  outputs: {}\n\n", sc.outputs().join(", ")));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ScenarioConfig {
        ScenarioConfig::from_json(
            r#"{
                "scenario": "cd_allen_eberly",
                "parameters": {"omega_m": "2pi*3MHz", "delta": "2pi*200MHz", "t0": "0.05ns",
                               "omega_l": "2pi*10GHz", "tf": "0.4ns"},
                "grid": {"n_steps": 80000},
                "outputs": ["populations"]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn complete_file_resolves() {
        let r = validate_scenario(&fig1());
        assert!(r.ok(), "{r}");
        assert!(r.warnings.is_empty());
        let s = r.resolved.unwrap();
        assert_eq!(s.number("omega_m"), 3.0 * 1e-3 * TAU);
        assert_eq!(s.choice("envelope"), "sech");
        assert_eq!(s.allen_eberly_params().tf, 0.4);
        let res = s.resolution.unwrap();
        // ω₀ = ω_L + Δ slightly exceeds the carrier, so a little under 20 000
        assert!(res.steps_per_period > 19_900.0 && res.steps_per_period < 20_000.0, "{res:?}");
    }

    #[test]
    fn missing_key_is_listed() {
        let mut c = fig1();
        c.parameters.remove("t0");
        let r = validate_scenario(&c);
        assert!(!r.ok());
        assert_eq!(r.missing, vec!["t0".to_string()]);
        assert!(r.resolved.is_none());
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let mut c = fig1();
        c.grid.n_steps = Some(10);
        let r = validate_scenario(&c);
        assert!(r.problems().iter().any(|p| p.starts_with("resolution")), "{r}");
        c.grid.n_steps = Some(50);
        let r = validate_scenario(&c);
        assert!(r.ok() && r.warnings.iter().any(|w| w.starts_with("resolution")), "{r}");
    }

    #[test]
    fn wrong_dimension_is_a_unit_violation() {
        let mut c = fig1();
        c.parameters.insert("t0".into(), Value::from("3MHz"));
        let r = validate_scenario(&c);
        assert_eq!(r.unit_violations.len(), 1, "{r}");
        assert!(r.unit_violations[0].contains("t0"));
    }

    #[test]
    fn unknown_scenario_lists_choices() {
        let mut c = fig1();
        c.scenario = "adiabatic".into();
        let r = validate_scenario(&c);
        assert!(r.errors[0].contains("cd_allen_eberly") && r.errors[0].contains("propagate_custom"));
    }

    #[test]
    fn defaults_match_library_values() {
        let c = ScenarioConfig::from_json(r#"{"scenario": "invariant_few", "parameters": {"omega_l": "2pi*500MHz", "tf": 5}}"#).unwrap();
        let r = validate_scenario(&c);
        assert!(r.ok(), "{r}");
        let s = r.resolved.unwrap();
        assert_eq!(s.few_params(), FewParams::default());
        assert_eq!(s.n_steps, None);

        let c = ScenarioConfig::from_json(r#"{"scenario": "invariant_many", "parameters": {"a": "(2pi)^2*254.648MHz^2", "omega_0_rabi": "2pi*2GHz"}}"#).unwrap();
        let s = validate_scenario(&c).resolved.unwrap();
        let (got, want) = (s.chirp_params(), ChirpGaussParams::seed());
        assert_eq!(ChirpGaussParams { big_a: want.big_a, ..got }, want);
        assert!((got.big_a / want.big_a - 1.0).abs() < 1e-15);
        assert_eq!(s.count("budget"), crate::designer_many::DEFAULT_BUDGET as u64);
        assert!(!s.flag("optimize"));
    }

    #[test]
    fn bad_values_are_reported() {
        let c = ScenarioConfig::from_json(
            r#"{"scenario": "invariant_few", "parameters": {"omega_l": "2pi*500MHz", "tf": 5, "shaping": [[6, 1]]}, "outputs": ["spectrum"]}"#,
        )
        .unwrap();
        let r = validate_scenario(&c);
        assert!(!r.ok());
        assert!(r.errors.iter().any(|e| e.contains("spectrum")), "{r}");
        assert!(ScenarioConfig::from_json(r#"{"scenario": "x", "grid": {"dt": 1}}"#).is_err());
    }

    #[test]
    fn listing_covers_every_scenario() {
        let l = list_scenarios();
        for s in Scenario::ALL {
            assert!(l.contains(s.name()));
        }
        assert!(l.contains("required"));
    }
}
