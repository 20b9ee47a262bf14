//! Polynomials on `[0, t_f]` fixed by value and first-derivative constraints.
//!
//! Internally the basis is Chebyshev polynomials in `x = 2t/t_f − 1`; the
//! monomial collocation matrix of a degree-13 interpolant is too ill
//! conditioned to meet the constraint residual. Monomial coefficients are
//! still reported, both in `s = t/t_f` and in `t`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};
use crate::invariants::AngleFn;

/// Largest admissible 2-norm condition number of the collocation matrix.
pub const MAX_CONDITION: f64 = 1e14;
/// Largest admissible constraint residual after the solve.
pub const MAX_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Value,
    Derivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub time: f64,
    pub target: f64,
}

/// Constraints on a polynomial over `[0, tf]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub tf: f64,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(tf: f64) -> Result<Self> {
        if !(tf.is_finite() && tf > 0.0) {
            return Err(PulseError::InvalidParameter { name: "tf".into(), reason: format!("must be positive, got {tf}") });
        }
        Ok(Self { tf, constraints: Vec::new() })
    }

    /// Adds a constraint, rejecting times outside `[0, tf]` and repeated
    /// (kind, time) pairs.
    pub fn push(&mut self, kind: ConstraintKind, time: f64, target: f64) -> Result<()> {
        if !(time >= 0.0 && time <= self.tf) || !target.is_finite() {
            return Err(PulseError::Constraints(format!("{kind:?} constraint at t = {time} outside [0, {}]", self.tf)));
        }
        let tol = 1e-12 * self.tf;
        if self.constraints.iter().any(|c| c.kind == kind && (c.time - time).abs() <= tol) {
            return Err(PulseError::Constraints(format!("duplicate {kind:?} constraint at t = {time}")));
        }
        self.constraints.push(Constraint { kind, time, target });
        Ok(())
    }

    pub fn value(mut self, time: f64, target: f64) -> Result<Self> {
        self.push(ConstraintKind::Value, time, target)?;
        Ok(self)
    }

    pub fn derivative(mut self, time: f64, target: f64) -> Result<Self> {
        self.push(ConstraintKind::Derivative, time, target)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Errors unless there is exactly one constraint per coefficient.
    pub fn require_square(&self, degree: usize) -> Result<()> {
        if self.len() != degree + 1 {
            return Err(PulseError::Constraints(format!(
                "degree {degree} needs {} constraints, got {}",
                degree + 1,
                self.len()
            )));
        }
        Ok(())
    }

    /// Largest violation of the constraints by `p`.
    pub fn max_residual(&self, p: &PolynomialAnsatz) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let got = match c.kind {
                    ConstraintKind::Value => p.eval(c.time),
                    ConstraintKind::Derivative => p.derivative(1, c.time),
                };
                (got - c.target).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `p(t) = Σ c_n T_n(x)`, with Chebyshev polynomials `T_n` in
/// `x = 2t/t_f − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialAnsatz {
    pub tf: f64,
    pub chebyshev_coefficients: Vec<f64>,
    /// Condition number of the collocation matrix used to obtain them.
    pub condition: f64,
}

/// `T_n^{(k)}(x)` for n ≤ degree and k ≤ order, from
/// `T^{(k)}_{n+1} = 2k T^{(k−1)}_n + 2x T^{(k)}_n − T^{(k)}_{n−1}`.
fn chebyshev_table(x: f64, degree: usize, order: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; degree + 1]; order + 1];
    t[0][0] = 1.0;
    if degree >= 1 {
        t[0][1] = x;
        if order >= 1 {
            t[1][1] = 1.0;
        }
    }
    for n in 1..degree {
        for k in 0..=order {
            let lower = if k > 0 { 2.0 * k as f64 * t[k - 1][n] } else { 0.0 };
            t[k][n + 1] = lower + 2.0 * x * t[k][n] - t[k][n - 1];
        }
    }
    t
}

impl PolynomialAnsatz {
    pub fn from_chebyshev(tf: f64, chebyshev_coefficients: Vec<f64>) -> Self {
        Self { tf, chebyshev_coefficients, condition: 1.0 }
    }

    pub fn degree(&self) -> usize {
        self.chebyshev_coefficients.len().saturating_sub(1)
    }

    /// Coefficients `c_n` of `Σ c_n s^n` with `s = t/t_f`.
    pub fn scaled_coefficients(&self) -> Vec<f64> {
        let n = self.chebyshev_coefficients.len();
        // monomial expansions of T_k(2s − 1)
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        let mut out = vec![0.0; n];
        prev[0] = 1.0;
        if n > 1 {
            cur[0] = -1.0;
            cur[1] = 2.0;
        }
        for (k, &c) in self.chebyshev_coefficients.iter().enumerate() {
            let basis = if k == 0 { &prev } else { &cur };
            for (o, b) in out.iter_mut().zip(basis) {
                *o += c * b;
            }
            if k >= 1 && k + 1 < n {
                let mut next = vec![0.0; n];
                for j in 0..n {
                    let shifted = if j > 0 { cur[j - 1] } else { 0.0 };
                    next[j] = 2.0 * (2.0 * shifted - cur[j]) - prev[j];
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }

    /// Coefficients `a_n` of `Σ a_n t^n` (t in ns).
    pub fn raw_coefficients(&self) -> Vec<f64> {
        self.scaled_coefficients()
            .iter()
            .enumerate()
            .map(|(n, c)| c / self.tf.powi(n as i32))
            .collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// The `order`-th time derivative.
    pub fn derivative(&self, order: usize, t: f64) -> f64 {
        let x = 2.0 * t / self.tf - 1.0;
        let table = chebyshev_table(x, self.degree(), order);
        let sum: f64 = self.chebyshev_coefficients.iter().zip(&table[order]).map(|(c, b)| c * b).sum();
        sum * (2.0 / self.tf).powi(order as i32)
    }
}

impl AngleFn for PolynomialAnsatz {
    fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }
    fn rate(&self, t: f64) -> f64 {
        self.derivative(1, t)
    }
    fn accel(&self, t: f64) -> f64 {
        self.derivative(2, t)
    }
}

fn row(kind: ConstraintKind, t: f64, degree: usize, tf: f64) -> Vec<f64> {
    let x = 2.0 * t / tf - 1.0;
    match kind {
        ConstraintKind::Value => chebyshev_table(x, degree, 0).swap_remove(0),
        ConstraintKind::Derivative => chebyshev_table(x, degree, 1)[1].iter().map(|v| v * 2.0 / tf).collect(),
    }
}

/// Solves the square collocation system for a polynomial of `degree`.
pub fn solve_polynomial(constraints: &ConstraintSet, degree: usize) -> Result<PolynomialAnsatz> {
    constraints.require_square(degree)?;
    let n = degree + 1;
    let tf = constraints.tf;
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, c) in constraints.constraints.iter().enumerate() {
        for (j, v) in row(c.kind, c.time, degree, tf).into_iter().enumerate() {
            m[(i, j)] = v;
        }
        rhs[i] = c.target;
    }
    let sv = m.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(PulseError::IllConditioned { condition });
    }
    let coeffs = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| PulseError::Constraints("collocation matrix is singular".into()))?;
    let p = PolynomialAnsatz { tf, chebyshev_coefficients: coeffs.iter().copied().collect(), condition };
    let res = constraints.max_residual(&p);
    if !(res < MAX_RESIDUAL) {
        return Err(PulseError::Constraints(format!("constraint residual {res:.3e} after solve (condition {condition:.3e})")));
    }
    Ok(p)
}
