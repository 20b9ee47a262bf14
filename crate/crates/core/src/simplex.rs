//! Nelder–Mead downhill simplex with a hard evaluation budget.

/// Settings of the simplex search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Initial vertex offsets relative to each seed coordinate.
    pub relative_step: f64,
    /// Stop when `max f − min f` over the simplex falls below this.
    pub spread_tol: f64,
    /// Stop as soon as the best value falls below this.
    pub f_target: f64,
    pub budget: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { relative_step: 0.05, spread_tol: 1e-10, f_target: 1e-12, budget: 200 }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub best: Evaluation,
    pub history: Vec<Evaluation>,
    /// Terminated by the spread or target test rather than by the budget.
    pub converged: bool,
}

struct Budgeted<'a, F> {
    f: F,
    history: Vec<Evaluation>,
    budget: usize,
    observer: &'a mut dyn FnMut(&[Evaluation]),
}

impl<F: FnMut(&[f64]) -> f64> Budgeted<'_, F> {
    fn exhausted(&self) -> bool {
        self.history.len() >= self.budget
    }

    fn eval(&mut self, x: Vec<f64>) -> f64 {
        let mut v = (self.f)(&x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        self.history.push(Evaluation { x, f: v });
        (self.observer)(&self.history);
        v
    }
}

fn best_of(history: &[Evaluation]) -> Evaluation {
    history
        .iter()
        .fold(None::<&Evaluation>, |b, e| match b {
            Some(b) if b.f <= e.f => Some(b),
            _ => Some(e),
        })
        .expect("at least one evaluation")
        .clone()
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` from `x0`.
///
/// `observer` sees the full evaluation history after every evaluation.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: NelderMeadOptions, observer: &mut dyn FnMut(&[Evaluation])) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(opts.budget >= 1, "budget must allow at least one evaluation");
    let n = x0.len();
    let mut run = Budgeted { f, history: Vec::new(), budget: opts.budget, observer };
    let finish = |run: Budgeted<'_, F>, converged: bool| NelderMeadResult {
        best: best_of(&run.history),
        history: run.history,
        converged,
    };

    let f0 = run.eval(x0.to_vec());
    let mut simplex = vec![(x0.to_vec(), f0)];
    if f0 < opts.f_target {
        return finish(run, true);
    }
    for i in 0..n {
        if run.exhausted() {
            return finish(run, false);
        }
        let mut x = x0.to_vec();
        x[i] += if x[i] != 0.0 { opts.relative_step * x[i] } else { opts.relative_step };
        let v = run.eval(x.clone());
        simplex.push((x, v));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[n].1);
        if lo < opts.f_target || hi - lo < opts.spread_tol {
            return finish(run, true);
        }
        if run.exhausted() {
            return finish(run, false);
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v.0[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].0.clone();

        let xr = affine(&centroid, &worst, -1.0);
        let fr = run.eval(xr.clone());
        if fr < lo {
            if run.exhausted() {
                simplex[n] = (xr, fr);
                continue;
            }
            let xe = affine(&centroid, &worst, -2.0);
            let fe = run.eval(xe.clone());
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        if run.exhausted() {
            continue;
        }
        // contraction, outside or inside
        let (xc, fc) = if fr < hi {
            let xc = affine(&centroid, &xr, 0.5);
            let fc = run.eval(xc.clone());
            (xc, fc)
        } else {
            let xc = affine(&centroid, &worst, 0.5);
            let fc = run.eval(xc.clone());
            (xc, fc)
        };
        if fc < fr.min(hi) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if run.exhausted() {
                break;
            }
            let x = affine(&best, &v.0, 0.5);
            let fx = run.eval(x.clone());
            *v = (x, fx);
        }
    }
}
