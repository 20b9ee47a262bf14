//! Adaptive Dormand–Prince 5(4) integrator with output on prescribed times.

use crate::error::{PulseError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, max_steps: 50_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `times[0]` and returns `y` at every entry of `times`.
pub fn integrate<const N: usize, F>(mut f: F, y0: [f64; N], times: &[f64], tol: Tolerances) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(times.len());
    out.push(y0);
    let mut y = y0;
    let mut t = times[0];
    let mut h = match times.get(1) {
        Some(t1) => (t1 - t).abs().min(1e-3),
        None => return Ok(out),
    };
    let mut k0 = f(t, &y);
    let mut steps = 0usize;

    for &target in &times[1..] {
        while t < target {
            if steps >= tol.max_steps {
                return Err(PulseError::Integration { t, reason: "step budget exhausted".into() });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };

            let mut k = [[0.0; N]; 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for (i, yi) in ys.iter_mut().enumerate() {
                    *yi += step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                k[s] = f(t + C[s] * step, &ys);
            }
            let mut y_new = y;
            let mut err: f64 = 0.0;
            for i in 0..N {
                y_new[i] += step * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
                let e = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            steps += 1;
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h = step * 0.1;
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(PulseError::Integration { t, reason: "non-finite derivative".into() });
                }
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k0 = k[6];
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    h = step * grow;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).max(0.1);
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(PulseError::Integration { t, reason: "step size underflow".into() });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
