//! Finite-difference stencils and quadrature used across the pipeline.

/// Fourth-order central first derivative with step `h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative with step `h`.
pub fn central_diff2<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (-f(t - 2.0 * h) + 16.0 * f(t - h) - 30.0 * f(t) + 16.0 * f(t + h) - f(t + 2.0 * h))
        / (12.0 * h * h)
}

/// Fourth-order first derivative of a uniformly sampled series.
///
/// Interior points use the five-point central stencil; the two samples at
/// each end use the one-sided five-point stencils.
pub fn sampled_derivative(y: &[f64], dt: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 5, "need at least five samples for a fourth-order stencil");
    let mut d = vec![0.0; n];
    for k in 2..n - 2 {
        d[k] = (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]) / (12.0 * dt);
    }
    let fwd = |k: usize| {
        (-25.0 * y[k] + 48.0 * y[k + 1] - 36.0 * y[k + 2] + 16.0 * y[k + 3] - 3.0 * y[k + 4])
            / (12.0 * dt)
    };
    let fwd1 = |k: usize| {
        (-3.0 * y[k - 1] - 10.0 * y[k] + 18.0 * y[k + 1] - 6.0 * y[k + 2] + y[k + 3]) / (12.0 * dt)
    };
    let bwd = |k: usize| {
        (25.0 * y[k] - 48.0 * y[k - 1] + 36.0 * y[k - 2] - 16.0 * y[k - 3] + 3.0 * y[k - 4])
            / (12.0 * dt)
    };
    let bwd1 = |k: usize| {
        (3.0 * y[k + 1] + 10.0 * y[k] - 18.0 * y[k - 1] + 6.0 * y[k - 2] - y[k - 3]) / (12.0 * dt)
    };
    d[0] = fwd(0);
    d[1] = fwd1(1);
    d[n - 2] = bwd1(n - 2);
    d[n - 1] = bwd(n - 1);
    d
}

/// Running integral of `f` from `t0` using Simpson's rule on each interval
/// (endpoints plus midpoint), returning one value per grid sample.
pub fn cumulative_simpson<F: Fn(f64) -> f64>(f: F, samples: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(0.0);
    let mut f_left = f(samples[0]);
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let f_right = f(b);
        acc += (b - a) / 6.0 * (f_left + 4.0 * f(0.5 * (a + b)) + f_right);
        out.push(acc);
        f_left = f_right;
    }
    out
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= tol {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_fourth_order() {
        let f = |t: f64| (3.0 * t).sin();
        let e1 = (central_diff(f, 0.5, 1e-2) - 3.0 * 1.5f64.cos()).abs();
        let e2 = (central_diff(f, 0.5, 5e-3) - 3.0 * 1.5f64.cos()).abs();
        assert!(e1 / e2 > 14.0 && e1 / e2 < 18.0, "ratio {}", e1 / e2);
        let d2 = central_diff2(f, 0.5, 1e-3);
        assert!((d2 + 9.0 * 1.5f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn sampled_derivative_matches_cosine() {
        let dt = 1e-3;
        let y: Vec<f64> = (0..1001).map(|k| (2.0 * k as f64 * dt).sin()).collect();
        let d = sampled_derivative(&y, dt);
        for (k, dk) in d.iter().enumerate() {
            let want = 2.0 * (2.0 * k as f64 * dt).cos();
            assert!((dk - want).abs() < 1e-10, "k={k}: {dk} vs {want}");
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let s: Vec<f64> = (0..=7).map(|k| k as f64 * 0.3).collect();
        let cum = cumulative_simpson(|t| t * t * t - t, &s);
        for (t, v) in s.iter().zip(&cum) {
            let want = t.powi(4) / 4.0 - t * t / 2.0;
            assert!((v - want).abs() < 1e-13);
        }
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|t| t.cos(), 1.0, 2.0, 1e-14);
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }
}
