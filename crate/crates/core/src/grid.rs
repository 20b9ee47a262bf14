use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};

/// Uniform time grid on `[t0, tf]` with `n_steps` intervals (times in ns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    n_steps: usize,
    #[serde(skip)]
    samples: Vec<f64>,
}

/// Builds a uniform grid with `n_steps + 1` samples whose last sample is exactly `tf`.
pub fn make_uniform_grid(t0: f64, tf: f64, n_steps: usize) -> Result<TimeGrid> {
    TimeGrid::uniform(t0, tf, n_steps)
}

impl TimeGrid {
    pub fn uniform(t0: f64, tf: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() || !tf.is_finite() {
            return Err(PulseError::InvalidGrid(format!("non-finite endpoints ({t0}, {tf})")));
        }
        if tf <= t0 {
            return Err(PulseError::InvalidGrid(format!("tf = {tf} must exceed t0 = {t0}")));
        }
        if n_steps < 1 {
            return Err(PulseError::InvalidGrid("n_steps must be at least 1".into()));
        }
        let dt = (tf - t0) / n_steps as f64;
        let mut samples: Vec<f64> = (0..=n_steps).map(|k| t0 + k as f64 * dt).collect();
        samples[n_steps] = tf;
        Ok(Self { t0, tf, n_steps, samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        (self.tf - self.t0) / self.n_steps as f64
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same interval with twice as many steps.
    pub fn refined(&self) -> Self {
        Self::uniform(self.t0, self.tf, 2 * self.n_steps).expect("refining a valid grid")
    }

    /// Rebuilds the sample vector after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        Self::uniform(self.t0, self.tf, self.n_steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_steps_on_point_four() {
        let g = make_uniform_grid(0.0, 0.4, 4).unwrap();
        let want = [0.0, 0.1, 0.2, 0.3, 0.4];
        assert_eq!(g.len(), 5);
        for (a, b) in g.samples().iter().zip(want) {
            assert!((a - b).abs() < 1e-16, "{a} vs {b}");
        }
    }

    #[test]
    fn single_step_is_endpoints() {
        let g = make_uniform_grid(0.0, 5.0, 1).unwrap();
        assert_eq!(g.samples(), &[0.0, 5.0]);
    }

    #[test]
    fn fine_grid_resolves_ten_ghz() {
        let g = make_uniform_grid(0.0, 0.4, 80_000).unwrap();
        assert!((g.dt() - 5e-6).abs() < 1e-20);
        let omega_l = std::f64::consts::TAU * 10.0;
        let per_period = std::f64::consts::TAU / omega_l / g.dt();
        assert!((per_period - 20_000.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_uniform_grid(f64::NAN, 1.0, 4).is_err());
        assert!(make_uniform_grid(0.0, f64::INFINITY, 4).is_err());
        assert!(make_uniform_grid(1.0, 1.0, 4).is_err());
        assert!(make_uniform_grid(2.0, 1.0, 4).is_err());
        assert!(make_uniform_grid(0.0, 1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn uniform_and_increasing(t0 in -10.0f64..10.0, len in 1e-3f64..100.0, n in 1usize..5000) {
            let g = make_uniform_grid(t0, t0 + len, n).unwrap();
            let s = g.samples();
            prop_assert_eq!(s.len(), n + 1);
            prop_assert_eq!(s[0], t0);
            prop_assert_eq!(s[n], t0 + len);
            let dt = g.dt();
            for k in 1..s.len() {
                prop_assert!(s[k] > s[k - 1]);
                let eps = f64::EPSILON * (t0.abs() + len) * 4.0;
                prop_assert!(((s[k] - s[k - 1]) - dt).abs() <= eps);
            }
        }
    }
}
