//! Design and verification of faster-than-adiabatic population-inversion
//! pulses for a two-level atom driven beyond the rotating-wave approximation.
//!
//! Units: time in ns, angular frequencies in rad/ns, ħ = 1.

pub mod config;
pub mod counterdiabatic;
pub mod designer_few;
pub mod designer_many;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod invariants;
pub mod linalg;
pub mod numeric;
pub mod ode;
pub mod polynomial;
pub mod propagator;
pub mod pulse;
pub mod simplex;
pub mod units;

pub use error::{PulseError, Result};
pub use grid::{make_uniform_grid, TimeGrid};
pub use hamiltonian::{Hamiltonian2x2, Picture};
pub use linalg::{Mat2, StateVector};
pub use pulse::{PulseSpec, SharedPulse};
