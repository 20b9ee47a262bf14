//! Quantity strings accepted in scenario files.
//!
//! Grammar (whitespace around the pieces is ignored):
//!
//! ```text
//! quantity := [prefix] number [unit]
//! prefix   := "2pi*" | "(2pi)^2*"
//! number   := any literal accepted by Rust's `f64::from_str`
//! unit     := time | frequency | frequency² | angle
//! time     := "ps" (1e-3) | "ns" (1) | "us" / "μs" (1e3)
//! freq     := "Hz" (1e-9) | "kHz" (1e-6) | "MHz" (1e-3) | "GHz" (1) | "rad/ns" (1)
//! freq²    := "Hz^2" (1e-18) | "kHz^2" (1e-12) | "MHz^2" (1e-6) | "GHz^2" (1) | "rad/ns^2" (1)
//! angle    := "rad" (1)
//! ```
//!
//! The value is computed as `number * scale` (the multiplication is skipped
//! when the scale is exactly 1), then multiplied once by `TAU` for `2pi*` or
//! once by `TAU * TAU` for `(2pi)^2*`. Results are in ns, rad/ns, rad/ns² and
//! rad. A bare number carries no dimension and is taken as already in those
//! units.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PulseError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Time,
    Frequency,
    FrequencySquared,
    Angle,
    Dimensionless,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Time => "time (ns)",
            Self::Frequency => "angular frequency (rad/ns)",
            Self::FrequencySquared => "angular frequency squared (rad/ns^2)",
            Self::Angle => "angle (rad)",
            Self::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// A parsed quantity. `dimension` is `None` for a bare number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Option<Dimension>,
}

const UNITS: &[(&str, f64, Dimension)] = &[
    ("rad/ns^2", 1.0, Dimension::FrequencySquared),
    ("rad/ns", 1.0, Dimension::Frequency),
    ("rad", 1.0, Dimension::Angle),
    ("ps", 1e-3, Dimension::Time),
    ("ns", 1.0, Dimension::Time),
    ("us", 1e3, Dimension::Time),
    ("μs", 1e3, Dimension::Time),
    ("Hz^2", 1e-18, Dimension::FrequencySquared),
    ("kHz^2", 1e-12, Dimension::FrequencySquared),
    ("MHz^2", 1e-6, Dimension::FrequencySquared),
    ("GHz^2", 1.0, Dimension::FrequencySquared),
    ("Hz", 1e-9, Dimension::Frequency),
    ("kHz", 1e-6, Dimension::Frequency),
    ("MHz", 1e-3, Dimension::Frequency),
    ("GHz", 1.0, Dimension::Frequency),
];

fn parse_err(input: &str, reason: impl Into<String>) -> PulseError {
    PulseError::Parse { input: input.to_string(), reason: reason.into() }
}

pub fn parse_quantity(input: &str) -> Result<Quantity> {
    let s = input.trim();
    let (factor, rest) = if let Some(r) = s.strip_prefix("(2pi)^2*") {
        (Some(TAU * TAU), r.trim_start())
    } else if let Some(r) = s.strip_prefix("2pi*") {
        (Some(TAU), r.trim_start())
    } else {
        (None, s)
    };

    let split = rest
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')))
        .map(|(i, _)| i)
        .unwrap_or(rest.len());
    let (num_str, unit_str) = rest.split_at(split);
    let number: f64 = num_str
        .trim()
        .parse()
        .map_err(|_| parse_err(input, format!("`{}` is not a number", num_str.trim())))?;

    let unit_str = unit_str.trim();
    let (scale, dimension) = if unit_str.is_empty() {
        (1.0, None)
    } else {
        let (_, scale, dim) = UNITS
            .iter()
            .find(|(name, _, _)| *name == unit_str)
            .ok_or_else(|| parse_err(input, format!("unknown unit `{unit_str}`")))?;
        (*scale, Some(*dim))
    };

    if factor.is_some() && matches!(dimension, Some(Dimension::Time | Dimension::Angle)) {
        return Err(parse_err(input, "a 2pi prefix only applies to frequencies"));
    }

    let mut value = if scale == 1.0 { number } else { number * scale };
    if let Some(f) = factor {
        value *= f;
    }
    if !value.is_finite() {
        return Err(parse_err(input, "value is not finite"));
    }
    Ok(Quantity { value, dimension })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixed_frequencies() {
        let q = parse_quantity("2pi*3MHz").unwrap();
        assert_eq!(q.value, 3.0 * 1e-3 * TAU);
        assert_eq!(q.dimension, Some(Dimension::Frequency));
        let q = parse_quantity("2pi*10GHz").unwrap();
        assert_eq!(q.value, 10.0 * TAU);
        let q = parse_quantity("(2pi)^2*254.648MHz^2").unwrap();
        assert_eq!(q.value, 254.648 * 1e-6 * (TAU * TAU));
        assert_eq!(q.dimension, Some(Dimension::FrequencySquared));
    }

    #[test]
    fn times_and_bare_numbers() {
        assert_eq!(parse_quantity("0.05ns").unwrap().value, 0.05);
        assert_eq!(parse_quantity("0.1us").unwrap().value, 0.1 * 1e3);
        assert_eq!(parse_quantity(" 1.5e-3 ns ").unwrap().value, 1.5e-3);
        let q = parse_quantity("62.5").unwrap();
        assert_eq!(q.value, 62.5);
        assert_eq!(q.dimension, None);
        assert_eq!(parse_quantity("2pi*0.5").unwrap().value, 0.5 * TAU);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_quantity("fast").is_err());
        assert!(parse_quantity("3 parsecs").is_err());
        assert!(parse_quantity("2pi*3ns").is_err());
        assert!(parse_quantity("").is_err());
    }
}
