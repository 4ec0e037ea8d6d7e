//! Grading kinds: integers, rationals over a fixed denominator, residues mod d.
//!
//! Values are stored as integer numerators. For a rational kind with
//! denominator `q` the stored value `v` means `v/q`, and an integer step
//! of the grading is `q` numerator units. Residues are kept in `0..d`.

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GradingKind {
    Integer,
    Rational { denominator: i64 },
    Modular { modulus: i64 },
}

impl GradingKind {
    /// `0` encodes the integer grading; otherwise the modulus must be even.
    pub fn from_modulus(d: i64) -> Result<Self> {
        let kind = if d == 0 { GradingKind::Integer } else { GradingKind::Modular { modulus: d } };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GradingKind::Integer => Ok(()),
            GradingKind::Rational { denominator } if denominator >= 1 => Ok(()),
            GradingKind::Rational { denominator } => {
                Err(Error::InvalidGrading(format!("denominator must be positive, got {denominator}")))
            }
            GradingKind::Modular { modulus } if modulus >= 2 && modulus % 2 == 0 => Ok(()),
            GradingKind::Modular { modulus } => {
                Err(Error::InvalidGrading(format!("modulus must be even and at least 2, got {modulus}")))
            }
        }
    }

    /// Numerator units in one integer step.
    pub fn unit(&self) -> i64 {
        match *self {
            GradingKind::Rational { denominator } => denominator,
            _ => 1,
        }
    }

    pub fn normalize(&self, value: i64) -> i64 {
        match *self {
            GradingKind::Modular { modulus } => value.rem_euclid(modulus),
            _ => value,
        }
    }

    pub fn shift(&self, value: i64, delta: i64) -> i64 {
        self.normalize(value + delta)
    }

    /// `steps` integer steps, in numerator units.
    pub fn steps(&self, steps: i64) -> i64 {
        steps * self.unit()
    }

    pub fn is_modular(&self) -> bool {
        matches!(self, GradingKind::Modular { .. })
    }

    /// The stored numerator as a rational number (residues are returned as is).
    pub fn to_rational(&self, value: i64) -> Rational64 {
        Rational64::new(value, self.unit())
    }

    /// Numerator for an exact rational value, if representable in this kind.
    pub fn from_rational(&self, value: Rational64) -> Result<i64> {
        let scaled = value * Rational64::from_integer(self.unit());
        if !scaled.is_integer() {
            return Err(Error::InvalidGrading(format!("{value} is not a multiple of 1/{}", self.unit())));
        }
        Ok(self.normalize(scaled.to_integer()))
    }

    pub fn format(&self, value: i64) -> String {
        format_rational(self.to_rational(value))
    }
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format_rational(r: Rational64) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A single grading value together with its kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grading {
    pub kind: GradingKind,
    pub value: i64,
}

impl Grading {
    pub fn new(kind: GradingKind, value: i64) -> Self {
        Self { kind, value: kind.normalize(value) }
    }

    pub fn integer(value: i64) -> Self {
        Self::new(GradingKind::Integer, value)
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GradingKind::Modular { modulus } => write!(f, "{} mod {modulus}", self.value),
            _ => f.write_str(&self.kind.format(self.value)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_must_be_even() {
        assert_eq!(GradingKind::from_modulus(0).unwrap(), GradingKind::Integer);
        assert_eq!(GradingKind::from_modulus(4).unwrap(), GradingKind::Modular { modulus: 4 });
        assert!(GradingKind::from_modulus(3).is_err());
        assert!(GradingKind::Modular { modulus: 0 }.validate().is_err());
    }

    #[test]
    fn residues_wrap() {
        let k = GradingKind::Modular { modulus: 4 };
        assert_eq!(k.shift(0, -1), 3);
        assert_eq!(Grading::new(k, 7).value, 3);
    }

    #[test]
    fn rational_formatting() {
        let k = GradingKind::Rational { denominator: 4 };
        assert_eq!(k.format(-6), "-3/2");
        assert_eq!(k.format(8), "2");
        assert_eq!(k.steps(-1), -4);
        assert_eq!(k.from_rational(Rational64::new(1, 2)).unwrap(), 2);
        assert!(k.from_rational(Rational64::new(1, 3)).is_err());
    }
}
