//! Validated scalar newtypes shared by the model and the simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{finite, non_negative, ModelError, Result};

/// A non-negative, finite rate in bits per second.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn new(bps: f64) -> Result<Self> {
        non_negative("rate", bps).map(Rate)
    }

    pub fn from_mbps(mbps: f64) -> Result<Self> {
        Self::new(mbps * 1e6)
    }

    #[inline]
    pub fn bps(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn mbps(self) -> f64 {
        self.0 / 1e6
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    pub fn min(self, other: Rate) -> Rate {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rate) -> Rate {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl TryFrom<f64> for Rate {
    type Error = ModelError;

    fn try_from(value: f64) -> Result<Self> {
        Rate::new(value)
    }
}

impl From<Rate> for f64 {
    fn from(r: Rate) -> f64 {
        r.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} Mbps", self.mbps())
    }
}

/// A probability (or a relative rate reduction) in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        let value = finite("probability", value)?;
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(ModelError::OutOfUnitInterval {
                what: "probability",
                value,
            })
        }
    }

    /// Clamps a finite value into `[0, 1]`. Non-finite input maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Probability(0.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    #[inline]
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = ModelError;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
