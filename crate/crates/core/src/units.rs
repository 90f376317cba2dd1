use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Unit in which information quantities are reported.
///
/// Every computation in the crate runs in bits; conversion happens once, at
/// the reporting boundary, so a report never mixes units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Bits,
    Nats,
}

impl Unit {
    /// Multiplier taking a value in bits to this unit.
    pub fn per_bit(self) -> f64 {
        match self {
            Unit::Bits => 1.0,
            Unit::Nats => std::f64::consts::LN_2,
        }
    }

    pub fn from_bits(self, bits: f64) -> f64 {
        bits * self.per_bit()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Bits => "bits",
            Unit::Nats => "nats",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bits" => Ok(Unit::Bits),
            "nats" => Ok(Unit::Nats),
            other => Err(Error::InvalidInput(format!(
                "unknown unit {other:?}; expected bits or nats"
            ))),
        }
    }
}
