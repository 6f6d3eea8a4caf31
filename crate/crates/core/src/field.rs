use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Base field of the matrix group: real or complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl FieldTag {
    pub const ALL: [FieldTag; 2] = [FieldTag::Real, FieldTag::Complex];

    /// Dimension of the field over the reals.
    pub fn d(self) -> usize {
        match self {
            FieldTag::Real => 1,
            FieldTag::Complex => 2,
        }
    }

    pub fn is_complex(self) -> bool {
        self == FieldTag::Complex
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldTag::Real => "real",
            FieldTag::Complex => "complex",
        })
    }
}

impl FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(FieldTag::Real),
            "complex" | "c" => Ok(FieldTag::Complex),
            other => Err(Error::InvalidArgument(format!("unknown field `{other}`"))),
        }
    }
}
