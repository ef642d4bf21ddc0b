use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Coarse disaster category shared by documents and registry records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hazard {
    Landslide,
    Fire,
}

impl Hazard {
    pub const ALL: [Hazard; 2] = [Hazard::Landslide, Hazard::Fire];

    pub fn as_str(self) -> &'static str {
        match self {
            Hazard::Landslide => "landslide",
            Hazard::Fire => "fire",
        }
    }
}

impl fmt::Display for Hazard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hazard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "landslide" => Ok(Hazard::Landslide),
            "fire" => Ok(Hazard::Fire),
            _ => Err(Error::UnknownHazard(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_case_insensitively() {
        assert_eq!("Landslide".parse::<Hazard>().unwrap(), Hazard::Landslide);
        assert_eq!(" fire ".parse::<Hazard>().unwrap(), Hazard::Fire);
        let err = "flood".parse::<Hazard>().unwrap_err();
        assert!(err.to_string().contains("\"flood\""));
    }
}
