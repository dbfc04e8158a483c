//! Desk surfaces the modules were tested on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Glass,
    Paper,
    Wood,
    Cement,
}

impl Surface {
    pub const ALL: [Surface; 4] = [Surface::Glass, Surface::Paper, Surface::Wood, Surface::Cement];

    /// Default sliding friction coefficient. These are fitted values, not measurements.
    pub fn friction_coefficient(self) -> f64 {
        match self {
            Surface::Glass => 0.25,
            Surface::Paper => 0.30,
            Surface::Wood => 0.35,
            Surface::Cement => 0.40,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Surface::Glass => "glass",
            Surface::Paper => "paper",
            Surface::Wood => "wood",
            Surface::Cement => "cement",
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Surface {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "glass" => Ok(Surface::Glass),
            "paper" => Ok(Surface::Paper),
            "wood" => Ok(Surface::Wood),
            "cement" => Ok(Surface::Cement),
            other => Err(format!("unknown surface '{other}'")),
        }
    }
}
