//! TOML parameter files.
//!
//! ```toml
//! mach = 1.0
//! ratio = 3.2
//! mach_upstream = 1.8   # optional
//! det_bounds = [0.5, 2.0]   # optional
//!
//! [F]
//! f11 = 0.6
//! f12 = 0.3
//! f21 = 0.2
//! f22 = 0.4
//!
//! [solver]   # optional, overrides the interior scan window
//! n_eta = 200
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::{Deformation, LaxOptions, ShockParameters};
use crate::scan::ScanConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FTable {
    pub f11: f64,
    pub f12: f64,
    pub f21: f64,
    pub f22: f64,
}

impl From<FTable> for Deformation {
    fn from(t: FTable) -> Self {
        Deformation::new(t.f11, t.f12, t.f21, t.f22)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterFile {
    pub mach: f64,
    pub ratio: f64,
    #[serde(default)]
    pub mach_upstream: Option<f64>,
    #[serde(default)]
    pub det_bounds: Option<(f64, f64)>,
    #[serde(rename = "F", default)]
    pub deformation: FTable,
    #[serde(default)]
    pub solver: Option<ScanConfig>,
}

impl ParameterFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parameters(&self) -> Result<ShockParameters> {
        let p = ShockParameters::new(self.mach, self.ratio, self.deformation.into())?;
        match self.mach_upstream {
            Some(m) => p.with_upstream(m),
            None => Ok(p),
        }
    }

    pub fn lax_options(&self) -> LaxOptions {
        LaxOptions {
            det_bounds: self.det_bounds,
        }
    }
}
