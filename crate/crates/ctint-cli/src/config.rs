//! Optional TOML run configs. Keys mirror the command's flags and take
//! precedence over them; unknown keys are rejected with the key named.

use std::path::{Path, PathBuf};

use ctint::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::parse::parse_complex;

/// A value that may be written as a TOML number or as a complex-number
/// string like `"0.5-0.5i"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Str(String),
}

impl Scalar {
    pub fn to_complex(&self, what: &str, index: usize) -> Result<Complex64, String> {
        match self {
            Scalar::Num(v) => Ok(Complex64::new(*v, 0.0)),
            Scalar::Str(s) => {
                parse_complex(s).map_err(|e| format!("{what} entry {}: {e}", index + 1))
            }
        }
    }
}

/// Converts a config list of scalars into complex values.
pub fn scalars_to_complex(values: &[Scalar], what: &str) -> Result<Vec<Complex64>, String> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v.to_complex(what, i))
        .collect()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub preset: Option<String>,
    pub coeffs: Option<Vec<Scalar>>,
    pub weights: Option<Vec<Scalar>>,
    pub window: Option<Vec<f64>>,
    pub res: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub spectrum: Option<PathBuf>,
    pub stages: Option<usize>,
    pub order: Option<usize>,
    pub domain: Option<String>,
    pub tol_h: Option<f64>,
    pub tol_feas: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsConfig {
    pub dt: Option<Vec<f64>>,
    pub c: Option<Scalar>,
    pub repeats: Option<usize>,
    pub modes: Option<usize>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiConfig {
    pub problem: Option<String>,
    pub scheme: Option<String>,
    pub dt: Option<f64>,
    pub xi: Option<f64>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub out: Option<PathBuf>,
}

/// Loads a command config, or the all-`None` default when no file is given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, String> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}
