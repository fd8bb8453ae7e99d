//! Declarative experiment configuration.
//!
//! A run is described by one JSON file plus command-line flags; flags win
//! over file values. Unknown keys are rejected so a config file always
//! means exactly what it says, and the resolved parameters are echoed into
//! every report for replay.

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub schottky: SchottkyBlock,
    pub measure: MeasureBlock,
    pub quadrature: QuadratureBlock,
    pub verify: VerifyBlock,
}

/// Group construction parameters.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchottkyBlock {
    /// Number of generators.
    pub k: Option<usize>,
    /// Translation length of each generator.
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// Number of coordinate axes the generators rotate through; defaults
    /// to k and must be at least k.
    pub axes: Option<usize>,
    /// Maximum reduced word length.
    #[serde(rename = "L")]
    pub l: Option<usize>,
}

/// Orbit measure parameters.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureBlock {
    /// Tilt exponent; defaults to the orbit growth estimate.
    pub s: Option<f64>,
    /// Word length of the measure layer; defaults to the schottky length.
    #[serde(rename = "L")]
    pub l: Option<usize>,
}

/// Quadrature parameters for the normalization constant.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureBlock {
    /// "product-radial", "monte-carlo", or "both".
    pub method: Option<String>,
    /// Sample or node budget; accepts scientific notation.
    pub budget: Option<f64>,
}

/// Verification suite parameters.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    pub suites: Option<Vec<String>>,
    pub samples: Option<usize>,
    /// Replacement structure matrices, for negative controls only.
    pub structure_matrices: Option<[[[f64; 4]; 4]; 3]>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}
