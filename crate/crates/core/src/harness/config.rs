//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembly::Scheme;
use crate::basis::Activation;
use crate::error::{Error, Result};
use crate::harness::examples::ExampleKind;

/// Penalty used when a configuration does not set `eta_e`.
pub const DEFAULT_ETA_E: f64 = 10.0;

/// Rank cutoff: `"auto"` selects `eps * max(rows, cols)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rcond {
    Auto(AutoTag),
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl Default for Rcond {
    fn default() -> Self {
        Rcond::Auto(AutoTag::Auto)
    }
}

impl Rcond {
    pub fn value(self) -> Option<f64> {
        match self {
            Rcond::Auto(_) => None,
            Rcond::Value(v) => Some(v),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

fn default_points() -> usize {
    70
}

fn default_sign() -> i8 {
    -1
}

/// One sweep over `h_list x m_list x seeds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: ExampleKind,
    pub scheme: Scheme,
    /// Reaction coefficient for `helmholtz1d`, diffusivity for `heat1d`;
    /// ignored by `poisson2d`.
    #[serde(default)]
    pub lambda: f64,
    pub h_list: Vec<f64>,
    pub m_list: Vec<usize>,
    #[serde(default)]
    pub eta_e: Option<f64>,
    pub w0: f64,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_points")]
    pub collocation_per_face: usize,
    #[serde(default = "default_points")]
    pub quad_per_axis: usize,
    #[serde(default)]
    pub rcond: Rcond,
    #[serde(default = "default_sign")]
    pub temporal_penalty_sign: i8,
    /// Feed element-local coordinates in `[-1, 1]^d` to the features instead
    /// of physical ones.
    #[serde(default)]
    pub local_inputs: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn eta_e(&self) -> f64 {
        self.eta_e.unwrap_or(DEFAULT_ETA_E)
    }

    /// Cells per axis for a mesh size, rejecting sizes that do not tile `[0, 1]`.
    pub fn cells_for(h: f64) -> Result<usize> {
        let n = (1.0 / h).round();
        if !(h > 0.0) || n < 1.0 || (n * h - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("h = {h} does not divide the unit interval")));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.h_list.is_empty() {
            return fail("h_list must not be empty".into());
        }
        if self.m_list.is_empty() {
            return fail("m_list must not be empty".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds must not be empty".into());
        }
        for &h in &self.h_list {
            Self::cells_for(h)?;
        }
        if self.m_list.contains(&0) {
            return fail("m_list entries must be positive".into());
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return fail(format!("w0 must be positive, got {}", self.w0));
        }
        if let Some(eta) = self.eta_e {
            if !(eta > 0.0 && eta.is_finite()) {
                return fail(format!("eta_e must be positive, got {eta}"));
            }
        }
        if self.example != ExampleKind::Poisson2d && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be positive for {}, got {}", self.example, self.lambda));
        }
        if self.collocation_per_face == 0 {
            return fail("collocation_per_face must be positive".into());
        }
        if self.quad_per_axis == 0 {
            return fail("quad_per_axis must be positive".into());
        }
        if let Rcond::Value(r) = self.rcond {
            if !(r >= 0.0 && r.is_finite()) {
                return fail(format!("rcond must be non-negative, got {r}"));
            }
        }
        if self.temporal_penalty_sign != 1 && self.temporal_penalty_sign != -1 {
            return fail(format!(
                "temporal_penalty_sign must be 1 or -1, got {}",
                self.temporal_penalty_sign
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"example":"helmholtz1d","scheme":"dg","lambda":10,
        "h_list":[0.25],"m_list":[40],"eta_e":0.0625,"w0":5.5}"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.seeds, vec![1, 2, 3, 4, 5]);
        assert_eq!(c.collocation_per_face, 70);
        assert_eq!(c.quad_per_axis, 70);
        assert_eq!(c.rcond.value(), None);
        assert_eq!(c.temporal_penalty_sign, -1);
        assert!(!c.local_inputs);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("\"w0\"", "\"bogus\":1,\"w0\"");
        let err = ExperimentConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn rcond_accepts_number_or_auto() {
        let c = ExperimentConfig::from_json(&MINIMAL.replace("}", ",\"rcond\":1e-12}")).unwrap();
        assert_eq!(c.rcond.value(), Some(1e-12));
        let c = ExperimentConfig::from_json(&MINIMAL.replace("}", ",\"rcond\":\"auto\"}")).unwrap();
        assert_eq!(c.rcond.value(), None);
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("}", ",\"rcond\":\"never\"}")).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        for bad in [
            MINIMAL.replace("[40]", "[]"),
            MINIMAL.replace("[0.25]", "[0.3]"),
            MINIMAL.replace("5.5", "-1"),
            MINIMAL.replace("\"dg\"", "\"fem\""),
            MINIMAL.replace("}", ",\"temporal_penalty_sign\":0}"),
        ] {
            assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
