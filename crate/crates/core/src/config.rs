//! The JSON model document.
//!
//! ```json
//! {"durations": [1, 2], "mean_tau": 1.25, "power": 1, "c": 1}
//! ```
//!
//! Exactly one of `beta` and `mean_tau` must be given; `mean_tau` is turned
//! into `beta` by [`crate::codebook::solve_beta`].

use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, EncodingModel};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub durations: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_tau: Option<f64>,
    pub power: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_sigma: Option<f64>,
}

/// Which of the two stages of loading a config failed.
#[derive(Debug)]
pub enum ConfigError {
    /// Malformed JSON or a document that breaks the schema rules.
    Parse(String),
    /// A well-formed document the model builder rejected.
    Model(crate::Error),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "malformed config: {msg}"),
            ConfigError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ModelConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        match (cfg.beta, cfg.mean_tau) {
            (Some(_), None) | (None, Some(_)) => Ok(cfg),
            _ => Err(ConfigError::Parse(
                "exactly one of `beta` and `mean_tau` must be present".into(),
            )),
        }
    }

    /// Builds the model, solving for `beta` when `mean_tau` is given.
    pub fn to_model(&self) -> Result<EncodingModel> {
        let codebook = Codebook::new(self.durations.clone())?;
        match (self.beta, self.mean_tau) {
            (Some(beta), None) => EncodingModel::new(codebook, beta, self.power, self.c),
            (None, Some(mean_tau)) => {
                EncodingModel::from_mean_duration(codebook, mean_tau, self.power, self.c)
            }
            _ => Err(invalid(
                "exactly one of `beta` and `mean_tau` must be present",
            )),
        }
    }

    pub fn v0(&self) -> f64 {
        self.v0.unwrap_or(0.0)
    }

    pub fn jitter_sigma(&self) -> f64 {
        self.jitter_sigma.unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::SenderModel;

    #[test]
    fn mean_tau_solves_beta() {
        let cfg = ModelConfig::from_json(r#"{"durations":[1,2],"mean_tau":1.25,"power":1,"c":1}"#)
            .unwrap();
        let m = cfg.to_model().unwrap();
        assert!((m.beta() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(cfg.v0(), 0.0);
    }

    #[test]
    fn beta_and_extras() {
        let cfg = ModelConfig::from_json(
            r#"{"durations":[1,2],"beta":0,"power":2,"c":3,"v0":0.5,"jitter_sigma":0.05}"#,
        )
        .unwrap();
        assert_eq!(cfg.v0(), 0.5);
        assert_eq!(cfg.jitter_sigma(), 0.05);
        assert_eq!(cfg.to_model().unwrap().partition(), 2.0);
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            r#"{"durations":[1,2],"power":1,"c":1}"#,
            r#"{"durations":[1,2],"beta":1,"mean_tau":1.5,"power":1,"c":1}"#,
            r#"{"durations":[1,2],"beta":1,"power":1}"#,
            r#"{"durations":[1,2],"beta":1,"power":1,"c":1,"speed":3}"#,
            r#"not json"#,
        ] {
            assert!(
                matches!(ModelConfig::from_json(text), Err(ConfigError::Parse(_))),
                "{text}"
            );
        }
        let degenerate =
            ModelConfig::from_json(r#"{"durations":[1,1],"mean_tau":1,"power":1,"c":1}"#).unwrap();
        assert_eq!(
            degenerate.to_model(),
            Err(crate::Error::DegenerateConstraint)
        );
    }
}
