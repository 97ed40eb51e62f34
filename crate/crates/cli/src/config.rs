//! Run configuration: a single JSON file, with individual keys overridable
//! from the command line so the manifest always captures exact parameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

/// Accepts a JSON number or the string "inf" for unbounded Lebesgue
/// exponents.
fn de_maybe_inf<'de, D: Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Option::<Raw>::deserialize(de)? {
        None => Ok(None),
        Some(Raw::Num(x)) => Ok(Some(x)),
        Some(Raw::Text(t)) if t.eq_ignore_ascii_case("inf") => Ok(Some(f64::INFINITY)),
        Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!(
            "expected a number or \"inf\", got \"{t}\""
        ))),
    }
}

/// Frequency split selector: an integer cutoff, "all", or "full".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitSpec {
    Cutoff(u32),
    Named(NamedSplit),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedSplit {
    /// Zero remainder at t = 0, forcing is the whole free evolution.
    All,
    /// No decomposition: evolve the full pair directly.
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_spectrum: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_spectrum: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, deserialize_with = "de_maybe_inf", skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    /// First stream id; trial k uses stream_base + k.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream_base: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_split: Option<SplitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    /// Tail functional name: "sobolev_pair", "lp_low" or "weighted".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional_n_cut: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional_sigma: Option<f64>,
    /// Projector of the weighted functional: "full", "nonzero" or "high".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector_n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs_per_eta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Load a config file and apply `--set key=value` overrides on the raw
    /// JSON object before deserialising.
    pub fn load(path: &Path, overrides: &[String]) -> Result<(RunConfig, serde_json::Value), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {path:?}: {e}")))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("config is not valid JSON: {e}")))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| CliError::validation("config must be a JSON object".into()))?;
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| CliError::validation(format!("--set needs key=value, got '{item}'")))?;
            let parsed = serde_json::from_str::<serde_json::Value>(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            obj.insert(key.to_string(), parsed);
        }
        let config: RunConfig = serde_json::from_value(value.clone())
            .map_err(|e| CliError::validation(format!("invalid config: {e}")))?;
        Ok((config, value))
    }

    pub fn require<T: Copy>(opt: &Option<T>, name: &str) -> Result<T, CliError> {
        opt.ok_or_else(|| CliError::validation(format!("missing required config key '{name}'")))
    }

    pub fn master_seed(&self) -> Result<u64, CliError> {
        Self::require(&self.master_seed, "master_seed")
    }

    pub fn stream_base(&self) -> u64 {
        self.stream_base.unwrap_or(0)
    }

    pub fn trials_at_least(&self, min: u64) -> Result<u64, CliError> {
        let trials = Self::require(&self.trials, "trials")?;
        if trials < min {
            return Err(CliError::validation(format!(
                "trials = {trials} violates the minimum of {min} for this experiment"
            )));
        }
        Ok(trials)
    }
}
