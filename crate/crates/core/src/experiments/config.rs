//! Plain-text experiment configuration: `key = value` lines, `#`
//! comments.  Every experiment declares its key schema; unknown keys are
//! rejected before any computation starts.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    Malformed(usize),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("unknown key `{0}` for experiment `{1}`")]
    UnknownKey(String, String),
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("key `{0}`: {1}")]
    BadValue(String, String),
    #[error("missing `experiment` key")]
    NoExperiment,
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: String,
    entries: BTreeMap<String, String>,
}

/// Key schemas per experiment (besides the common keys).
const COMMON_KEYS: &[&str] = &["experiment", "seed", "average"];

fn allowed_keys(experiment: &str) -> Option<&'static [&'static str]> {
    Some(match experiment {
        "kloosterman_salie" => &["p", "levels", "moment_q"],
        "moment_sweep" => &["family", "p", "q_list", "f_coeffs", "eta_exp", "b"],
        "sidon" => &["cases", "max_q", "h_coeffs"],
        "variance" => &["p_list", "f_config", "m_max", "full_depth_max_p"],
        "jacobian_st" => &["q_list", "h_coeffs", "depth", "ks_level"],
        "lhat" => &["q", "truncation", "alpha_angle_num", "alpha_angle_den"],
        "det_ratio" => &["p", "f_roots", "psi_scale", "max_pairs"],
        "frobclass" => &["descriptor", "p", "q", "f_roots", "f_coeffs", "h_coeffs", "depth"],
        "mellin" => &["descriptor", "p", "n", "method", "eta_exp", "b"],
        "field" => &["p", "n"],
        _ => return None,
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Malformed(lineno + 1))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if entries.insert(k.clone(), v).is_some() {
                return Err(ConfigError::DuplicateKey(k));
            }
        }
        let experiment =
            entries.get("experiment").cloned().ok_or(ConfigError::NoExperiment)?;
        let allowed =
            allowed_keys(&experiment).ok_or_else(|| ConfigError::UnknownExperiment(experiment.clone()))?;
        for k in entries.keys() {
            if !COMMON_KEYS.contains(&k.as_str()) && !allowed.contains(&k.as_str()) {
                return Err(ConfigError::UnknownKey(k.clone(), experiment));
            }
        }
        Ok(ExperimentConfig { experiment, entries })
    }

    pub fn get(&self, key: &str) -> Result<&str, ConfigError> {
        self.entries
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    pub fn get_or(&self, key: &str, default: &str) -> String {
        self.entries.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.get(key)?
            .parse()
            .map_err(|e| ConfigError::BadValue(key.to_string(), format!("{e}")))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => {
                v.parse().map_err(|e| ConfigError::BadValue(key.to_string(), format!("{e}")))
            }
        }
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>, ConfigError> {
        self.get(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| ConfigError::BadValue(key.to_string(), format!("{e}")))
            })
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.entries.get("seed").and_then(|s| s.parse().ok()).unwrap_or(0)
    }

    /// Cesàro averaging over extension degrees; default off.
    pub fn cesaro(&self) -> bool {
        self.entries.get("average").map(|s| s == "cesaro").unwrap_or(false)
    }

    pub fn echo(&self) -> Vec<(String, String)> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}
