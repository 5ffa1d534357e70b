//! Flat TOML run configuration.
//!
//! Relative paths resolve against the config file's directory. The API key is
//! never stored in the file: `api_key_env` names an environment variable read
//! at backend construction time.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::disambiguation::{BackendError, HttpBackend, LlmBackend, StubBackend};
use crate::gazetteer::{Gazetteer, GazetteerError};
use crate::geofoci::DEFAULT_ALPHA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Stub,
    Http,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub counties: PathBuf,
    pub states: PathBuf,
    pub countries: PathBuf,
    pub aliases: PathBuf,
    pub model: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub backend: BackendKind,
    pub stub_fixture: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_threshold_km")]
    pub threshold_km: f64,
}

fn default_timeout() -> u64 {
    30
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_max_in_flight() -> usize {
    4
}

fn default_seed() -> u64 {
    17
}

fn default_threshold_km() -> f64 {
    crate::evaluation::DEFAULT_THRESHOLD_KM
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {0}: {1}")]
    Io(String, std::io::Error),
    #[error("cannot parse config {0}: {1}")]
    Parse(String, toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("environment variable {0} is not set")]
    MissingKey(String),
    #[error(transparent)]
    Gazetteer(#[from] GazetteerError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

impl Config {
    /// Loads and validates a config file; relative paths become absolute
    /// against the file's parent directory.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        let mut config: Config = toml::from_str(&text)
            .map_err(|e| ConfigError::Parse(path.display().to_string(), e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        anchor(&mut config.counties);
        anchor(&mut config.states);
        anchor(&mut config.countries);
        anchor(&mut config.aliases);
        if let Some(p) = config.model.as_mut() {
            anchor(p);
        }
        if let Some(p) = config.cache.as_mut() {
            anchor(p);
        }
        if let Some(p) = config.stub_fixture.as_mut() {
            anchor(p);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.max_in_flight == 0 {
            return Err(ConfigError::Invalid("max_in_flight must be >= 1".into()));
        }
        if !(self.threshold_km > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "threshold_km must be positive, got {}",
                self.threshold_km
            )));
        }
        match self.backend {
            BackendKind::Stub => {
                if self.stub_fixture.is_none() {
                    return Err(ConfigError::Invalid(
                        "backend = \"stub\" requires stub_fixture".into(),
                    ));
                }
            }
            BackendKind::Http => {
                for (field, present) in [
                    ("endpoint", self.endpoint.is_some()),
                    ("llm_model", self.llm_model.is_some()),
                    ("api_key_env", self.api_key_env.is_some()),
                ] {
                    if !present {
                        return Err(ConfigError::Invalid(format!(
                            "backend = \"http\" requires {field}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn load_gazetteer(&self) -> Result<Gazetteer, ConfigError> {
        Ok(Gazetteer::load(&self.counties, &self.states, &self.countries)?)
    }

    /// Constructs the configured backend. For HTTP this reads the API key
    /// from the environment variable named by `api_key_env`.
    pub fn build_backend(&self) -> Result<Box<dyn LlmBackend>, ConfigError> {
        match self.backend {
            BackendKind::Stub => {
                let fixture = self.stub_fixture.as_ref().expect("validated");
                Ok(Box::new(StubBackend::load(fixture)?))
            }
            BackendKind::Http => {
                let var = self.api_key_env.as_ref().expect("validated");
                let key = std::env::var(var).map_err(|_| ConfigError::MissingKey(var.clone()))?;
                Ok(Box::new(HttpBackend::new(
                    self.endpoint.as_ref().expect("validated"),
                    self.llm_model.as_ref().expect("validated"),
                    Some(key),
                    self.timeout_secs,
                )?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("nlgf.toml");
        std::fs::write(&p, body).unwrap();
        p
    }

    const STUB_BODY: &str = r#"
counties = "data/counties.geojson"
states = "data/states.geojson"
countries = "data/countries.geojson"
aliases = "data/aliases.tsv"
backend = "stub"
stub_fixture = "data/stub.tsv"
"#;

    #[test]
    fn loads_with_defaults_and_anchored_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_config(dir.path(), STUB_BODY);
        let config = Config::load(&p).unwrap();
        assert_eq!(config.alpha, 0.25);
        assert_eq!(config.max_in_flight, 4);
        assert_eq!(config.seed, 17);
        assert_eq!(config.threshold_km, 161.0);
        assert_eq!(config.counties, dir.path().join("data/counties.geojson"));
        assert_eq!(config.stub_fixture.unwrap(), dir.path().join("data/stub.tsv"));
    }

    #[test]
    fn http_backend_requires_endpoint_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_config(
            dir.path(),
            r#"
counties = "c.geojson"
states = "s.geojson"
countries = "n.geojson"
aliases = "a.tsv"
backend = "http"
endpoint = "https://api.example.com/v1"
"#,
        );
        let err = Config::load(&p).unwrap_err();
        assert!(err.to_string().contains("llm_model"));
    }

    #[test]
    fn stub_backend_requires_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let body = STUB_BODY.replace("stub_fixture = \"data/stub.tsv\"\n", "");
        let p = write_config(dir.path(), &body);
        assert!(Config::load(&p).is_err());
    }

    #[test]
    fn bad_alpha_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_config(dir.path(), &format!("{STUB_BODY}alpha = 1.5\n"));
        let err = Config::load(&p).unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_config(dir.path(), &format!("{STUB_BODY}api_key = \"sk-123\"\n"));
        assert!(matches!(Config::load(&p), Err(ConfigError::Parse(_, _))));
    }

    #[test]
    fn missing_env_var_is_actionable() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_config(
            dir.path(),
            r#"
counties = "c.geojson"
states = "s.geojson"
countries = "n.geojson"
aliases = "a.tsv"
backend = "http"
endpoint = "https://api.example.com/v1"
llm_model = "test-model"
api_key_env = "NLGF_TEST_KEY_THAT_IS_NOT_SET"
"#,
        );
        let config = Config::load(&p).unwrap();
        let err = match config.build_backend() {
            Ok(_) => panic!("expected missing-key error"),
            Err(e) => e,
        };
        assert!(err.to_string().contains("NLGF_TEST_KEY_THAT_IS_NOT_SET"));
    }
}
