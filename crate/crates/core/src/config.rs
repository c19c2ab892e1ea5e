//! Pipeline configuration file.
//!
//! Relative paths inside the file resolve against the file's directory.
//! Environment variables are only read for backend credentials.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FilterConfig;
use crate::gateway::{Backend, BackendKind, BackendSpec, GatewayError};
use crate::interpretation::DEFAULT_DEDUP_THRESHOLD;
use crate::ontology::{Family, Ontology, OntologyError};
use crate::segmentation::BoundaryConfig;
use crate::stats::{MetricsOptions, Pooling, Smoothing};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Backend(#[from] GatewayError),
}

/// Which backend profile fills each model role.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Roles {
    pub act_labeler: Option<String>,
    pub interpretation_labeler: Option<String>,
    pub interpretation_generators: Vec<String>,
    pub embedder: Option<String>,
    pub answerer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Built-in ontology when absent.
    pub ontology: Option<PathBuf>,
    pub boundaries: BoundaryConfig,
    pub filter: FilterConfig,
    pub smoothing: Smoothing,
    pub pooling: Pooling,
    pub family_level: bool,
    pub dedup_threshold: f64,
    /// Answers traced concurrently.
    pub max_in_flight: usize,
    pub alpha: f64,
    pub n_bins: usize,
    /// Restricts which act families count as addressing an interpretation.
    pub addressing_families: Option<BTreeSet<Family>>,
    /// Extra community guideline files for answer generation, by community.
    pub guidelines: BTreeMap<String, PathBuf>,
    pub backends: BTreeMap<String, BackendSpec>,
    pub roles: Roles,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            ontology: None,
            boundaries: BoundaryConfig::default(),
            filter: FilterConfig::default(),
            smoothing: Smoothing::default(),
            pooling: Pooling::default(),
            family_level: false,
            dedup_threshold: DEFAULT_DEDUP_THRESHOLD,
            max_in_flight: 4,
            alpha: 0.05,
            n_bins: 10,
            addressing_families: None,
            guidelines: BTreeMap::new(),
            backends: BTreeMap::new(),
            roles: Roles::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(document: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut config: PipelineConfig = toml::from_str(document).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        for (key, spec) in config.backends.iter_mut() {
            if spec.name == BackendSpec::default().name {
                spec.name = key.clone();
            }
        }
        Ok(config)
    }

    /// Parses, resolves relative paths and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut config = Self::from_toml(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = config.ontology.as_mut() {
            resolve(base, p);
        }
        for p in config.guidelines.values_mut() {
            resolve(base, p);
        }
        for spec in config.backends.values_mut() {
            if let Some(p) = spec.fixture_path.as_mut() {
                resolve(base, p);
            }
            if let Some(p) = spec.record_path.as_mut() {
                resolve(base, p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return invalid(format!("dedup_threshold {} outside (0, 1]", self.dedup_threshold));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.n_bins == 0 {
            return invalid("n_bins must be >= 1".into());
        }
        if self.max_in_flight == 0 {
            return invalid("max_in_flight must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.filter.profanity_threshold) {
            return invalid(format!("profanity_threshold {} outside [0, 1]", self.filter.profanity_threshold));
        }
        self.boundaries.validate().map_err(ConfigError::Invalid)?;
        self.smoothing.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut paths: Vec<(&str, &Path)> = Vec::new();
        if let Some(p) = &self.ontology {
            paths.push(("ontology", p));
        }
        for p in self.guidelines.values() {
            paths.push(("guidelines", p));
        }
        for (name, spec) in &self.backends {
            spec.validate()?;
            if let (BackendKind::Mock, Some(p)) = (spec.kind, &spec.fixture_path) {
                paths.push((name, p));
            }
        }
        for (what, p) in paths {
            if !p.exists() {
                return invalid(format!("{what}: {} does not exist", p.display()));
            }
        }
        let r = &self.roles;
        for name in r
            .act_labeler
            .iter()
            .chain(&r.interpretation_labeler)
            .chain(&r.interpretation_generators)
            .chain(&r.embedder)
            .chain(&r.answerer)
        {
            if !self.backends.contains_key(name) {
                return invalid(format!("role refers to unknown backend {name:?}"));
            }
        }
        Ok(())
    }

    /// Points every role at one backend profile.
    pub fn use_profile(&mut self, profile: &str) -> Result<(), ConfigError> {
        if !self.backends.contains_key(profile) {
            return Err(ConfigError::Invalid(format!("unknown backend profile {profile:?}")));
        }
        let p = Some(profile.to_string());
        self.roles = Roles {
            act_labeler: p.clone(),
            interpretation_labeler: p.clone(),
            interpretation_generators: vec![profile.to_string()],
            embedder: p.clone(),
            answerer: p,
        };
        Ok(())
    }

    pub fn load_ontology(&self) -> Result<Ontology, ConfigError> {
        Ok(match &self.ontology {
            Some(p) => Ontology::load_file(p)?,
            None => Ontology::default_ontology(),
        })
    }

    pub fn backend(&self, name: &str) -> Result<Backend, ConfigError> {
        let spec = self
            .backends
            .get(name)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown backend {name:?}")))?;
        Ok(Backend::from_spec(spec)?)
    }

    /// Backend filling a single-valued role.
    pub fn role_backend(&self, role: &str) -> Result<Backend, ConfigError> {
        let r = &self.roles;
        let name = match role {
            "act_labeler" => &r.act_labeler,
            "interpretation_labeler" => &r.interpretation_labeler,
            "embedder" => &r.embedder,
            "answerer" => &r.answerer,
            other => return Err(ConfigError::Invalid(format!("unknown role {other:?}"))),
        };
        let name = name
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid(format!("no backend configured for role {role}")))?;
        self.backend(name)
    }

    pub fn generator_backends(&self) -> Result<Vec<Backend>, ConfigError> {
        if self.roles.interpretation_generators.is_empty() {
            return Err(ConfigError::Invalid("no interpretation generators configured".into()));
        }
        self.roles.interpretation_generators.iter().map(|n| self.backend(n)).collect()
    }

    pub fn metrics_options(&self) -> MetricsOptions {
        MetricsOptions {
            addressing_families: self.addressing_families.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
