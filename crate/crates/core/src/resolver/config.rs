//! TOML configuration for providers, cache and classifier.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ArxivProvider, Cache, CrossrefProvider, FixtureProvider, OpenAlexProvider, Provider, Resolver};
use crate::classifier::ClassifierConfig;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Crossref,
    Arxiv,
    Openalex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub name: String,
    pub kind: ProviderKind,
    pub base_endpoint: String,
    /// Requests per second.
    pub rate_limit: f64,
    pub timeout_ms: u64,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
    /// Contact address sent in the User-Agent for polite API pools.
    #[serde(default)]
    pub contact: Option<String>,
}

fn enabled_default() -> bool {
    true
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |reason: &str| ConfigError::InvalidProvider {
            name: self.name.clone(),
            reason: reason.to_owned(),
        };
        if !(self.rate_limit.is_finite() && self.rate_limit > 0.0) {
            return Err(invalid("rate_limit must be > 0"));
        }
        if self.timeout_ms == 0 {
            return Err(invalid("timeout_ms must be > 0"));
        }
        match url::Url::parse(&self.base_endpoint) {
            Ok(u) if matches!(u.scheme(), "http" | "https") && u.host_str().is_some() => Ok(()),
            _ => Err(invalid("base_endpoint must be an http(s) URL")),
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn build(&self) -> Box<dyn Provider> {
        let contact = self.contact.as_deref();
        match self.kind {
            ProviderKind::Crossref => Box::new(CrossrefProvider::new(&self.base_endpoint, self.timeout(), contact)),
            ProviderKind::Arxiv => Box::new(ArxivProvider::new(&self.base_endpoint, self.timeout())),
            ProviderKind::Openalex => Box::new(OpenAlexProvider::new(&self.base_endpoint, self.timeout(), contact)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheConfig {
    pub ttl_days: u64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self { ttl_days: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_providers")]
    pub providers: Vec<ProviderConfig>,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub cache: CacheConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            providers: default_providers(),
            classifier: ClassifierConfig::default(),
            cache: CacheConfig::default(),
        }
    }
}

pub fn default_providers() -> Vec<ProviderConfig> {
    let p = |name: &str, kind, base: &str, rate_limit| ProviderConfig {
        name: name.into(),
        kind,
        base_endpoint: base.into(),
        rate_limit,
        timeout_ms: 10_000,
        enabled: true,
        contact: None,
    };
    vec![
        p("crossref", ProviderKind::Crossref, "https://api.crossref.org", 5.0),
        p("arxiv", ProviderKind::Arxiv, "https://export.arxiv.org/api", 1.0),
        p("openalex", ProviderKind::Openalex, "https://api.openalex.org", 5.0),
    ]
}

/// Where answers may come from for one run.
#[derive(Debug, Clone, Default)]
pub struct ResolverOptions {
    pub fixtures: Option<PathBuf>,
    /// Use only the fixture provider.
    pub offline: bool,
    pub cache: Option<PathBuf>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for p in &self.providers {
            p.validate()?;
        }
        self.classifier.thresholds.validate()?;
        Ok(())
    }

    /// Fixtures (if any) answer first; networked providers follow unless
    /// running offline.
    pub fn build_resolver(&self, options: &ResolverOptions) -> Result<Resolver, ConfigError> {
        let mut resolver = Resolver::new();
        if let Some(path) = &options.fixtures {
            resolver = resolver.with_provider(FixtureProvider::load(path)?);
        }
        if !options.offline {
            for p in self.providers.iter().filter(|p| p.enabled) {
                resolver = resolver.with_limited_provider(p.build(), p.rate_limit, p.timeout());
            }
        }
        if let Some(path) = &options.cache {
            let ttl = Duration::from_secs(self.cache.ttl_days * 86_400);
            let cache = Cache::open(path, ttl).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            resolver = resolver.with_cache(cache);
        }
        Ok(resolver)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_when_empty() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c.providers.len(), 3);
        assert_eq!(c.cache.ttl_days, 30);
        assert!(c.classifier.sh_requires_real_author);
    }

    #[test]
    fn full_file() {
        let c = Config::from_toml(
            r#"
[cache]
ttl_days = 7

[classifier]
title_strong = 0.95
sh_requires_real_author = false
placeholder_tokens = ["Someone"]

[[providers]]
name = "local"
kind = "crossref"
base_endpoint = "http://127.0.0.1:8080"
rate_limit = 2.5
timeout_ms = 500
"#,
        )
        .unwrap();
        assert_eq!(c.providers.len(), 1);
        assert!(c.providers[0].enabled);
        assert_eq!(c.classifier.thresholds.title_strong, 0.95);
        assert_eq!(c.classifier.thresholds.title_moderate, 0.60);
        assert_eq!(c.classifier.placeholder_tokens, vec!["Someone"]);
    }

    #[test]
    fn invalid_values_rejected() {
        let bad_rate = r#"[[providers]]
name = "x"
kind = "arxiv"
base_endpoint = "http://h"
rate_limit = 0
timeout_ms = 5"#;
        assert!(matches!(
            Config::from_toml(bad_rate),
            Err(ConfigError::InvalidProvider { .. })
        ));
        assert!(matches!(
            Config::from_toml("[classifier]\ntitle_moderate = 0.95"),
            Err(ConfigError::Thresholds(_))
        ));
        assert!(matches!(
            Config::from_toml("[nonsense]\nx = 1"),
            Err(ConfigError::Toml(_))
        ));
    }

    #[test]
    fn offline_uses_fixtures_only() {
        let dir = tempfile::tempdir().unwrap();
        let fixtures = dir.path().join("f.json");
        std::fs::write(&fixtures, "{}").unwrap();
        let resolver = Config::default()
            .build_resolver(&ResolverOptions {
                fixtures: Some(fixtures),
                offline: true,
                cache: None,
            })
            .unwrap();
        assert_eq!(resolver.provider_names(), vec!["fixture"]);
    }
}
