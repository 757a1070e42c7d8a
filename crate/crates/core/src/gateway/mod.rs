//! Search providers and the dual (baseline vs reformulated) search flow.
//!
//! Two provider kinds ship: a deterministic local tf-idf index over a JSON
//! corpus, and a generic HTTP provider driven by an endpoint template and a
//! response field mapping. Anything else can implement [`SearchProvider`]
//! and be registered directly.

mod dual;
mod http;
mod local;

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual::{dual_search, ComparisonResult, Proposal, SearchMode};
pub use http::{HttpProvider, ResponseMapping, DEFAULT_TIMEOUT};
pub use local::{load_corpus, CorpusDocument, LocalIndex, LocalProvider};

use crate::text::AntiDictionaries;

/// Results examined per search.
pub const DEFAULT_RESULT_LIMIT: usize = 10;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("unknown provider {0:?}")]
    UnknownProvider(String),
    #[error("provider {0:?} is already registered")]
    DuplicateId(String),
    #[error("provider {id:?}: missing {what}")]
    MissingConfig { id: String, what: String },
    #[error("duplicate corpus url {0:?}")]
    DuplicateUrl(String),
    #[error("result limit must be at least 1")]
    InvalidLimit,
    #[error("provider {id:?} unavailable: {reason}")]
    ProviderUnavailable { id: String, reason: String },
    #[error("provider {id:?} sent a malformed response: {reason}")]
    MalformedProviderResponse { id: String, reason: String },
    #[error("corpus {path}: {reason}")]
    Corpus { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub rank: usize,
    pub title: String,
    pub url: String,
    pub snippet: String,
    pub engine_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub results: Vec<SearchResult>,
    /// Engine-reported count of matching pages. Displayed, never scored.
    pub total_estimate: u64,
}

impl SearchResponse {
    pub fn empty(query: &str) -> Self {
        Self {
            query: query.to_string(),
            results: Vec::new(),
            total_estimate: 0,
        }
    }

    pub fn titles(&self) -> impl Iterator<Item = &str> {
        self.results.iter().map(|r| r.title.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Local,
    Http,
}

pub trait SearchProvider: Send + Sync {
    fn id(&self) -> &str;

    fn kind(&self) -> ProviderKind;

    /// At most `limit` results, ranked from 1. Implementations must fail
    /// rather than invent results.
    fn search(&self, query: &str, limit: usize) -> Result<SearchResponse, SearchError>;
}

/// Declarative provider configuration, as found in `presy.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Local: path to the corpus JSON file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    /// Local: anti-dictionary applied to query words. Defaults to `en`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    /// Http: URL with `{query}` and `{limit}` placeholders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<ResponseMapping>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

/// One `engines` item of `presy.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineSpec {
    pub id: String,
    pub kind: ProviderKind,
    #[serde(flatten)]
    pub config: ProviderConfig,
}

/// Summary of a registered provider, as listed by `GET /engines`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineInfo {
    pub id: String,
    pub kind: ProviderKind,
}

/// The providers a running system can dispatch to, in registration order.
#[derive(Default)]
pub struct ProviderRegistry {
    providers: RwLock<Vec<Arc<dyn SearchProvider>>>,
}

impl std::fmt::Debug for ProviderRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.ids()).finish()
    }
}

impl ProviderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&self, provider: Arc<dyn SearchProvider>) -> Result<(), SearchError> {
        let mut providers = self.providers.write().unwrap_or_else(|e| e.into_inner());
        if providers.iter().any(|p| p.id() == provider.id()) {
            return Err(SearchError::DuplicateId(provider.id().to_string()));
        }
        providers.push(provider);
        Ok(())
    }

    /// Builds a provider from configuration and registers it. Relative
    /// corpus paths resolve against `base_dir`.
    pub fn register_provider(
        &self,
        id: &str,
        kind: ProviderKind,
        config: &ProviderConfig,
        base_dir: &Path,
        dictionaries: &AntiDictionaries,
    ) -> Result<Arc<dyn SearchProvider>, SearchError> {
        if self.get(id).is_ok() {
            return Err(SearchError::DuplicateId(id.to_string()));
        }
        let provider: Arc<dyn SearchProvider> = match kind {
            ProviderKind::Local => {
                let corpus = config.corpus.as_ref().ok_or_else(|| SearchError::MissingConfig {
                    id: id.to_string(),
                    what: "corpus path".into(),
                })?;
                let language = config.language.as_deref().unwrap_or("en");
                let dictionary =
                    dictionaries
                        .get(language)
                        .ok_or_else(|| SearchError::MissingConfig {
                            id: id.to_string(),
                            what: format!("anti-dictionary for {language:?}"),
                        })?;
                let documents = load_corpus(&base_dir.join(corpus))?;
                let index = LocalIndex::build(documents)?;
                Arc::new(LocalProvider::new(id, index, dictionary))
            }
            ProviderKind::Http => {
                let endpoint = config.endpoint.as_ref().ok_or_else(|| SearchError::MissingConfig {
                    id: id.to_string(),
                    what: "endpoint template".into(),
                })?;
                let timeout = config
                    .timeout_ms
                    .map(Duration::from_millis)
                    .unwrap_or(DEFAULT_TIMEOUT);
                Arc::new(HttpProvider::new(
                    id,
                    endpoint,
                    config.mapping.clone().unwrap_or_default(),
                    timeout,
                )?)
            }
        };
        self.register(provider.clone())?;
        Ok(provider)
    }

    pub fn register_spec(
        &self,
        spec: &EngineSpec,
        base_dir: &Path,
        dictionaries: &AntiDictionaries,
    ) -> Result<Arc<dyn SearchProvider>, SearchError> {
        self.register_provider(&spec.id, spec.kind, &spec.config, base_dir, dictionaries)
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn SearchProvider>, SearchError> {
        self.providers
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .find(|p| p.id() == id)
            .cloned()
            .ok_or_else(|| SearchError::UnknownProvider(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.list().into_iter().map(|e| e.id).collect()
    }

    pub fn list(&self) -> Vec<EngineInfo> {
        self.providers
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .map(|p| EngineInfo {
                id: p.id().to_string(),
                kind: p.kind(),
            })
            .collect()
    }

    pub fn search(&self, id: &str, query: &str, limit: usize) -> Result<SearchResponse, SearchError> {
        if limit == 0 {
            return Err(SearchError::InvalidLimit);
        }
        self.get(id)?.search(query, limit)
    }
}
