use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ProviderKind, SearchError, SearchProvider, SearchResponse, SearchResult};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Where to find results in a provider's JSON response. Paths are dotted
/// (`data.items`, `hits.0.title`); an empty path is the value itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResponseMapping {
    pub results: String,
    pub title: String,
    pub url: String,
    pub snippet: String,
    /// Path to the engine's total-estimate number. When `None` the number of
    /// returned items is used.
    pub total: Option<String>,
}

impl Default for ResponseMapping {
    fn default() -> Self {
        Self {
            results: "results".into(),
            title: "title".into(),
            url: "url".into(),
            snippet: "snippet".into(),
            total: Some("total_estimate".into()),
        }
    }
}

fn lookup<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(value);
    }
    path.split('.').try_fold(value, |v, key| match v {
        Value::Object(map) => map.get(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

/// Searches a remote JSON endpoint.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    id: String,
    endpoint: String,
    mapping: ResponseMapping,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(
        id: &str,
        endpoint: &str,
        mapping: ResponseMapping,
        timeout: Duration,
    ) -> Result<Self, SearchError> {
        if !endpoint.contains("{query}") {
            return Err(SearchError::MissingConfig {
                id: id.to_string(),
                what: "{query} placeholder in endpoint template".into(),
            });
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Ok(Self {
            id: id.to_string(),
            endpoint: endpoint.to_string(),
            mapping,
            agent,
        })
    }

    /// The request URL for a query.
    pub fn request_url(&self, query: &str, limit: usize) -> String {
        let encoded: String = url::form_urlencoded::byte_serialize(query.as_bytes()).collect();
        self.endpoint
            .replace("{query}", &encoded)
            .replace("{limit}", &limit.to_string())
    }

    fn malformed(&self, reason: impl Into<String>) -> SearchError {
        SearchError::MalformedProviderResponse {
            id: self.id.clone(),
            reason: reason.into(),
        }
    }

    /// Maps a decoded response body onto a [`SearchResponse`].
    pub fn map_response(
        &self,
        query: &str,
        body: &Value,
        limit: usize,
    ) -> Result<SearchResponse, SearchError> {
        let m = &self.mapping;
        let items = lookup(body, &m.results)
            .and_then(Value::as_array)
            .ok_or_else(|| self.malformed(format!("no result array at {:?}", m.results)))?;

        let text = |item: &Value, path: &str| -> String {
            lookup(item, path)
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string()
        };
        let mut results = Vec::new();
        for (i, item) in items.iter().take(limit).enumerate() {
            let url = text(item, &m.url);
            if url.is_empty() {
                return Err(self.malformed(format!("result {} has no url at {:?}", i + 1, m.url)));
            }
            results.push(SearchResult {
                rank: i + 1,
                title: text(item, &m.title),
                url,
                snippet: text(item, &m.snippet),
                engine_id: self.id.clone(),
            });
        }

        let total = match &m.total {
            None => items.len() as u64,
            Some(path) => {
                let v = lookup(body, path)
                    .ok_or_else(|| self.malformed(format!("no total estimate at {path:?}")))?;
                v.as_u64()
                    .or_else(|| v.as_f64().filter(|f| *f >= 0.0).map(|f| f as u64))
                    .or_else(|| v.as_str().and_then(|s| s.replace(',', "").parse().ok()))
                    .ok_or_else(|| self.malformed(format!("total estimate {v} is not a count")))?
            }
        };

        Ok(SearchResponse {
            query: query.to_string(),
            total_estimate: total.max(results.len() as u64),
            results,
        })
    }
}

impl SearchProvider for HttpProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Http
    }

    fn search(&self, query: &str, limit: usize) -> Result<SearchResponse, SearchError> {
        if query.trim().is_empty() {
            return Ok(SearchResponse::empty(query));
        }
        let unavailable = |reason: String| SearchError::ProviderUnavailable {
            id: self.id.clone(),
            reason,
        };
        let mut response = self
            .agent
            .get(&self.request_url(query, limit))
            .header("Accept", "application/json")
            .call()
            .map_err(|e| unavailable(e.to_string()))?;
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| unavailable(e.to_string()))?;
        let json: Value =
            serde_json::from_str(&body).map_err(|e| self.malformed(format!("invalid JSON: {e}")))?;
        self.map_response(query, &json, limit)
    }
}
