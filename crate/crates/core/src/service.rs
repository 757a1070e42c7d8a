//! HTTP JSON API over a context store and a provider registry.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/profiles` | profile fields, `Idempotency-Key` header |
//! | GET | `/profiles/{id}` | |
//! | GET | `/profiles/{id}/context` | `?status=&prefix=` |
//! | GET | `/profiles/{id}/suggest` | `?q=&limit=` |
//! | POST | `/profiles/{id}/search` | `{query, engine, mode, terms?}` |
//! | POST | `/profiles/{id}/context/validate` | `[{entry_id, decision}]` |
//! | GET | `/profiles/{id}/history` | |
//! | GET | `/engines` | |
//! | POST | `/eval/run` | `{profile_id, scenarios, engines?, modes?}` |
//!
//! Errors are `{"code", "message"}` bodies with a matching status.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::eval::{self, EvalError, EvalMode, ScenarioSuite};
use crate::gateway::{self, ProviderRegistry, SearchError, SearchMode, SearchProvider};
use crate::reformulate;
use crate::store::{ContextStore, Decision, EntryId, EntryStatus, NewProfile, ProfileId, StoreError};
use crate::Error;

pub const ADDR_ENV: &str = "PRESY_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8750";
pub const CORS_ENV: &str = "PRESY_CORS_ORIGINS";
pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";
pub const DEFAULT_SUGGESTION_LIMIT: usize = 10;

/// The wire form of every error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code.to_string(),
            message: self.message.clone(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, code) = match &e {
            StoreError::UnknownProfile(_) => (StatusCode::NOT_FOUND, "unknown_profile"),
            StoreError::UnknownEntry(_) => (StatusCode::NOT_FOUND, "unknown_entry"),
            StoreError::DuplicateProfile(_) => (StatusCode::CONFLICT, "duplicate_profile"),
            StoreError::IllegalTransition { .. } => (StatusCode::CONFLICT, "illegal_transition"),
            StoreError::UnsupportedLanguage(_) => (StatusCode::BAD_REQUEST, "unsupported_language"),
            StoreError::InvalidField { .. } => (StatusCode::BAD_REQUEST, "invalid_field"),
            StoreError::MalformedRecord(_) => (StatusCode::BAD_REQUEST, "malformed_record"),
            StoreError::Io { .. } | StoreError::Corrupt { .. } | StoreError::Stopwords(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "storage_error")
            }
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let (status, code) = match &e {
            SearchError::UnknownProvider(_) => (StatusCode::NOT_FOUND, "unknown_engine"),
            SearchError::ProviderUnavailable { .. } => (StatusCode::BAD_GATEWAY, "provider_unavailable"),
            SearchError::MalformedProviderResponse { .. } => {
                (StatusCode::BAD_GATEWAY, "malformed_provider_response")
            }
            SearchError::InvalidLimit => (StatusCode::BAD_REQUEST, "invalid_limit"),
            SearchError::DuplicateId(_)
            | SearchError::MissingConfig { .. }
            | SearchError::DuplicateUrl(_)
            | SearchError::Corpus { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "engine_misconfigured"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Store(e) => e.into(),
            EvalError::Provider { source, .. } => {
                let mut api = ApiError::from(source);
                api.message = format!("evaluation aborted: {}", api.message);
                api
            }
            other => ApiError::new(StatusCode::BAD_REQUEST, "invalid_evaluation", other.to_string()),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Store(e) => e.into(),
            Error::Search(e) => e.into(),
            Error::Eval(e) => e.into(),
        }
    }
}

fn parse_json<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.to_string()))
}

fn profile_id(raw: &str) -> Result<ProfileId, ApiError> {
    ProfileId::parse(raw).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_profile",
            format!("unknown profile {raw}"),
        )
    })
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    })?
}

/// Shared handler state.
#[derive(Clone)]
pub struct AppState {
    store: Arc<ContextStore>,
    providers: Arc<ProviderRegistry>,
    idempotency: Arc<Mutex<HashMap<String, (CreateProfileRequest, ProfileId)>>>,
}

impl AppState {
    pub fn new(store: Arc<ContextStore>, providers: Arc<ProviderRegistry>) -> Self {
        Self {
            store,
            providers,
            idempotency: Arc::default(),
        }
    }

    pub fn store(&self) -> &Arc<ContextStore> {
        &self.store
    }

    pub fn providers(&self) -> &Arc<ProviderRegistry> {
        &self.providers
    }
}

/// `POST /profiles` body: identification fields and an optional id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateProfileRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub fields: NewProfile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    pub engine: String,
    #[serde(flatten)]
    pub mode: SearchMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationItem {
    pub entry_id: EntryId,
    pub decision: Decision,
}

/// Per-item outcome of a validation batch: the resulting status, or an
/// error when the item was not applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub entry_id: EntryId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<EntryStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub profile_id: String,
    pub scenarios: ScenarioSuite,
    /// Engine ids to evaluate; all registered engines when absent.
    #[serde(default)]
    pub engines: Option<Vec<String>>,
    #[serde(default)]
    pub modes: Option<Vec<EvalMode>>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/profiles", post(create_profile))
        .route("/profiles/{id}", get(get_profile))
        .route("/profiles/{id}/context", get(get_context))
        .route("/profiles/{id}/suggest", get(suggest))
        .route("/profiles/{id}/search", post(search))
        .route("/profiles/{id}/context/validate", post(validate))
        .route("/profiles/{id}/history", get(history))
        .route("/engines", get(engines))
        .route("/eval/run", post(run_eval))
        .fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
        })
        .with_state(state)
}

/// CORS for the given origins; `*` or an empty list allows any origin.
pub fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    if origins.is_empty() || origins.iter().any(|o| o == "*") {
        return layer.allow_origin(Any);
    }
    let values: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    layer.allow_origin(AllowOrigin::list(values))
}

/// Serves the API until the process receives Ctrl-C.
pub async fn serve(addr: SocketAddr, state: AppState, origins: &[String]) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state).layer(cors(origins)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn create_profile(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let key = headers
        .get(IDEMPOTENCY_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "missing_idempotency_key",
                "profile creation requires an Idempotency-Key header",
            )
        })?
        .to_string();
    let request: CreateProfileRequest = parse_json(&body)?;

    blocking(move || {
        let mut seen = state.idempotency.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((previous, id)) = seen.get(&key) {
            if *previous != request {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "idempotency_key_reused",
                    "the Idempotency-Key was already used with a different body",
                ));
            }
            let profile = state.store.profile(id)?;
            return Ok((StatusCode::OK, Json(profile)).into_response());
        }
        let profile = match &request.id {
            Some(raw) => {
                let id = ProfileId::parse(raw).ok_or_else(|| {
                    ApiError::new(
                        StatusCode::BAD_REQUEST,
                        "invalid_field",
                        "invalid id: use 1 to 64 of [A-Za-z0-9_-]",
                    )
                })?;
                state.store.create_profile_with_id(id, request.fields.clone())?
            }
            None => state.store.create_profile(request.fields.clone())?,
        };
        seen.insert(key, (request, profile.id.clone()));
        Ok((StatusCode::CREATED, Json(profile)).into_response())
    })
    .await
}

async fn get_profile(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let id = profile_id(&id)?;
    Ok(Json(state.store.profile(&id)?).into_response())
}

#[derive(Debug, Deserialize)]
struct ContextQuery {
    #[serde(default)]
    status: Option<EntryStatus>,
    #[serde(default)]
    prefix: Option<String>,
}

async fn get_context(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ContextQuery>,
) -> Result<Response, ApiError> {
    let id = profile_id(&id)?;
    let statuses: Vec<EntryStatus> = match q.status {
        Some(s) => vec![s],
        None => EntryStatus::ALL.to_vec(),
    };
    let entries = state
        .store
        .query_entries(&id, q.prefix.as_deref().unwrap_or(""), &statuses)?;
    Ok(Json(entries).into_response())
}

async fn suggest(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let id = profile_id(&id)?;
    let q = params.get("q").ok_or_else(|| {
        ApiError::new(StatusCode::BAD_REQUEST, "missing_parameter", "query parameter q is required")
    })?;
    let limit = match params.get("limit") {
        None => DEFAULT_SUGGESTION_LIMIT,
        Some(raw) => raw.parse::<usize>().map_err(|_| {
            ApiError::new(StatusCode::BAD_REQUEST, "invalid_parameter", format!("invalid limit {raw:?}"))
        })?,
    };
    let suggestions = reformulate::suggest(&state.store, &id, q, limit)?;
    Ok(Json(suggestions).into_response())
}

async fn search(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = profile_id(&id)?;
    let request: SearchRequest = parse_json(&body)?;
    blocking(move || {
        let result = gateway::dual_search(
            &state.store,
            &state.providers,
            &id,
            &request.query,
            &request.engine,
            &request.mode,
        )?;
        Ok(Json(result).into_response())
    })
    .await
}

async fn validate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = profile_id(&id)?;
    let items: Vec<ValidationItem> = parse_json(&body)?;
    blocking(move || {
        state.store.profile(&id)?;
        let outcomes: Vec<ValidationOutcome> = items
            .into_iter()
            .map(|item| {
                let applied = match state.store.owner(&item.entry_id) {
                    Ok(owner) if owner == id => state.store.set_entry_status(&item.entry_id, item.decision),
                    Ok(_) | Err(StoreError::UnknownEntry(_)) => {
                        Err(StoreError::UnknownEntry(item.entry_id.clone()))
                    }
                    Err(e) => Err(e),
                };
                match applied {
                    Ok(entry) => ValidationOutcome {
                        entry_id: item.entry_id,
                        status: Some(entry.status),
                        error: None,
                    },
                    Err(e) => ValidationOutcome {
                        entry_id: item.entry_id,
                        status: None,
                        error: Some(ApiError::from(e).body()),
                    },
                }
            })
            .collect();
        Ok(Json(outcomes).into_response())
    })
    .await
}

async fn history(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let id = profile_id(&id)?;
    Ok(Json(state.store.history(&id)?).into_response())
}

async fn engines(State(state): State<AppState>) -> Response {
    Json(state.providers.list()).into_response()
}

async fn run_eval(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: EvalRequest = parse_json(&body)?;
    let id = profile_id(&request.profile_id)?;
    blocking(move || {
        let providers: Vec<Arc<dyn SearchProvider>> = match &request.engines {
            Some(ids) => ids
                .iter()
                .map(|e| state.providers.get(e))
                .collect::<Result<_, _>>()?,
            None => state
                .providers
                .ids()
                .iter()
                .map(|e| state.providers.get(e))
                .collect::<Result<_, _>>()?,
        };
        let modes = request
            .modes
            .unwrap_or_else(|| vec![EvalMode::Without, EvalMode::With]);
        let report = eval::run_suite(&state.store, &providers, &id, &request.scenarios, &modes)?;
        Ok((
            [(axum::http::header::CONTENT_TYPE, "application/json")],
            report.to_json(),
        )
            .into_response())
    })
    .await
}
