use serde::{Deserialize, Serialize};

use super::{ProviderRegistry, SearchResponse, DEFAULT_RESULT_LIMIT};
use crate::reformulate::{self, ReformulatedQuery};
use crate::store::{ContextStore, EntryId, EntryStatus, HistoryRecord, ProfileId, MAX_HISTORY_RESULTS};
use crate::text::{self, DEFAULT_CANDIDATE_CAP};
use crate::Error;

/// How the second search of a dual search is formed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "terms", rename_all = "snake_case")]
pub enum SearchMode {
    Off,
    Auto,
    Manual(Vec<String>),
}

/// A harvested term together with the context entry that carries it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub term: String,
    pub entry_id: EntryId,
    pub status: EntryStatus,
}

/// Both result lists of a dual search and the terms harvested from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub baseline: SearchResponse,
    pub reformulated: SearchResponse,
    pub reformulation: ReformulatedQuery,
    pub proposals: Vec<Proposal>,
}

/// Runs `query` as typed and as reformulated per `mode`, logs the session
/// in the profile's history and proposes the new title words as dynamic
/// context under the query's last word.
///
/// When the reformulation leaves the query unchanged the provider is called
/// once and the response is shared. Entry usage from automatic
/// reformulation is only recorded once both searches succeed.
pub fn dual_search(
    store: &ContextStore,
    providers: &ProviderRegistry,
    profile_id: &ProfileId,
    query: &str,
    provider_id: &str,
    mode: &SearchMode,
) -> Result<ComparisonResult, Error> {
    let snapshot = store.snapshot(profile_id)?;
    let dictionary = store.dictionary_for(profile_id)?;
    let provider = providers.get(provider_id)?;
    let now = store.now();

    let (reformulation, used) = match mode {
        SearchMode::Off => (ReformulatedQuery::identity(query), Vec::new()),
        SearchMode::Auto => reformulate::plan_auto(&snapshot, &dictionary, query, now),
        SearchMode::Manual(terms) => (reformulate::expand(query, terms), Vec::new()),
    };

    let baseline = provider.search(query, DEFAULT_RESULT_LIMIT)?;
    let reformulated = if reformulation.expanded == reformulation.original {
        baseline.clone()
    } else {
        provider.search(&reformulation.expanded, DEFAULT_RESULT_LIMIT)?
    };
    store.record_use(profile_id, &used, now)?;

    let mut titles: Vec<&str> = baseline.titles().collect();
    if reformulation.expanded != reformulation.original {
        titles.extend(reformulated.titles());
    }
    let proposals = match text::last_word(query) {
        Some(attribute) => {
            let candidates: Vec<String> =
                text::extract_candidates(&titles, &dictionary, DEFAULT_CANDIDATE_CAP)
                    .into_iter()
                    .filter(|c| *c != attribute)
                    .collect();
            store
                .propose_dynamic_entries(profile_id, &attribute, &candidates)?
                .into_iter()
                .map(|e| Proposal {
                    term: e.value,
                    entry_id: e.id,
                    status: e.status,
                })
                .collect()
        }
        None => Vec::new(),
    };

    let shown = &baseline.results[..baseline.results.len().min(MAX_HISTORY_RESULTS)];
    store.append_history(HistoryRecord {
        profile_id: profile_id.clone(),
        timestamp: now,
        raw_query: query.to_string(),
        reformulated_query: (!reformulation.is_identity()).then(|| reformulation.expanded.clone()),
        engine_id: provider_id.to_string(),
        result_titles: shown.iter().map(|r| r.title.clone()).collect(),
        result_urls: shown.iter().map(|r| r.url.clone()).collect(),
        total_estimate_baseline: baseline.total_estimate,
        total_estimate_reformulated: reformulated.total_estimate,
    })?;

    Ok(ComparisonResult {
        baseline,
        reformulated,
        reformulation,
        proposals,
    })
}
