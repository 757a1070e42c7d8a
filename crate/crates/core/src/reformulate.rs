//! Turning a (possibly half-typed) query into expansion suggestions drawn
//! from the profile's validated context pairs, and building expanded queries.
//!
//! Matching works on the last word of the query: every validated pair whose
//! attribute equals that word, or starts with it while the user is still
//! typing, offers its value. Values already present in the query are never
//! offered. Suggestions are grouped by value and ranked by
//! [`score_suggestion`].

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::store::{
    ContextEntry, ContextKind, ContextStore, EntryId, EntryStatus, ProfileId, ProfileSnapshot,
    StoreError, UserProfile,
};
use crate::text::{self, AntiDictionary};

/// At most this many terms are appended to a query.
pub const MAX_ADDED_TERMS: usize = 4;
/// Number of suggestions consumed by automatic reformulation.
pub const AUTO_SUGGESTIONS: usize = 2;

const STATIC_BASE: f64 = 1.0;
const DYNAMIC_BASE: f64 = 0.5;
const DOMAIN_BONUS: f64 = 1.0;
const MS_PER_DAY: f64 = 86_400_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub value: String,
    pub source_entry_ids: Vec<EntryId>,
    pub score: f64,
    pub preview: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReformulationMode {
    Off,
    Manual,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReformulatedQuery {
    pub original: String,
    pub expanded: String,
    pub added_terms: Vec<String>,
    pub mode: ReformulationMode,
}

impl ReformulatedQuery {
    /// The query left untouched.
    pub fn identity(query: &str) -> Self {
        Self {
            original: query.to_string(),
            expanded: query.to_string(),
            added_terms: Vec::new(),
            mode: ReformulationMode::Off,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.added_terms.is_empty()
    }
}

fn age_in_days(now: Timestamp, then: Timestamp) -> f64 {
    ((now - then).num_milliseconds() as f64 / MS_PER_DAY).max(0.0)
}

/// Score of one suggested value, given every entry that offers it.
///
/// Each entry contributes its kind's base weight, `ln(1 + use_count)` and a
/// recency term `1 / (1 + age in days)`. A value that is one of the
/// profile's domains or specialty words earns a single flat bonus.
pub fn score_suggestion(entries: &[&ContextEntry], profile: &UserProfile, now: Timestamp) -> f64 {
    let mut score = 0.0;
    for entry in entries {
        let base = match entry.kind {
            ContextKind::Static => STATIC_BASE,
            ContextKind::Dynamic => DYNAMIC_BASE,
        };
        let usage = (1.0 + entry.use_count as f64).ln();
        let recency = 1.0 / (1.0 + age_in_days(now, entry.last_used_at));
        score += base + usage + recency;
    }
    let Some(value) = entries.first().map(|e| e.value.as_str()) else {
        return score;
    };
    let in_profile = profile.domains.iter().any(|d| d == value)
        || text::words(&profile.specialty).iter().any(|w| w == value);
    if in_profile {
        score += DOMAIN_BONUS;
    }
    score
}

/// Suggestions for `partial_query` over one profile snapshot.
pub fn suggestions_for(
    snapshot: &ProfileSnapshot,
    dictionary: &AntiDictionary,
    partial_query: &str,
    limit: usize,
    now: Timestamp,
) -> Vec<Suggestion> {
    let query_words = text::words(partial_query);
    let Some(last) = query_words.last() else {
        return Vec::new();
    };
    let present: HashSet<&str> = query_words.iter().map(String::as_str).collect();

    let mut groups: BTreeMap<&str, Vec<&ContextEntry>> = BTreeMap::new();
    for entry in &snapshot.entries {
        if entry.status == EntryStatus::Validated
            && entry.attribute.starts_with(last.as_str())
            && !present.contains(entry.value.as_str())
            && !dictionary.is_stopword(&entry.value)
        {
            groups.entry(entry.value.as_str()).or_default().push(entry);
        }
    }

    let mut out: Vec<Suggestion> = groups
        .into_iter()
        .map(|(value, mut entries)| {
            entries.sort_by(|a, b| a.id.cmp(&b.id));
            Suggestion {
                value: value.to_string(),
                source_entry_ids: entries.iter().map(|e| e.id.clone()).collect(),
                score: score_suggestion(&entries, &snapshot.profile, now),
                preview: expand(partial_query, &[value]).expanded,
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.value.cmp(&b.value)));
    out.truncate(limit);
    out
}

/// Ranked reformulation suggestions for a profile.
pub fn suggest(
    store: &ContextStore,
    profile_id: &ProfileId,
    partial_query: &str,
    limit: usize,
) -> Result<Vec<Suggestion>, StoreError> {
    let snapshot = store.snapshot(profile_id)?;
    let dictionary = store.dictionary_for(profile_id)?;
    Ok(suggestions_for(
        &snapshot,
        &dictionary,
        partial_query,
        limit,
        store.now(),
    ))
}

/// Appends `terms` to `query`, skipping words the query already has and
/// stopping after [`MAX_ADDED_TERMS`]. The original words keep their order.
pub fn expand<S: AsRef<str>>(query: &str, terms: &[S]) -> ReformulatedQuery {
    let existing: HashSet<String> = text::words(query).into_iter().collect();
    let mut added: Vec<String> = Vec::new();
    'terms: for term in terms {
        for word in text::words(term.as_ref()) {
            if added.len() == MAX_ADDED_TERMS {
                break 'terms;
            }
            if !existing.contains(&word) && !added.contains(&word) {
                added.push(word);
            }
        }
    }
    let expanded = if added.is_empty() {
        query.to_string()
    } else {
        let base = query.trim();
        if base.is_empty() {
            added.join(" ")
        } else {
            format!("{base} {}", added.join(" "))
        }
    };
    ReformulatedQuery {
        original: query.to_string(),
        expanded,
        added_terms: added,
        mode: ReformulationMode::Manual,
    }
}

/// The automatic reformulation of `query` over a snapshot, with the ids of
/// the entries it consumes. Does not touch the store.
pub fn plan_auto(
    snapshot: &ProfileSnapshot,
    dictionary: &AntiDictionary,
    query: &str,
    now: Timestamp,
) -> (ReformulatedQuery, Vec<EntryId>) {
    let picked = suggestions_for(snapshot, dictionary, query, AUTO_SUGGESTIONS, now);
    if picked.is_empty() {
        return (ReformulatedQuery::identity(query), Vec::new());
    }
    let values: Vec<&str> = picked.iter().map(|s| s.value.as_str()).collect();
    let mut reformulated = expand(query, &values);
    reformulated.mode = ReformulationMode::Auto;
    let used = picked
        .into_iter()
        .filter(|s| reformulated.added_terms.contains(&s.value))
        .flat_map(|s| s.source_entry_ids)
        .collect();
    (reformulated, used)
}

/// Expands `query` with its top suggestions and records the use of the
/// entries behind them. Without suggestions the query is returned unchanged
/// in `Off` mode.
pub fn auto_reformulate(
    store: &ContextStore,
    profile_id: &ProfileId,
    query: &str,
) -> Result<ReformulatedQuery, StoreError> {
    let snapshot = store.snapshot(profile_id)?;
    let dictionary = store.dictionary_for(profile_id)?;
    let now = store.now();
    let (reformulated, used) = plan_auto(&snapshot, &dictionary, query, now);
    store.record_use(profile_id, &used, now)?;
    Ok(reformulated)
}
