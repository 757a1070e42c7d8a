//! Three-criterion evaluation of search results with and without
//! reformulation.
//!
//! Every query is rated on three criteria, each out of 10:
//!
//! * C1: share of relevant results among ranks 1 to 3,
//! * C2: share of relevant results among ranks 4 to 10,
//! * C3: share of results that are not redundant, where a result is
//!   redundant when an earlier result has the same url or the same site.
//!
//! A query's total is out of 30; fifteen queries give a sum out of 450 that
//! is reduced to a note out of 10 per engine and mode. Missing results count
//! as not relevant, so the C1 and C2 denominators stay 3 and 7.

mod report;
mod suite;

use std::collections::HashMap;

use thiserror::Error;
use url::Url;

pub use report::{ComparisonReport, Deltas, EngineComparison, EngineReport, EvalMode, ScoreRow};
pub use suite::{run_suite, EvaluationScenario, ScenarioClass, ScenarioSuite};

use crate::gateway::{SearchError, SearchResult};
use crate::store::StoreError;

/// Results examined per query.
pub const MAX_EVALUATED_RESULTS: usize = 10;
/// Queries in a standard suite.
pub const SUITE_SIZE: usize = 15;
pub const SIMPLE_SCENARIOS: usize = 10;
pub const COMPLEX_SCENARIOS: usize = 5;
/// Ranks covered by C1; the rest up to [`MAX_EVALUATED_RESULTS`] is C2.
pub const TOP_SLOTS: usize = 3;
pub const TAIL_SLOTS: usize = MAX_EVALUATED_RESULTS - TOP_SLOTS;
pub const CRITERION_SCALE: f64 = 10.0;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot find a host in url {0:?}")]
    UnparsableUrl(String),
    #[error("{0} results given, at most {MAX_EVALUATED_RESULTS} are scored")]
    TooManyResults(usize),
    #[error("expected {SUITE_SIZE} score rows, got {0}")]
    WrongRowCount(usize),
    #[error("cannot compare {without_engine}/{without_mode} with {with_engine}/{with_mode}")]
    MismatchedEngines {
        without_engine: String,
        without_mode: EvalMode,
        with_engine: String,
        with_mode: EvalMode,
    },
    #[error("invalid scenario suite: {0}")]
    InvalidSuite(String),
    #[error("scenario {scenario:?} ({mode}) on {engine:?}: {source}")]
    Provider {
        scenario: String,
        mode: EvalMode,
        engine: String,
        #[source]
        source: SearchError,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn parse_url(raw: &str) -> Option<Url> {
    let raw = raw.trim();
    if raw.starts_with('/') {
        return None;
    }
    let parsed = if raw.contains("://") {
        Url::parse(raw)
    } else {
        Url::parse(&format!("http://{raw}"))
    };
    parsed
        .ok()
        .filter(|u| u.host_str().is_some_and(|h| !h.is_empty()))
}

fn strip_www(host: &str) -> &str {
    host.strip_prefix("www.").unwrap_or(host)
}

/// Lowercase authority host of `url` without a leading `www.`. Urls without
/// a scheme are read as `http://`.
pub fn site(url: &str) -> Result<String, EvalError> {
    let parsed = parse_url(url).ok_or_else(|| EvalError::UnparsableUrl(url.to_string()))?;
    let host = parsed.host_str().unwrap_or_default().to_ascii_lowercase();
    Ok(strip_www(&host).to_string())
}

/// The form under which urls are matched against judgments: fragment
/// dropped, `www.` stripped. Unparsable urls match only themselves.
pub fn judgment_key(url: &str) -> String {
    let Some(mut parsed) = parse_url(url) else {
        return url.trim().to_string();
    };
    parsed.set_fragment(None);
    let host = parsed.host_str().unwrap_or_default().to_ascii_lowercase();
    let stripped = strip_www(&host).to_string();
    if stripped != host && parsed.set_host(Some(&stripped)).is_err() {
        return url.trim().to_string();
    }
    parsed.to_string()
}

/// `flags[i]` is true when result `i` repeats the url or the site of an
/// earlier result.
pub fn redundancy_flags(results: &[SearchResult]) -> Result<Vec<bool>, EvalError> {
    let mut urls = Vec::with_capacity(results.len());
    let mut sites = Vec::with_capacity(results.len());
    let mut flags = Vec::with_capacity(results.len());
    for r in results {
        let site = site(&r.url)?;
        flags.push(urls.contains(&r.url.as_str()) || sites.contains(&site));
        urls.push(r.url.as_str());
        sites.push(site);
    }
    Ok(flags)
}

/// Relevance judgments keyed by [`judgment_key`]. A url judged relevant
/// under any of its spellings counts as relevant.
#[derive(Debug, Clone, Default)]
pub struct Judgments(HashMap<String, bool>);

impl Judgments {
    pub fn new<'a>(raw: impl IntoIterator<Item = (&'a String, &'a bool)>) -> Self {
        let mut map: HashMap<String, bool> = HashMap::new();
        for (url, relevant) in raw {
            *map.entry(judgment_key(url)).or_default() |= *relevant;
        }
        Self(map)
    }

    pub fn is_relevant(&self, url: &str) -> bool {
        self.0.get(&judgment_key(url)).copied().unwrap_or(false)
    }
}

/// Rates one query's results (rank-ordered, at most ten).
pub fn score_query(
    scenario_id: &str,
    results: &[SearchResult],
    judgments: &Judgments,
) -> Result<ScoreRow, EvalError> {
    if results.len() > MAX_EVALUATED_RESULTS {
        return Err(EvalError::TooManyResults(results.len()));
    }
    let relevant: Vec<bool> = results.iter().map(|r| judgments.is_relevant(&r.url)).collect();
    let top = relevant.iter().take(TOP_SLOTS).filter(|r| **r).count();
    let tail = relevant.iter().skip(TOP_SLOTS).filter(|r| **r).count();
    let redundant = redundancy_flags(results)?.into_iter().filter(|f| *f).count();

    let c1 = CRITERION_SCALE * top as f64 / TOP_SLOTS as f64;
    let c2 = CRITERION_SCALE * tail as f64 / TAIL_SLOTS as f64;
    let c3 = if results.is_empty() {
        CRITERION_SCALE
    } else {
        CRITERION_SCALE * (1.0 - redundant as f64 / results.len() as f64)
    };
    Ok(ScoreRow::new(scenario_id, c1, c2, c3))
}

/// Folds fifteen rows into an engine's note.
pub fn aggregate(rows: Vec<ScoreRow>, engine_id: &str, mode: EvalMode) -> Result<EngineReport, EvalError> {
    if rows.len() != SUITE_SIZE {
        return Err(EvalError::WrongRowCount(rows.len()));
    }
    let n = rows.len() as f64;
    let sum = |f: fn(&ScoreRow) -> f64| rows.iter().map(f).sum::<f64>();
    let sum_450 = sum(|r| r.total);
    let (mean_c1, mean_c2, mean_c3) = (sum(|r| r.c1) / n, sum(|r| r.c2) / n, sum(|r| r.c3) / n);
    Ok(EngineReport {
        engine_id: engine_id.to_string(),
        mode,
        sum_450,
        note_10: sum_450 / (n * 3.0),
        mean_c1,
        mean_c2,
        mean_c3,
        rows,
    })
}

/// With-minus-without differences for one engine.
pub fn compare(without: EngineReport, with: EngineReport) -> Result<EngineComparison, EvalError> {
    if without.engine_id != with.engine_id
        || without.mode != EvalMode::Without
        || with.mode != EvalMode::With
    {
        return Err(EvalError::MismatchedEngines {
            without_engine: without.engine_id,
            without_mode: without.mode,
            with_engine: with.engine_id,
            with_mode: with.mode,
        });
    }
    let deltas = Deltas {
        delta_c1: with.mean_c1 - without.mean_c1,
        delta_c2: with.mean_c2 - without.mean_c2,
        delta_c3: with.mean_c3 - without.mean_c3,
        delta_note: with.note_10 - without.note_10,
    };
    Ok(EngineComparison {
        engine_id: with.engine_id.clone(),
        without: Some(without),
        with: Some(with),
        deltas: Some(deltas),
    })
}
