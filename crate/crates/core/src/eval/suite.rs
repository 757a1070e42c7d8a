use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    aggregate, compare, score_query, ComparisonReport, EngineComparison, EngineReport, EvalError,
    EvalMode,
    Judgments, COMPLEX_SCENARIOS, MAX_EVALUATED_RESULTS, SIMPLE_SCENARIOS, SUITE_SIZE,
};
use crate::gateway::SearchProvider;
use crate::reformulate;
use crate::store::{ContextStore, ProfileId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioClass {
    Simple,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationScenario {
    pub id: String,
    pub query: String,
    pub class: ScenarioClass,
    /// url → relevant
    #[serde(default)]
    pub judgments: BTreeMap<String, bool>,
}

/// The scenario file: `{"scenarios": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSuite {
    pub scenarios: Vec<EvaluationScenario>,
}

impl ScenarioSuite {
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let raw = fs::read_to_string(path)
            .map_err(|e| EvalError::InvalidSuite(format!("{}: {e}", path.display())))?;
        Self::from_json(&raw)
    }

    pub fn from_json(raw: &str) -> Result<Self, EvalError> {
        let suite: Self =
            serde_json::from_str(raw).map_err(|e| EvalError::InvalidSuite(e.to_string()))?;
        suite.validate()?;
        Ok(suite)
    }

    /// Fifteen scenarios with unique ids and non-empty queries: ten simple,
    /// five complex.
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.scenarios.len() != SUITE_SIZE {
            return Err(EvalError::InvalidSuite(format!(
                "{} scenarios, expected {SUITE_SIZE}",
                self.scenarios.len()
            )));
        }
        let simple = self
            .scenarios
            .iter()
            .filter(|s| s.class == ScenarioClass::Simple)
            .count();
        if simple != SIMPLE_SCENARIOS {
            return Err(EvalError::InvalidSuite(format!(
                "{simple} simple and {} complex scenarios, expected {SIMPLE_SCENARIOS} and {COMPLEX_SCENARIOS}",
                SUITE_SIZE - simple
            )));
        }
        let mut ids = std::collections::HashSet::new();
        for s in &self.scenarios {
            if s.query.trim().is_empty() {
                return Err(EvalError::InvalidSuite(format!("scenario {:?} has an empty query", s.id)));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(EvalError::InvalidSuite(format!("duplicate scenario id {:?}", s.id)));
            }
        }
        Ok(())
    }
}

/// Runs every scenario through every provider in the requested modes and
/// compares the notes.
///
/// The "with" mode uses the profile's automatic reformulation as of the
/// start of the run. Usage counters are left untouched so that repeated runs
/// over the same store produce the same report.
pub fn run_suite(
    store: &ContextStore,
    providers: &[Arc<dyn SearchProvider>],
    profile_id: &ProfileId,
    suite: &ScenarioSuite,
    modes: &[EvalMode],
) -> Result<ComparisonReport, EvalError> {
    suite.validate()?;
    let snapshot = store.snapshot(profile_id)?;
    let dictionary = store.dictionary_for(profile_id)?;
    let now = store.now();
    let judgments: Vec<Judgments> = suite
        .scenarios
        .iter()
        .map(|s| Judgments::new(&s.judgments))
        .collect();

    let mut engines = Vec::with_capacity(providers.len());
    for provider in providers {
        let run = |mode: EvalMode| -> Result<Option<EngineReport>, EvalError> {
            if !modes.contains(&mode) {
                return Ok(None);
            }
            let mut rows = Vec::with_capacity(suite.scenarios.len());
            for (scenario, judged) in suite.scenarios.iter().zip(&judgments) {
                let query = match mode {
                    EvalMode::Without => scenario.query.clone(),
                    EvalMode::With => {
                        reformulate::plan_auto(&snapshot, &dictionary, &scenario.query, now)
                            .0
                            .expanded
                    }
                };
                let response = provider
                    .search(&query, MAX_EVALUATED_RESULTS)
                    .map_err(|source| EvalError::Provider {
                        scenario: scenario.id.clone(),
                        mode,
                        engine: provider.id().to_string(),
                        source,
                    })?;
                let shown = &response.results[..response.results.len().min(MAX_EVALUATED_RESULTS)];
                rows.push(score_query(&scenario.id, shown, judged)?);
            }
            aggregate(rows, provider.id(), mode).map(Some)
        };
        let without = run(EvalMode::Without)?;
        let with = run(EvalMode::With)?;
        engines.push(match (without, with) {
            (Some(without), Some(with)) => compare(without, with)?,
            (without, with) => EngineComparison {
                engine_id: provider.id().to_string(),
                without,
                with,
                deltas: None,
            },
        });
    }
    Ok(ComparisonReport { engines })
}
