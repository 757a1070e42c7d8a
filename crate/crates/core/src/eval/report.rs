use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

/// Reals in reports are written with exactly two decimals.
fn two_decimals<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    let rounded = format!("{value:.2}");
    let text = if rounded == "-0.00" { "0.00".to_string() } else { rounded };
    RawValue::from_string(text)
        .map_err(serde::ser::Error::custom)?
        .serialize(serializer)
}

type TableLine = (&'static str, fn(&EngineReport) -> f64, Option<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Without,
    With,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Without => "without",
            EvalMode::With => "with",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub scenario_id: String,
    #[serde(serialize_with = "two_decimals")]
    pub c1: f64,
    #[serde(serialize_with = "two_decimals")]
    pub c2: f64,
    #[serde(serialize_with = "two_decimals")]
    pub c3: f64,
    #[serde(serialize_with = "two_decimals")]
    pub total: f64,
}

impl ScoreRow {
    pub fn new(scenario_id: &str, c1: f64, c2: f64, c3: f64) -> Self {
        Self {
            scenario_id: scenario_id.to_string(),
            c1,
            c2,
            c3,
            total: c1 + c2 + c3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineReport {
    pub engine_id: String,
    pub mode: EvalMode,
    pub rows: Vec<ScoreRow>,
    #[serde(serialize_with = "two_decimals")]
    pub sum_450: f64,
    #[serde(serialize_with = "two_decimals")]
    pub note_10: f64,
    #[serde(serialize_with = "two_decimals")]
    pub mean_c1: f64,
    #[serde(serialize_with = "two_decimals")]
    pub mean_c2: f64,
    #[serde(serialize_with = "two_decimals")]
    pub mean_c3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    #[serde(serialize_with = "two_decimals")]
    pub delta_c1: f64,
    #[serde(serialize_with = "two_decimals")]
    pub delta_c2: f64,
    #[serde(serialize_with = "two_decimals")]
    pub delta_c3: f64,
    #[serde(serialize_with = "two_decimals")]
    pub delta_note: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineComparison {
    pub engine_id: String,
    pub without: Option<EngineReport>,
    pub with: Option<EngineReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deltas: Option<Deltas>,
}

/// Per-engine results of a suite run, engines in declared order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub engines: Vec<EngineComparison>,
}

impl ComparisonReport {
    /// Pretty JSON with a trailing newline; stable for identical inputs.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reports serialize");
        out.push('\n');
        out
    }

    /// A criterion-by-engine table with one column per mode and a delta
    /// column when both modes were run.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for engine in &self.engines {
            let _ = writeln!(out, "{}", engine.engine_id);
            let _ = writeln!(out, "{:<6}{:>10}{:>10}{:>10}", "", "without", "with", "delta");
            let cell = |r: &Option<EngineReport>, f: fn(&EngineReport) -> f64| {
                r.as_ref().map_or("-".to_string(), |r| format!("{:.2}", f(r)))
            };
            let lines: [TableLine; 4] = [
                ("C1", |r| r.mean_c1, engine.deltas.as_ref().map(|d| d.delta_c1)),
                ("C2", |r| r.mean_c2, engine.deltas.as_ref().map(|d| d.delta_c2)),
                ("C3", |r| r.mean_c3, engine.deltas.as_ref().map(|d| d.delta_c3)),
                ("note", |r| r.note_10, engine.deltas.as_ref().map(|d| d.delta_note)),
            ];
            for (label, f, delta) in lines {
                let _ = writeln!(
                    out,
                    "{:<6}{:>10}{:>10}{:>10}",
                    label,
                    cell(&engine.without, f),
                    cell(&engine.with, f),
                    delta.map_or("-".to_string(), |d| format!("{d:+.2}")),
                );
            }
        }
        out
    }
}
