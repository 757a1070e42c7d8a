use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;

/// Maximum number of results kept per history record.
pub const MAX_HISTORY_RESULTS: usize = 10;

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn generate() -> Self {
                Self(uuid::Uuid::new_v4().simple().to_string())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

string_id!(ProfileId);
string_id!(EntryId);

impl ProfileId {
    /// Profile ids double as file names, so they are restricted to
    /// `[A-Za-z0-9_-]{1,64}`.
    pub fn parse(raw: &str) -> Option<Self> {
        let ok = !raw.is_empty()
            && raw.len() <= 64
            && raw
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
        ok.then(|| Self(raw.to_string()))
    }
}

impl EntryId {
    pub fn new(raw: impl Into<String>) -> Self {
        Self(raw.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyLevel {
    Primary,
    Secondary,
    Undergraduate,
    Graduate,
    Doctoral,
    #[default]
    Unspecified,
}

macro_rules! from_str_via_serde {
    ($name:ident) => {
        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                serde_json::from_value(serde_json::Value::String(s.to_string()))
                    .map_err(|_| format!("unknown {} {s:?}", stringify!($name)))
            }
        }
    };
}

from_str_via_serde!(Sex);
from_str_via_serde!(StudyLevel);
from_str_via_serde!(EntryStatus);

/// Identification fields supplied at first connection.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NewProfile {
    #[serde(default)]
    pub age: u32,
    #[serde(default)]
    pub sex: Sex,
    pub language: String,
    #[serde(default)]
    pub domains: Vec<String>,
    #[serde(default)]
    pub specialty: String,
    #[serde(default)]
    pub profession: String,
    #[serde(default)]
    pub study_level: StudyLevel,
}

/// The static side of a user's context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: ProfileId,
    pub age: u32,
    pub sex: Sex,
    pub language: String,
    pub domains: Vec<String>,
    pub specialty: String,
    pub profession: String,
    pub study_level: StudyLevel,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Proposed,
    Validated,
    Rejected,
}

impl EntryStatus {
    pub const ALL: [EntryStatus; 3] = [
        EntryStatus::Proposed,
        EntryStatus::Validated,
        EntryStatus::Rejected,
    ];
}

impl fmt::Display for EntryStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryStatus::Proposed => "proposed",
            EntryStatus::Validated => "validated",
            EntryStatus::Rejected => "rejected",
        })
    }
}

/// The user's answer to a proposed context term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Validated,
    Rejected,
}

impl From<Decision> for EntryStatus {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Validated => EntryStatus::Validated,
            Decision::Rejected => EntryStatus::Rejected,
        }
    }
}

/// One attribute → value pair of a profile's context base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub id: EntryId,
    pub profile_id: ProfileId,
    pub kind: ContextKind,
    pub attribute: String,
    pub value: String,
    pub status: EntryStatus,
    pub use_count: u64,
    pub created_at: Timestamp,
    pub last_used_at: Timestamp,
}

/// A status change recorded in the profile's transition log. `from` is
/// `None` for the entry's creation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub entry_id: EntryId,
    pub from: Option<EntryStatus>,
    pub to: EntryStatus,
    pub at: Timestamp,
}

/// One search session in the historic search base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub profile_id: ProfileId,
    pub timestamp: Timestamp,
    pub raw_query: String,
    pub reformulated_query: Option<String>,
    pub engine_id: String,
    pub result_titles: Vec<String>,
    pub result_urls: Vec<String>,
    pub total_estimate_baseline: u64,
    pub total_estimate_reformulated: u64,
}

/// The on-disk document for one profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub profile: UserProfile,
    pub entries: Vec<ContextEntry>,
    pub transitions: Vec<Transition>,
}
