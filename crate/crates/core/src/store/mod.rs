//! Profiles, context entries and search history.
//!
//! A store is either purely in memory or backed by a data directory laid out
//! as:
//!
//! ```text
//! <data_dir>/profiles/<id>.json    profile + entries + transition log
//! <data_dir>/history/<id>.jsonl    one HistoryRecord per line, append-only
//! <data_dir>/stopwords/<lang>.txt  extra anti-dictionaries
//! ```
//!
//! Mutations to one profile are serialized behind that profile's lock and
//! written through to disk before they become visible. Readers always see a
//! whole document.

mod derive;
mod model;

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use thiserror::Error;

pub use derive::{derive_static_entries, static_pairs};
pub use model::*;

use crate::clock::{Clock, SystemClock, Timestamp};
use crate::text::{self, AntiDictionaries, AntiDictionary, StopwordError};

/// Environment variable naming the data directory.
pub const DATA_DIR_ENV: &str = "PRESY_DATA_DIR";
/// Data directory used when [`DATA_DIR_ENV`] is unset.
pub const DEFAULT_DATA_DIR: &str = "./presy-data";

/// Resolves the data directory from the environment.
pub fn data_dir_from_env() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no anti-dictionary for language {0:?}")]
    UnsupportedLanguage(String),
    #[error("invalid {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown profile {0}")]
    UnknownProfile(ProfileId),
    #[error("profile {0} already exists")]
    DuplicateProfile(ProfileId),
    #[error("unknown context entry {0}")]
    UnknownEntry(EntryId),
    #[error("entry {entry}: cannot move from {from} to {to}")]
    IllegalTransition {
        entry: EntryId,
        from: EntryStatus,
        to: EntryStatus,
    },
    #[error("malformed history record: {0}")]
    MalformedRecord(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Stopwords(#[from] StopwordError),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read<T>(lock: &RwLock<T>) -> RwLockReadGuard<'_, T> {
    lock.read().unwrap_or_else(|e| e.into_inner())
}

fn write<T>(lock: &RwLock<T>) -> RwLockWriteGuard<'_, T> {
    lock.write().unwrap_or_else(|e| e.into_inner())
}

#[derive(Debug)]
struct ProfileState {
    doc: ProfileDocument,
    history: Vec<HistoryRecord>,
}

/// A consistent copy of one profile and its entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSnapshot {
    pub profile: UserProfile,
    pub entries: Vec<ContextEntry>,
}

pub struct ContextStore {
    root: Option<PathBuf>,
    dictionaries: AntiDictionaries,
    clock: Arc<dyn Clock>,
    profiles: RwLock<BTreeMap<ProfileId, Arc<RwLock<ProfileState>>>>,
    entry_index: RwLock<HashMap<EntryId, ProfileId>>,
}

impl std::fmt::Debug for ContextStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContextStore")
            .field("root", &self.root)
            .field("profiles", &read(&self.profiles).len())
            .finish_non_exhaustive()
    }
}

impl ContextStore {
    /// A store that never touches the filesystem.
    pub fn in_memory(dictionaries: AntiDictionaries) -> Self {
        Self {
            root: None,
            dictionaries,
            clock: Arc::new(SystemClock),
            profiles: RwLock::default(),
            entry_index: RwLock::default(),
        }
    }

    /// Opens (creating if needed) a store rooted at `dir`, loading every
    /// profile, history log and extra anti-dictionary found there.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let root = dir.as_ref().to_path_buf();
        let profiles_dir = root.join("profiles");
        let history_dir = root.join("history");
        fs::create_dir_all(&profiles_dir).map_err(io_err(&profiles_dir))?;
        fs::create_dir_all(&history_dir).map_err(io_err(&history_dir))?;
        let dictionaries = AntiDictionaries::load(&root.join("stopwords"))?;

        let mut profiles = BTreeMap::new();
        let mut entry_index = HashMap::new();
        let mut paths: Vec<_> = fs::read_dir(&profiles_dir)
            .map_err(io_err(&profiles_dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
            .collect();
        paths.sort();
        for path in paths {
            let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
            let doc: ProfileDocument =
                serde_json::from_str(&raw).map_err(|source| StoreError::Corrupt {
                    path: path.clone(),
                    source,
                })?;
            let id = doc.profile.id.clone();
            let history = load_history(&history_dir.join(format!("{id}.jsonl")))?;
            for entry in &doc.entries {
                entry_index.insert(entry.id.clone(), id.clone());
            }
            profiles.insert(id, Arc::new(RwLock::new(ProfileState { doc, history })));
        }

        Ok(Self {
            root: Some(root),
            dictionaries,
            clock: Arc::new(SystemClock),
            profiles: RwLock::new(profiles),
            entry_index: RwLock::new(entry_index),
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn dictionaries(&self) -> &AntiDictionaries {
        &self.dictionaries
    }

    fn state(&self, id: &ProfileId) -> Result<Arc<RwLock<ProfileState>>> {
        read(&self.profiles)
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownProfile(id.clone()))
    }

    fn view<T>(&self, id: &ProfileId, f: impl FnOnce(&ProfileState) -> T) -> Result<T> {
        let state = self.state(id)?;
        let guard = read(&state);
        Ok(f(&guard))
    }

    fn profile_path(&self, id: &ProfileId) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|r| r.join("profiles").join(format!("{id}.json")))
    }

    fn history_path(&self, id: &ProfileId) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|r| r.join("history").join(format!("{id}.jsonl")))
    }

    fn persist(&self, doc: &ProfileDocument) -> Result<()> {
        let Some(path) = self.profile_path(&doc.profile.id) else {
            return Ok(());
        };
        let body = serde_json::to_string_pretty(doc).expect("profile documents serialize");
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, body).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }

    /// Applies `f` to a copy of the profile's document, writes it through and
    /// only then publishes it.
    fn mutate<T>(
        &self,
        id: &ProfileId,
        f: impl FnOnce(&mut ProfileDocument) -> Result<T>,
    ) -> Result<T> {
        let state = self.state(id)?;
        let mut guard = write(&state);
        let mut doc = guard.doc.clone();
        let out = f(&mut doc)?;
        if doc != guard.doc {
            self.persist(&doc)?;
            guard.doc = doc;
        }
        Ok(out)
    }

    /// Validates identification fields, stores the profile under a fresh id
    /// and derives its static context.
    pub fn create_profile(&self, fields: NewProfile) -> Result<UserProfile> {
        self.create_profile_with_id(ProfileId::generate(), fields)
    }

    /// Like [`create_profile`](Self::create_profile) with a caller-chosen id.
    pub fn create_profile_with_id(&self, id: ProfileId, fields: NewProfile) -> Result<UserProfile> {
        let (profile, dictionary) = self.validate_new_profile(id, fields)?;
        let now = profile.created_at;
        let entries = derive_static_entries(&profile, &dictionary, now);
        let transitions = entries
            .iter()
            .map(|e| Transition {
                entry_id: e.id.clone(),
                from: None,
                to: e.status,
                at: now,
            })
            .collect();
        let doc = ProfileDocument {
            profile: profile.clone(),
            entries,
            transitions,
        };

        let mut profiles = write(&self.profiles);
        if profiles.contains_key(&profile.id) {
            return Err(StoreError::DuplicateProfile(profile.id));
        }
        self.persist(&doc)?;
        {
            let mut index = write(&self.entry_index);
            for e in &doc.entries {
                index.insert(e.id.clone(), profile.id.clone());
            }
        }
        profiles.insert(
            profile.id.clone(),
            Arc::new(RwLock::new(ProfileState {
                doc,
                history: Vec::new(),
            })),
        );
        Ok(profile)
    }

    fn validate_new_profile(
        &self,
        id: ProfileId,
        fields: NewProfile,
    ) -> Result<(UserProfile, Arc<AntiDictionary>)> {
        let language = fields.language.trim().to_string();
        if !text::is_language_code(&language) {
            return Err(StoreError::InvalidField {
                field: "language",
                reason: format!("{language:?} is not a two-letter lowercase code"),
            });
        }
        let dictionary = self
            .dictionaries
            .get(&language)
            .ok_or_else(|| StoreError::UnsupportedLanguage(language.clone()))?;

        let mut domains: Vec<String> = Vec::with_capacity(fields.domains.len());
        for raw in &fields.domains {
            let domain = text::normalize(raw);
            if domain.is_empty() {
                return Err(StoreError::InvalidField {
                    field: "domains",
                    reason: "empty domain".into(),
                });
            }
            if text::words(&domain) != [domain.as_str()] {
                return Err(StoreError::InvalidField {
                    field: "domains",
                    reason: format!("{raw:?} is not a single word"),
                });
            }
            if !domains.contains(&domain) {
                domains.push(domain);
            }
        }

        let profile = UserProfile {
            id,
            age: fields.age,
            sex: fields.sex,
            language,
            domains,
            specialty: text::normalize(&fields.specialty),
            profession: text::normalize(&fields.profession),
            study_level: fields.study_level,
            created_at: self.clock.now(),
        };
        Ok((profile, dictionary))
    }

    pub fn profile(&self, id: &ProfileId) -> Result<UserProfile> {
        self.view(id, |s| s.doc.profile.clone())
    }

    pub fn profile_ids(&self) -> Vec<ProfileId> {
        read(&self.profiles).keys().cloned().collect()
    }

    pub fn contains_profile(&self, id: &ProfileId) -> bool {
        read(&self.profiles).contains_key(id)
    }

    /// The whole persisted document of a profile.
    pub fn document(&self, id: &ProfileId) -> Result<ProfileDocument> {
        self.view(id, |s| s.doc.clone())
    }

    pub fn snapshot(&self, id: &ProfileId) -> Result<ProfileSnapshot> {
        let state = self.state(id)?;
        let guard = read(&state);
        Ok(ProfileSnapshot {
            profile: guard.doc.profile.clone(),
            entries: guard.doc.entries.clone(),
        })
    }

    pub fn entries(&self, id: &ProfileId) -> Result<Vec<ContextEntry>> {
        self.view(id, |s| s.doc.entries.clone())
    }

    pub fn transitions(&self, id: &ProfileId) -> Result<Vec<Transition>> {
        self.view(id, |s| s.doc.transitions.clone())
    }

    pub fn entry(&self, entry_id: &EntryId) -> Result<ContextEntry> {
        let profile_id = self.owner(entry_id)?;
        self.view(&profile_id, |s| {
            s.doc.entries.iter().find(|e| &e.id == entry_id).cloned()
        })?
        .ok_or_else(|| StoreError::UnknownEntry(entry_id.clone()))
    }

    /// The profile an entry belongs to.
    pub fn owner(&self, entry_id: &EntryId) -> Result<ProfileId> {
        read(&self.entry_index)
            .get(entry_id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownEntry(entry_id.clone()))
    }

    /// Anti-dictionary for a profile's language.
    pub fn dictionary_for(&self, id: &ProfileId) -> Result<Arc<AntiDictionary>> {
        let language = self.profile(id)?.language;
        self.dictionaries
            .get(&language)
            .ok_or(StoreError::UnsupportedLanguage(language))
    }

    /// Registers harvested terms as proposed dynamic pairs under `attribute`.
    ///
    /// Returns one entry per distinct usable candidate, in candidate order.
    /// Pairs that already exist (in any status, of any kind) are returned as
    /// they are, so rejected terms are never proposed again. Empty
    /// candidates, stop-words and candidates equal to the attribute are
    /// skipped.
    pub fn propose_dynamic_entries<S: AsRef<str>>(
        &self,
        profile_id: &ProfileId,
        attribute: &str,
        candidates: &[S],
    ) -> Result<Vec<ContextEntry>> {
        let attribute = text::normalize(attribute);
        if attribute.is_empty() {
            return Err(StoreError::InvalidField {
                field: "attribute",
                reason: "empty attribute".into(),
            });
        }
        let dictionary = self.dictionary_for(profile_id)?;
        let now = self.clock.now();
        let mut created = Vec::new();
        let out = self.mutate(profile_id, |doc| {
            let mut out: Vec<ContextEntry> = Vec::new();
            for candidate in candidates {
                let value = text::normalize(candidate.as_ref());
                if value.is_empty()
                    || value == attribute
                    || dictionary.is_stopword(&value)
                    || out.iter().any(|e| e.value == value)
                {
                    continue;
                }
                if let Some(existing) = doc
                    .entries
                    .iter()
                    .find(|e| e.attribute == attribute && e.value == value)
                {
                    out.push(existing.clone());
                    continue;
                }
                let entry = ContextEntry {
                    id: EntryId::generate(),
                    profile_id: profile_id.clone(),
                    kind: ContextKind::Dynamic,
                    attribute: attribute.clone(),
                    value,
                    status: EntryStatus::Proposed,
                    use_count: 0,
                    created_at: now,
                    last_used_at: now,
                };
                doc.transitions.push(Transition {
                    entry_id: entry.id.clone(),
                    from: None,
                    to: EntryStatus::Proposed,
                    at: now,
                });
                doc.entries.push(entry.clone());
                created.push(entry.id.clone());
                out.push(entry);
            }
            Ok(out)
        })?;
        if !created.is_empty() {
            let mut index = write(&self.entry_index);
            for id in created {
                index.insert(id, profile_id.clone());
            }
        }
        Ok(out)
    }

    /// Applies the user's decision to a proposed entry. Repeating the
    /// decision an entry already carries is a no-op.
    pub fn set_entry_status(&self, entry_id: &EntryId, decision: Decision) -> Result<ContextEntry> {
        let profile_id = self.owner(entry_id)?;
        let now = self.clock.now();
        let target = EntryStatus::from(decision);
        self.mutate(&profile_id, |doc| {
            let entry = doc
                .entries
                .iter_mut()
                .find(|e| &e.id == entry_id)
                .ok_or_else(|| StoreError::UnknownEntry(entry_id.clone()))?;
            match entry.status {
                s if s == target => {}
                EntryStatus::Proposed => {
                    entry.status = target;
                    doc.transitions.push(Transition {
                        entry_id: entry_id.clone(),
                        from: Some(EntryStatus::Proposed),
                        to: target,
                        at: now,
                    });
                }
                from => {
                    return Err(StoreError::IllegalTransition {
                        entry: entry_id.clone(),
                        from,
                        to: target,
                    })
                }
            }
            Ok(entry.clone())
        })
    }

    /// Entries whose attribute starts with `attribute_prefix` (case-folded)
    /// and whose status is one of `statuses`, most used first, then most
    /// recently used, then by value.
    pub fn query_entries(
        &self,
        profile_id: &ProfileId,
        attribute_prefix: &str,
        statuses: &[EntryStatus],
    ) -> Result<Vec<ContextEntry>> {
        let prefix = text::normalize(attribute_prefix);
        let state = self.state(profile_id)?;
        let guard = read(&state);
        let mut out: Vec<ContextEntry> = guard
            .doc
            .entries
            .iter()
            .filter(|e| e.attribute.starts_with(&prefix) && statuses.contains(&e.status))
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            b.use_count
                .cmp(&a.use_count)
                .then(b.last_used_at.cmp(&a.last_used_at))
                .then_with(|| a.value.cmp(&b.value))
                .then_with(|| a.attribute.cmp(&b.attribute))
        });
        Ok(out)
    }

    /// Bumps `use_count` and `last_used_at` of entries consumed by a
    /// reformulation. Unknown ids are ignored.
    pub fn record_use(&self, profile_id: &ProfileId, entry_ids: &[EntryId], at: Timestamp) -> Result<()> {
        if entry_ids.is_empty() {
            return Ok(());
        }
        self.mutate(profile_id, |doc| {
            for entry in doc.entries.iter_mut().filter(|e| entry_ids.contains(&e.id)) {
                entry.use_count += 1;
                entry.last_used_at = at;
            }
            Ok(())
        })
    }

    /// Appends a record to the profile's search history and returns its
    /// position in the log.
    pub fn append_history(&self, record: HistoryRecord) -> Result<u64> {
        if record.result_titles.len() != record.result_urls.len() {
            return Err(StoreError::MalformedRecord(format!(
                "{} titles but {} urls",
                record.result_titles.len(),
                record.result_urls.len()
            )));
        }
        if record.result_titles.len() > MAX_HISTORY_RESULTS {
            return Err(StoreError::MalformedRecord(format!(
                "{} results, at most {MAX_HISTORY_RESULTS} allowed",
                record.result_titles.len()
            )));
        }
        let state = self.state(&record.profile_id)?;
        let mut guard = write(&state);
        if let Some(path) = self.history_path(&record.profile_id) {
            let mut line = serde_json::to_string(&record).expect("history records serialize");
            line.push('\n');
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(io_err(&path))?;
            file.write_all(line.as_bytes()).map_err(io_err(&path))?;
        }
        guard.history.push(record);
        Ok(guard.history.len() as u64 - 1)
    }

    pub fn history(&self, profile_id: &ProfileId) -> Result<Vec<HistoryRecord>> {
        self.view(profile_id, |s| s.history.clone())
    }
}

fn load_history(path: &Path) -> Result<Vec<HistoryRecord>> {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| StoreError::Corrupt {
            path: path.to_path_buf(),
            source,
        })?;
        out.push(record);
    }
    Ok(out)
}
