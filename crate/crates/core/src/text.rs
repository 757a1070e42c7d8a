//! Text processing shared by every other module: word segmentation,
//! anti-dictionary (stop-word) filtering and candidate-term extraction from
//! result titles.
//!
//! Everything here is a pure function over immutable inputs.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

/// Default number of candidate terms proposed per search.
pub const DEFAULT_CANDIDATE_CAP: usize = 20;

/// Minimum character length of a harvested candidate term.
pub const MIN_CANDIDATE_LEN: usize = 2;

const BUILTIN_EN: &str = include_str!("../data/stopwords/en.txt");
const BUILTIN_FR: &str = include_str!("../data/stopwords/fr.txt");

#[derive(Debug, Error)]
pub enum StopwordError {
    #[error("invalid language code {0:?}: expected two lowercase ASCII letters")]
    InvalidLanguage(String),
    #[error("{language} anti-dictionary line {line}: {word:?} contains whitespace")]
    InvalidWord {
        language: String,
        line: usize,
        word: String,
    },
    #[error("reading anti-dictionary {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Case-folds and trims a term.
pub fn normalize(term: &str) -> String {
    term.trim().to_lowercase()
}

/// Returns true for a two-letter lowercase ASCII language code.
pub fn is_language_code(code: &str) -> bool {
    code.len() == 2 && code.bytes().all(|b| b.is_ascii_lowercase())
}

/// A single word produced by [`segment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

/// Case-folds `text` and splits it on every character that is neither a
/// letter nor a digit. Positions are consecutive from zero.
pub fn segment(text: &str) -> Vec<Token> {
    // Fold before splitting: some capitals lower to a letter plus a
    // combining mark, which must not end up inside a token.
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .enumerate()
        .map(|(position, piece)| Token {
            surface: piece.to_string(),
            position,
        })
        .collect()
}

/// Token surfaces of `text`, in order.
pub fn words(text: &str) -> Vec<String> {
    segment(text).into_iter().map(|t| t.surface).collect()
}

/// Last token of `text`, if any.
pub fn last_word(text: &str) -> Option<String> {
    segment(text).pop().map(|t| t.surface)
}

/// A stop-word list for one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiDictionary {
    language: String,
    words: HashSet<String>,
}

impl AntiDictionary {
    pub fn new<I, S>(language: &str, words: I) -> Result<Self, StopwordError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if !is_language_code(language) {
            return Err(StopwordError::InvalidLanguage(language.to_string()));
        }
        let mut set = HashSet::new();
        for (idx, word) in words.into_iter().enumerate() {
            let word = normalize(word.as_ref());
            if word.is_empty() {
                continue;
            }
            if word.chars().any(char::is_whitespace) {
                return Err(StopwordError::InvalidWord {
                    language: language.to_string(),
                    line: idx + 1,
                    word,
                });
            }
            set.insert(word);
        }
        Ok(Self {
            language: language.to_string(),
            words: set,
        })
    }

    /// Parses the on-disk format: one word per line, `#` comments, trailing
    /// whitespace trimmed.
    pub fn parse(language: &str, source: &str) -> Result<Self, StopwordError> {
        if !is_language_code(language) {
            return Err(StopwordError::InvalidLanguage(language.to_string()));
        }
        let mut set = HashSet::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line.trim_end();
            if line.starts_with('#') {
                continue;
            }
            let word = normalize(line);
            if word.is_empty() {
                continue;
            }
            if word.chars().any(char::is_whitespace) {
                return Err(StopwordError::InvalidWord {
                    language: language.to_string(),
                    line: idx + 1,
                    word,
                });
            }
            set.insert(word);
        }
        Ok(Self {
            language: language.to_string(),
            words: set,
        })
    }

    /// A dictionary with no words at all.
    pub fn empty(language: &str) -> Result<Self, StopwordError> {
        Self::new::<_, &str>(language, [])
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.words.contains(token)
    }
}

/// The anti-dictionaries available to a running system, keyed by language.
#[derive(Debug, Clone)]
pub struct AntiDictionaries {
    by_language: BTreeMap<String, Arc<AntiDictionary>>,
}

impl AntiDictionaries {
    /// The English and French lists shipped with the crate.
    pub fn builtin() -> Self {
        let mut by_language = BTreeMap::new();
        for (lang, src) in [("en", BUILTIN_EN), ("fr", BUILTIN_FR)] {
            let dict = AntiDictionary::parse(lang, src).expect("shipped anti-dictionary is valid");
            by_language.insert(lang.to_string(), Arc::new(dict));
        }
        Self { by_language }
    }

    /// Builtins overlaid with every `<lang>.txt` found in `dir`. A missing
    /// directory is not an error.
    pub fn load(dir: &Path) -> Result<Self, StopwordError> {
        let mut dicts = Self::builtin();
        let entries = match fs::read_dir(dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(dicts),
            Err(source) => {
                return Err(StopwordError::Io {
                    path: dir.display().to_string(),
                    source,
                })
            }
        };
        let mut paths: Vec<_> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths {
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(lang) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            if !is_language_code(lang) {
                continue;
            }
            let src = fs::read_to_string(&path).map_err(|source| StopwordError::Io {
                path: path.display().to_string(),
                source,
            })?;
            dicts.insert(AntiDictionary::parse(lang, &src)?);
        }
        Ok(dicts)
    }

    pub fn insert(&mut self, dict: AntiDictionary) {
        self.by_language
            .insert(dict.language.clone(), Arc::new(dict));
    }

    pub fn get(&self, language: &str) -> Option<Arc<AntiDictionary>> {
        self.by_language.get(language).cloned()
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.by_language.keys().map(String::as_str)
    }
}

impl Default for AntiDictionaries {
    fn default() -> Self {
        Self::builtin()
    }
}

/// True when a token may be proposed as a context term.
pub fn is_candidate_term(token: &str, dictionary: &AntiDictionary) -> bool {
    token.chars().count() >= MIN_CANDIDATE_LEN
        && !token.chars().all(char::is_numeric)
        && !dictionary.is_stopword(token)
}

/// Harvests candidate context terms from result titles in rank order.
///
/// Stop-words, one-character tokens and all-digit tokens are dropped, first
/// occurrences win, and at most `cap` terms are returned.
pub fn extract_candidates<S: AsRef<str>>(
    titles: &[S],
    dictionary: &AntiDictionary,
    cap: usize,
) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for title in titles {
        for token in segment(title.as_ref()) {
            if out.len() == cap {
                return out;
            }
            if is_candidate_term(&token.surface, dictionary) && seen.insert(token.surface.clone()) {
                out.push(token.surface);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> Arc<AntiDictionary> {
        AntiDictionaries::builtin().get("en").unwrap()
    }

    #[test]
    fn segment_splits_and_folds() {
        assert_eq!(
            words("Query Expansion for Document Retrieval"),
            ["query", "expansion", "for", "document", "retrieval"]
        );
        assert!(segment("").is_empty());
        assert_eq!(words("C++/Rust-2024 tips"), ["c", "rust", "2024", "tips"]);
    }

    #[test]
    fn segment_positions_are_consecutive() {
        let tokens = segment("  --a,, b\tc--  ");
        let positions: Vec<_> = tokens.iter().map(|t| t.position).collect();
        assert_eq!(positions, [0, 1, 2]);
    }

    #[test]
    fn segment_handles_non_ascii_letters() {
        assert_eq!(words("Élève À l'École"), ["élève", "à", "l", "école"]);
    }

    #[test]
    fn shipped_english_list() {
        let en = en();
        assert!(en.is_stopword("for"));
        assert!(en.is_stopword("the"));
        assert!(!en.is_stopword("retrieval"));
        assert!(!en.is_stopword("query"));
        assert!(!en.is_stopword(""));
    }

    #[test]
    fn shipped_french_list() {
        let fr = AntiDictionaries::builtin().get("fr").unwrap();
        assert!(fr.is_stopword("les"));
        assert!(fr.is_stopword("été"));
        assert!(!fr.is_stopword("recherche"));
    }

    #[test]
    fn parse_skips_comments_and_rejects_inner_space() {
        let d = AntiDictionary::parse("xx", "# comment\nfoo  \n\nBar\n").unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.is_stopword("bar"));
        assert!(matches!(
            AntiDictionary::parse("xx", "two words\n"),
            Err(StopwordError::InvalidWord { line: 1, .. })
        ));
        assert!(matches!(
            AntiDictionary::parse("EN", ""),
            Err(StopwordError::InvalidLanguage(_))
        ));
    }

    #[test]
    fn load_overlays_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("de.txt"), "der\ndie\ndas\n").unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let dicts = AntiDictionaries::load(dir.path()).unwrap();
        assert!(dicts.get("de").unwrap().is_stopword("die"));
        assert!(dicts.get("en").is_some());
        assert!(dicts.get("zz").is_none());

        let missing = AntiDictionaries::load(&dir.path().join("nope")).unwrap();
        assert_eq!(missing.languages().collect::<Vec<_>>(), ["en", "fr"]);
    }

    #[test]
    fn extract_candidates_examples() {
        let en = en();
        assert_eq!(
            extract_candidates(&["Query expansion for document retrieval"], &en, 20),
            ["query", "expansion", "document", "retrieval"]
        );
        assert!(extract_candidates::<&str>(&[], &en, 20).is_empty());
        let none = AntiDictionary::empty("xx").unwrap();
        assert!(extract_candidates(&["a b c", "b c d"], &none, 3).is_empty());
    }

    #[test]
    fn extract_candidates_dedups_caps_and_drops_digits() {
        let en = en();
        let titles = ["Rust 2024 edition", "Rust async book", "The async book"];
        assert_eq!(
            extract_candidates(&titles, &en, 20),
            ["rust", "edition", "async", "book"]
        );
        assert_eq!(extract_candidates(&titles, &en, 2), ["rust", "edition"]);
        assert!(extract_candidates(&titles, &en, 0).is_empty());
    }
}
