use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ProviderKind, SearchError, SearchProvider, SearchResponse, SearchResult};
use crate::text::{self, AntiDictionary};

const SNIPPET_CHARS: usize = 160;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub url: String,
    pub title: String,
    #[serde(default)]
    pub body: String,
}

/// Reads a corpus file: a JSON array of `{url, title, body}`.
pub fn load_corpus(path: &Path) -> Result<Vec<CorpusDocument>, SearchError> {
    let raw = fs::read_to_string(path).map_err(|e| SearchError::Corpus {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&raw).map_err(|e| SearchError::Corpus {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy)]
struct Posting {
    doc: usize,
    tf: u32,
}

/// Inverted index over the title and body words of a corpus. Immutable once
/// built.
#[derive(Debug, Clone)]
pub struct LocalIndex {
    docs: Vec<CorpusDocument>,
    postings: HashMap<String, Vec<Posting>>,
}

impl LocalIndex {
    pub fn build(docs: Vec<CorpusDocument>) -> Result<Self, SearchError> {
        let mut urls = HashSet::new();
        for doc in &docs {
            if !urls.insert(doc.url.as_str()) {
                return Err(SearchError::DuplicateUrl(doc.url.clone()));
            }
        }
        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        for (idx, doc) in docs.iter().enumerate() {
            let mut tf: HashMap<String, u32> = HashMap::new();
            for word in text::words(&doc.title).into_iter().chain(text::words(&doc.body)) {
                *tf.entry(word).or_default() += 1;
            }
            for (term, tf) in tf {
                postings.entry(term).or_default().push(Posting { doc: idx, tf });
            }
        }
        Ok(Self { docs, postings })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[CorpusDocument] {
        &self.docs
    }

    /// Number of documents containing `term`.
    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Occurrences of `term` in the document with `url`.
    pub fn tf(&self, term: &str, url: &str) -> u32 {
        self.postings
            .get(term)
            .and_then(|ps| ps.iter().find(|p| self.docs[p.doc].url == url))
            .map_or(0, |p| p.tf)
    }

    /// Scores every document against the distinct non-stop-words of `query`
    /// with `tf × ln(1 + N / df)` and returns the matches best first, ties
    /// broken by url.
    pub fn rank(&self, query: &str, dictionary: &AntiDictionary) -> Vec<(&CorpusDocument, f64)> {
        let n = self.docs.len() as f64;
        let mut seen = HashSet::new();
        let mut scores = vec![0.0f64; self.docs.len()];
        for term in text::words(query) {
            if dictionary.is_stopword(&term) || !seen.insert(term.clone()) {
                continue;
            }
            let Some(postings) = self.postings.get(&term) else {
                continue;
            };
            let idf = (1.0 + n / postings.len() as f64).ln();
            for p in postings {
                scores[p.doc] += p.tf as f64 * idf;
            }
        }
        let mut hits: Vec<(&CorpusDocument, f64)> = self
            .docs
            .iter()
            .zip(scores)
            .filter(|(_, s)| *s > 0.0)
            .collect();
        hits.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.0.url.cmp(&b.0.url))
        });
        hits
    }
}

fn snippet(body: &str) -> String {
    let mut out: String = body.chars().take(SNIPPET_CHARS).collect();
    if body.chars().nth(SNIPPET_CHARS).is_some() {
        out.push('…');
    }
    out
}

/// Deterministic offline search over a [`LocalIndex`].
#[derive(Debug, Clone)]
pub struct LocalProvider {
    id: String,
    index: Arc<LocalIndex>,
    dictionary: Arc<AntiDictionary>,
}

impl LocalProvider {
    pub fn new(id: &str, index: LocalIndex, dictionary: Arc<AntiDictionary>) -> Self {
        Self {
            id: id.to_string(),
            index: Arc::new(index),
            dictionary,
        }
    }

    pub fn index(&self) -> &LocalIndex {
        &self.index
    }
}

impl SearchProvider for LocalProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Local
    }

    fn search(&self, query: &str, limit: usize) -> Result<SearchResponse, SearchError> {
        let hits = self.index.rank(query, &self.dictionary);
        let total_estimate = hits.len() as u64;
        let results = hits
            .into_iter()
            .take(limit)
            .enumerate()
            .map(|(i, (doc, _))| SearchResult {
                rank: i + 1,
                title: doc.title.clone(),
                url: doc.url.clone(),
                snippet: snippet(&doc.body),
                engine_id: self.id.clone(),
            })
            .collect();
        Ok(SearchResponse {
            query: query.to_string(),
            results,
            total_estimate,
        })
    }
}
