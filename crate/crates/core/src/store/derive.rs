use std::collections::HashSet;

use crate::clock::Timestamp;
use crate::text::{words, AntiDictionary};

use super::model::{ContextEntry, ContextKind, EntryId, EntryStatus, UserProfile};

/// Attribute → value pairs implied by a profile's identification fields.
///
/// Each domain is paired both ways with every content word of the specialty,
/// and every content word of the profession points at each domain. Pairs
/// whose two sides are equal or whose value is a stop-word are skipped.
pub fn static_pairs(profile: &UserProfile, dictionary: &AntiDictionary) -> Vec<(String, String)> {
    let content = |phrase: &str| -> Vec<String> {
        words(phrase)
            .into_iter()
            .filter(|w| !dictionary.is_stopword(w))
            .collect()
    };
    let specialty = content(&profile.specialty);
    let profession = content(&profile.profession);

    let mut pairs = Vec::new();
    for domain in &profile.domains {
        for term in &specialty {
            pairs.push((domain.clone(), term.clone()));
            pairs.push((term.clone(), domain.clone()));
        }
    }
    for term in &profession {
        for domain in &profile.domains {
            pairs.push((term.clone(), domain.clone()));
        }
    }

    let mut seen = HashSet::new();
    pairs.retain(|(attribute, value)| {
        attribute != value
            && !dictionary.is_stopword(value)
            && seen.insert((attribute.clone(), value.clone()))
    });
    pairs
}

/// Static context entries for a freshly created profile. All are validated.
pub fn derive_static_entries(
    profile: &UserProfile,
    dictionary: &AntiDictionary,
    now: Timestamp,
) -> Vec<ContextEntry> {
    static_pairs(profile, dictionary)
        .into_iter()
        .map(|(attribute, value)| ContextEntry {
            id: EntryId::generate(),
            profile_id: profile.id.clone(),
            kind: ContextKind::Static,
            attribute,
            value,
            status: EntryStatus::Validated,
            use_count: 0,
            created_at: now,
            last_used_at: now,
        })
        .collect()
}
