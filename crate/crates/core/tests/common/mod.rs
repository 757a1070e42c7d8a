#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use presy::config::Config;
use presy::gateway::ProviderRegistry;
use presy::store::{ContextStore, Decision, NewProfile, ProfileId};
use presy::text::AntiDictionaries;

pub const FIXTURE_PROFILE: &str = "p1";

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_fields() -> NewProfile {
    NewProfile {
        age: 30,
        language: "en".into(),
        domains: vec!["computing".into()],
        specialty: "software".into(),
        profession: "developer".into(),
        ..Default::default()
    }
}

/// Adds profile `p1` with the validated pair java → programming.
pub fn seed_fixture_profile(store: &ContextStore) -> ProfileId {
    let id = ProfileId::parse(FIXTURE_PROFILE).unwrap();
    store.create_profile_with_id(id.clone(), fixture_fields()).unwrap();
    let proposed = store
        .propose_dynamic_entries(&id, "java", &["programming"])
        .unwrap();
    store
        .set_entry_status(&proposed[0].id, Decision::Validated)
        .unwrap();
    id
}

pub fn fixture_store() -> (Arc<ContextStore>, ProfileId) {
    let store = ContextStore::in_memory(AntiDictionaries::builtin());
    let id = seed_fixture_profile(&store);
    (Arc::new(store), id)
}

pub fn fixture_registry(store: &ContextStore) -> Arc<ProviderRegistry> {
    let config = Config::load(&fixtures_dir().join("presy.json")).unwrap();
    Arc::new(config.build_registry(store.dictionaries()).unwrap())
}
