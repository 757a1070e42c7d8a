//! Create a profile on disk, watch its static context appear, add and judge
//! a few dynamic terms, then reopen the store and read everything back.
//!
//!     cargo run --example context_store

use anyhow::Result;
use presy::store::{ContextStore, Decision, EntryStatus, NewProfile};

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("presy-example-{}", std::process::id()));
    let store = ContextStore::open(&dir)?;

    let profile = store.create_profile(NewProfile {
        age: 34,
        language: "en".into(),
        domains: vec!["health".into(), "sport".into()],
        specialty: "nutrition science".into(),
        profession: "coach".into(),
        ..Default::default()
    })?;
    println!("profile {} in {}", profile.id, dir.display());
    for e in store.entries(&profile.id)? {
        println!("  static  {:<10} -> {}", e.attribute, e.value);
    }

    let proposed = store.propose_dynamic_entries(&profile.id, "diet", &["protein", "vegan", "the", "keto"])?;
    store.set_entry_status(&proposed[0].id, Decision::Validated)?;
    store.set_entry_status(&proposed[1].id, Decision::Rejected)?;
    if let Err(e) = store.set_entry_status(&proposed[1].id, Decision::Validated) {
        println!("refused: {e}");
    }

    let reopened = ContextStore::open(&dir)?;
    for e in reopened.query_entries(&profile.id, "diet", &EntryStatus::ALL)? {
        println!("  dynamic {:<10} -> {:<8} {}", e.attribute, e.value, e.status);
    }
    assert_eq!(reopened.document(&profile.id)?, store.document(&profile.id)?);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
