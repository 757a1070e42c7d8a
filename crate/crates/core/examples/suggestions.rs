//! Rank reformulation terms while a query is typed, then let the top ones
//! expand it.
//!
//!     cargo run --example suggestions

use anyhow::Result;
use presy::reformulate;
use presy::store::{ContextStore, Decision, NewProfile};
use presy::text::AntiDictionaries;

fn main() -> Result<()> {
    let store = ContextStore::in_memory(AntiDictionaries::builtin());
    let p = store.create_profile(NewProfile {
        language: "en".into(),
        domains: vec!["computing".into()],
        specialty: "software engineering".into(),
        ..Default::default()
    })?;
    for (attribute, value) in [("java", "programming"), ("java", "software"), ("javascript", "browser")] {
        let e = store.propose_dynamic_entries(&p.id, attribute, &[value])?;
        store.set_entry_status(&e[0].id, Decision::Validated)?;
    }

    for typed in ["j", "ja", "jav", "java", "learn java"] {
        let list = reformulate::suggest(&store, &p.id, typed, 5)?;
        let shown: Vec<String> = list.iter().map(|s| format!("{} ({:.2})", s.value, s.score)).collect();
        println!("{typed:<12} {}", shown.join("  "));
    }

    let auto = reformulate::auto_reformulate(&store, &p.id, "learn java")?;
    println!("auto:   {:?} -> {:?}", auto.original, auto.expanded);
    let manual = reformulate::expand("learn java", &["tutorial", "java", "online course"]);
    println!("manual: {:?} adds {:?}", manual.expanded, manual.added_terms);
    Ok(())
}
