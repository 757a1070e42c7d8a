//! The full loop: search with and without the profile's context, harvest
//! new terms from the titles, validate one, and search again.
//!
//!     cargo run --example dual_search

use std::path::Path;

use anyhow::Result;
use presy::config::Config;
use presy::gateway::{dual_search, SearchMode};
use presy::store::{ContextStore, Decision, NewProfile};
use presy::text::AntiDictionaries;

fn main() -> Result<()> {
    let store = ContextStore::in_memory(AntiDictionaries::builtin());
    let config = Config::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/presy.json"))?;
    let engines = config.build_registry(store.dictionaries())?;
    let p = store.create_profile(NewProfile {
        language: "en".into(),
        domains: vec!["computing".into()],
        ..Default::default()
    })?;

    let first = dual_search(&store, &engines, &p.id, "java", "local", &SearchMode::Auto)?;
    println!("mode {:?}, {} results", first.reformulation.mode, first.baseline.total_estimate);
    let terms: Vec<&str> = first.proposals.iter().map(|x| x.term.as_str()).collect();
    println!("proposed under \"java\": {}", terms.join(", "));

    let programming = first
        .proposals
        .iter()
        .find(|x| x.term == "programming")
        .expect("a java title mentions programming");
    store.set_entry_status(&programming.entry_id, Decision::Validated)?;

    let second = dual_search(&store, &engines, &p.id, "java", "local", &SearchMode::Auto)?;
    println!(
        "{:?} -> {:?}: {} vs {} results",
        second.baseline.query, second.reformulated.query, second.baseline.total_estimate, second.reformulated.total_estimate
    );
    for (a, b) in second.baseline.results.iter().zip(&second.reformulated.results).take(3) {
        println!("  {:<28} | {}", a.title, b.title);
    }
    println!("history: {} sessions", store.history(&p.id)?.len());
    Ok(())
}
