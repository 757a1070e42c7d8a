//! Score the fixture scenario suite with and without reformulation.
//!
//!     cargo run --example evaluation -- [--json]

use std::path::Path;

use anyhow::Result;
use presy::config::Config;
use presy::eval::{run_suite, EvalMode, ScenarioSuite};
use presy::store::{ContextStore, Decision, NewProfile, ProfileId};
use presy::text::AntiDictionaries;

fn main() -> Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let store = ContextStore::in_memory(AntiDictionaries::builtin());
    let id = ProfileId::parse("p1").expect("valid id");
    store.create_profile_with_id(
        id.clone(),
        NewProfile {
            language: "en".into(),
            domains: vec!["computing".into()],
            specialty: "software".into(),
            profession: "developer".into(),
            ..Default::default()
        },
    )?;
    let e = store.propose_dynamic_entries(&id, "java", &["programming"])?;
    store.set_entry_status(&e[0].id, Decision::Validated)?;

    let registry = Config::load(&fixtures.join("presy.json"))?.build_registry(store.dictionaries())?;
    let suite = ScenarioSuite::load(&fixtures.join("scenarios.json"))?;
    let report = run_suite(&store, &[registry.get("local")?], &id, &suite, &[EvalMode::Without, EvalMode::With])?;

    if std::env::args().any(|a| a == "--json") {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.render_table());
        let with = report.engines[0].with.as_ref().expect("both modes ran");
        for row in &with.rows {
            println!("{}  c1 {:5.2}  c2 {:5.2}  c3 {:5.2}", row.scenario_id, row.c1, row.c2, row.c3);
        }
    }
    Ok(())
}
