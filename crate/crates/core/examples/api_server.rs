//! Start the JSON API on a free port and drive it the way the web client
//! does: create a profile, search, validate a proposal, ask for suggestions.
//!
//!     cargo run --example api_server

use std::path::Path;
use std::sync::Arc;

use anyhow::Result;
use presy::config::Config;
use presy::service::{self, AppState};
use presy::store::ContextStore;
use presy::text::AntiDictionaries;
use serde_json::{json, Value};

fn call(agent: &ureq::Agent, method: &str, url: &str, body: Option<Value>) -> Result<Value> {
    let mut response = match (method, body) {
        ("GET", _) => agent.get(url).call()?,
        (_, body) => agent
            .post(url)
            .header("Idempotency-Key", "example-1")
            .send(body.unwrap_or(Value::Null).to_string())?,
    };
    Ok(serde_json::from_str(&response.body_mut().read_to_string()?)?)
}

fn main() -> Result<()> {
    let store = Arc::new(ContextStore::in_memory(AntiDictionaries::builtin()));
    let config = Config::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/presy.json"))?;
    let registry = Arc::new(config.build_registry(store.dictionaries())?);

    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let base = format!("http://{}", listener.local_addr()?);
    rt.spawn(async move { axum::serve(listener, service::router(AppState::new(store, registry))).await });

    let agent = ureq::Agent::new_with_defaults();
    println!("engines: {}", call(&agent, "GET", &format!("{base}/engines"), None)?);
    let profile = call(&agent, "POST", &format!("{base}/profiles"), Some(json!({"language": "en", "domains": ["computing"]})))?;
    let id = profile["id"].as_str().unwrap_or_default().to_string();

    let result = call(
        &agent,
        "POST",
        &format!("{base}/profiles/{id}/search"),
        Some(json!({"query": "java", "engine": "local", "mode": "auto"})),
    )?;
    let pick = result["proposals"]
        .as_array()
        .and_then(|ps| ps.iter().find(|p| p["term"] == "programming"))
        .cloned()
        .unwrap_or_default();
    let verdicts = call(
        &agent,
        "POST",
        &format!("{base}/profiles/{id}/context/validate"),
        Some(json!([{"entry_id": pick["entry_id"], "decision": "validated"}])),
    )?;
    println!("validated: {verdicts}");
    println!("suggest(java): {}", call(&agent, "GET", &format!("{base}/profiles/{id}/suggest?q=java"), None)?);
    Ok(())
}
