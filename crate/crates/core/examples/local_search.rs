//! Index the fixture corpus and run tf-idf searches over it.
//!
//!     cargo run --example local_search -- "java programming"

use std::path::Path;

use anyhow::Result;
use presy::gateway::{load_corpus, LocalIndex, LocalProvider, SearchProvider};
use presy::text::AntiDictionaries;

fn main() -> Result<()> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "java".into());
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.json");
    let index = LocalIndex::build(load_corpus(&corpus)?)?;
    println!("{} documents, df(java) = {}", index.len(), index.df("java"));

    let en = AntiDictionaries::builtin().get("en").expect("built in");
    let provider = LocalProvider::new("local", index, en);
    let response = provider.search(&query, 10)?;
    println!("{:?}: about {} matches", response.query, response.total_estimate);
    for r in &response.results {
        println!("{:>2}. {:<36} {}", r.rank, r.title, r.url);
    }
    Ok(())
}
