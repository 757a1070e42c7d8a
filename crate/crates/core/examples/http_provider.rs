//! Map a remote engine's JSON onto search results. A throwaway server on a
//! local port stands in for the remote engine.
//!
//!     cargo run --example http_provider

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use anyhow::Result;
use presy::gateway::{HttpProvider, ResponseMapping, SearchProvider};

fn fake_engine() -> Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(&stream);
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|n| n > 2) {
                line.clear();
            }
            let body = r#"{"data":{"hits":[
                {"name":"Java programming guide","link":"http://docs.example/java","abstract":"..."},
                {"name":"Java island travel","link":"http://travel.example/java"}],
                "count":"12,400"}}"#;
            let _ = write!(
                &stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    Ok(format!("http://{addr}"))
}

fn main() -> Result<()> {
    let base = fake_engine()?;
    let mapping = ResponseMapping {
        results: "data.hits".into(),
        title: "name".into(),
        url: "link".into(),
        snippet: "abstract".into(),
        total: Some("data.count".into()),
    };
    let provider = HttpProvider::new(
        "web",
        &format!("{base}/search?q={{query}}&count={{limit}}"),
        mapping,
        Duration::from_secs(2),
    )?;
    println!("GET {}", provider.request_url("java programming", 10));
    let response = provider.search("java programming", 10)?;
    println!("total estimate {}", response.total_estimate);
    for r in response.results {
        println!("{}. {} <{}>", r.rank, r.title, r.url);
    }

    let dead = HttpProvider::new("dead", "http://127.0.0.1:9/?q={query}", ResponseMapping::default(), Duration::from_millis(300))?;
    println!("unreachable engine: {}", dead.search("java", 10).unwrap_err());
    Ok(())
}
