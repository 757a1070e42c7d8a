//! Acceptance suite: one check per criterion, each printed as a PASS/FAIL
//! line. Exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use presy::clock::ManualClock;
use presy::eval::{self, EvalMode, Judgments, ScenarioSuite, ScoreRow};
use presy::gateway::{CorpusDocument, LocalIndex, LocalProvider, SearchProvider, SearchResult};
use presy::reformulate;
use presy::service::{self, AppState};
use presy::store::{
    ContextEntry, ContextKind, ContextStore, Decision, EntryStatus, HistoryRecord, NewProfile,
    StoreError,
};
use presy::text::{self, AntiDictionaries, AntiDictionary};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn en() -> Arc<AntiDictionary> {
    AntiDictionaries::builtin().get("en").unwrap()
}

// ---------------------------------------------------------------- 1

/// Per-engine criterion means without and with reformulation.
const REFERENCE_MEANS: [(&str, [f64; 3], [f64; 3]); 3] = [
    ("engine_a", [6.62, 5.60, 7.40], [7.69, 6.77, 8.19]),
    ("engine_b", [5.78, 4.92, 7.56], [6.11, 4.18, 8.55]),
    ("engine_c", [3.38, 3.94, 5.54], [4.23, 4.87, 6.22]),
];

/// Fifteen rows that differ from each other but average to `means`.
fn rows_with_means(means: [f64; 3]) -> Vec<ScoreRow> {
    (0..15)
        .map(|i| {
            let offset = (i as f64 - 7.0) * 0.1;
            ScoreRow::new(
                &format!("s{:02}", i + 1),
                means[0] + offset,
                means[1] - offset,
                means[2] + offset / 2.0,
            )
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let expected = [
        ("engine_a", "c1", 1.07),
        ("engine_a", "c2", 1.17),
        ("engine_a", "c3", 0.79),
        ("engine_b", "c3", 0.99),
        ("engine_c", "c3", 0.68),
    ];
    let mut deltas = BTreeMap::new();
    for (engine, without, with) in REFERENCE_MEANS {
        let w = eval::aggregate(rows_with_means(without), engine, EvalMode::Without).map_err(|e| e.to_string())?;
        let r = eval::aggregate(rows_with_means(with), engine, EvalMode::With).map_err(|e| e.to_string())?;
        let d = eval::compare(w, r).map_err(|e| e.to_string())?.deltas.unwrap();
        deltas.insert((engine, "c1"), d.delta_c1);
        deltas.insert((engine, "c2"), d.delta_c2);
        deltas.insert((engine, "c3"), d.delta_c3);
    }
    for (engine, criterion, value) in expected {
        let got = deltas[&(engine, criterion)];
        ensure((got - value).abs() <= 0.005, || {
            format!("{engine} delta_{criterion} = {got:.4}, expected {value}")
        })?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("5 deltas within 0.005 in {elapsed:?}"))
}

// ---------------------------------------------------------------- 2

const HOSTS: [&str; 5] = ["alpha.example", "beta.example", "gamma.example", "Delta.Example", "a.b.example"];
const PATHS: [&str; 4] = ["/", "/a", "/b/c", "/a?x=1"];
const FRAGMENTS: [&str; 3] = ["", "#top", "#x"];

fn random_url(rng: &mut StdRng) -> String {
    format!(
        "{}://{}{}{}{}",
        ["http", "https"].choose(rng).unwrap(),
        if rng.gen_bool(0.3) { "www." } else { "" },
        HOSTS.choose(rng).unwrap(),
        PATHS.choose(rng).unwrap(),
        FRAGMENTS.choose(rng).unwrap(),
    )
}

/// `(scheme, host without www, path)`: what two spellings of a url must
/// share to count as the same judged page.
fn brute_key(url: &str) -> (String, String, String) {
    let (scheme, rest) = url.split_once("://").unwrap();
    let rest = rest.split('#').next().unwrap();
    let (host, path) = rest.split_at(rest.find('/').unwrap_or(rest.len()));
    let host = host.to_lowercase();
    let host = host.strip_prefix("www.").unwrap_or(&host).to_string();
    (scheme.to_lowercase(), host, path.to_string())
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    for case in 0..1000 {
        let n = rng.gen_range(0..=10);
        let results: Vec<SearchResult> = (0..n)
            .map(|i| SearchResult {
                rank: i + 1,
                title: String::new(),
                url: random_url(&mut rng),
                snippet: String::new(),
                engine_id: "e".into(),
            })
            .collect();
        let raw: BTreeMap<String, bool> = (0..rng.gen_range(0..12))
            .map(|_| (random_url(&mut rng), rng.gen_bool(0.6)))
            .collect();

        let relevant = |url: &str| {
            let key = brute_key(url);
            raw.iter().any(|(u, r)| *r && brute_key(u) == key)
        };
        let mut top = 0u32;
        let mut tail = 0u32;
        let mut redundant = 0u32;
        for (i, r) in results.iter().enumerate() {
            if relevant(&r.url) {
                if i < 3 {
                    top += 1;
                } else {
                    tail += 1;
                }
            }
            let site = brute_key(&r.url).1;
            if results[..i]
                .iter()
                .any(|e| e.url == r.url || brute_key(&e.url).1 == site)
            {
                redundant += 1;
            }
        }
        let c1 = 10.0 * top as f64 / 3.0;
        let c2 = 10.0 * tail as f64 / 7.0;
        let c3 = if n == 0 { 10.0 } else { 10.0 * (n as f64 - redundant as f64) / n as f64 };

        let row = eval::score_query("q", &results, &Judgments::new(&raw)).map_err(|e| e.to_string())?;
        for (name, got, want) in [("c1", row.c1, c1), ("c2", row.c2, c2), ("c3", row.c3, c3), ("total", row.total, c1 + c2 + c3)] {
            ensure((got - want).abs() < 1e-9, || format!("case {case}: {name} = {got}, oracle {want}"))?;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 fixtures match the counter in {elapsed:?}"))
}

// ---------------------------------------------------------------- 3

const ATTRIBUTES: [&str; 8] = ["java", "javascript", "jazz", "python", "py", "rust", "ruby", "data"];
const VALUES: [&str; 11] = [
    "programming", "island", "coffee", "the", "music", "snake", "language", "computing", "data",
    "science", "java",
];

fn brute_words(s: &str) -> Vec<String> {
    s.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

struct BruteSuggestion {
    value: String,
    ids: Vec<String>,
    score: f64,
    preview: String,
}

fn brute_suggest(
    entries: &[ContextEntry],
    domains: &[String],
    specialty: &str,
    dict: &AntiDictionary,
    query: &str,
    limit: usize,
    now: chrono::DateTime<Utc>,
) -> Vec<BruteSuggestion> {
    let words = brute_words(query);
    let Some(t) = words.last() else {
        return Vec::new();
    };
    let mut values: Vec<&str> = entries.iter().map(|e| e.value.as_str()).collect();
    values.sort();
    values.dedup();
    let mut out = Vec::new();
    for value in values {
        if words.iter().any(|w| w == value) || dict.is_stopword(value) {
            continue;
        }
        let mut group: Vec<&ContextEntry> = entries
            .iter()
            .filter(|e| e.value == value && e.status == EntryStatus::Validated && e.attribute.starts_with(t.as_str()))
            .collect();
        if group.is_empty() {
            continue;
        }
        group.sort_by(|a, b| a.id.as_str().cmp(b.id.as_str()));
        let mut score = 0.0;
        for e in &group {
            let base = if e.kind == ContextKind::Static { 1.0 } else { 0.5 };
            let age = ((now - e.last_used_at).num_milliseconds() as f64 / 86_400_000.0).max(0.0);
            score += base + (1.0 + e.use_count as f64).ln() + 1.0 / (1.0 + age);
        }
        if domains.iter().any(|d| d == value) || brute_words(specialty).iter().any(|w| w == value) {
            score += 1.0;
        }
        let trimmed = query.trim();
        out.push(BruteSuggestion {
            value: value.to_string(),
            ids: group.iter().map(|e| e.id.to_string()).collect(),
            score,
            preview: if trimmed.is_empty() { value.to_string() } else { format!("{trimmed} {value}") },
        });
    }
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.value.cmp(&b.value)));
    out.truncate(limit);
    out
}

fn random_query(rng: &mut StdRng) -> String {
    let mut parts: Vec<String> = (0..rng.gen_range(0..3))
        .map(|_| VALUES.choose(rng).unwrap().to_string())
        .collect();
    let attr = ATTRIBUTES.choose(rng).unwrap();
    let cut = rng.gen_range(0..=attr.len());
    let mut last = attr[..cut].to_string();
    if rng.gen_bool(0.2) {
        last = last.to_uppercase();
    }
    parts.push(last);
    let sep = if rng.gen_bool(0.2) { " , " } else { " " };
    parts.join(sep)
}

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let dict = en();
    let t0 = Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap();
    let mut compared = 0usize;
    for case in 0..200 {
        let clock = Arc::new(ManualClock::new(t0));
        let store = ContextStore::in_memory(AntiDictionaries::builtin()).with_clock(clock.clone());
        let domains: Vec<String> = ["computing", "music", "data"]
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|s| s.to_string())
            .collect();
        let specialty = ["data science", "software", "jazz music", ""].choose(&mut rng).unwrap().to_string();
        let profile = store
            .create_profile(NewProfile {
                language: "en".into(),
                domains: domains.clone(),
                specialty: specialty.clone(),
                profession: ["developer", "teacher", ""].choose(&mut rng).unwrap().to_string(),
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
        let pid = profile.id.clone();
        let budget = rng.gen_range(0..=50usize);
        while store.entries(&pid).unwrap().len() < budget {
            let attr = ATTRIBUTES.choose(&mut rng).unwrap();
            let vals: Vec<&str> = (0..rng.gen_range(1..4)).map(|_| *VALUES.choose(&mut rng).unwrap()).collect();
            let room = budget - store.entries(&pid).unwrap().len();
            let vals = &vals[..vals.len().min(room)];
            let before = store.entries(&pid).unwrap().len();
            for e in store.propose_dynamic_entries(&pid, attr, vals).unwrap() {
                if e.status == EntryStatus::Proposed && rng.gen_bool(0.7) {
                    let d = if rng.gen_bool(0.8) { Decision::Validated } else { Decision::Rejected };
                    store.set_entry_status(&e.id, d).unwrap();
                }
            }
            if store.entries(&pid).unwrap().len() == before && rng.gen_bool(0.3) {
                break;
            }
        }
        let entries = store.entries(&pid).unwrap();
        for _ in 0..rng.gen_range(0..10) {
            let picked: Vec<_> = entries
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .map(|e| e.id.clone())
                .collect();
            let at = t0 + chrono::Duration::seconds(rng.gen_range(-86_400 * 3..86_400 * 40));
            store.record_use(&pid, &picked, at).unwrap();
        }
        clock.set(t0 + chrono::Duration::seconds(rng.gen_range(0..86_400 * 30)));

        let entries = store.entries(&pid).unwrap();
        ensure(entries.len() <= 50, || format!("case {case}: {} entries", entries.len()))?;
        for _ in 0..5 {
            let query = random_query(&mut rng);
            let limit = rng.gen_range(1..8);
            let got = reformulate::suggest(&store, &pid, &query, limit).map_err(|e| e.to_string())?;
            let want = brute_suggest(&entries, &domains, &specialty, &dict, &query, limit, store.now());
            ensure(got.len() == want.len(), || {
                format!("case {case} {query:?}: {} suggestions, oracle {}", got.len(), want.len())
            })?;
            for (g, w) in got.iter().zip(&want) {
                let ids: Vec<String> = g.source_entry_ids.iter().map(|i| i.to_string()).collect();
                ensure(
                    g.value == w.value && ids == w.ids && (g.score - w.score).abs() < 1e-9 && g.preview == w.preview,
                    || format!("case {case} {query:?}: got {} {:.6}, oracle {} {:.6}", g.value, g.score, w.value, w.score),
                )?;
            }
            compared += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("200 stores, {compared} queries match the scan in {elapsed:?}"))
}

// ---------------------------------------------------------------- 4

const CORPUS_WORDS: [&str; 14] = [
    "java", "island", "coffee", "programming", "the", "of", "rust", "search", "engine", "query",
    "2010", "a", "Data", "web",
];

fn random_text(rng: &mut StdRng, max: usize) -> String {
    (0..rng.gen_range(0..=max))
        .map(|_| *CORPUS_WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(if rng.gen_bool(0.5) { " " } else { "-" })
}

fn brute_rank(docs: &[CorpusDocument], dict: &AntiDictionary, query: &str) -> Vec<(String, f64)> {
    let tokenized: Vec<Vec<String>> = docs
        .iter()
        .map(|d| {
            let mut w = brute_words(&d.title);
            w.extend(brute_words(&d.body));
            w
        })
        .collect();
    let mut terms: Vec<String> = Vec::new();
    for t in brute_words(query) {
        if !dict.is_stopword(&t) && !terms.contains(&t) {
            terms.push(t);
        }
    }
    let n = docs.len() as f64;
    let mut out: Vec<(String, f64)> = Vec::new();
    for (doc, words) in docs.iter().zip(&tokenized) {
        let mut score = 0.0;
        for t in &terms {
            let df = tokenized.iter().filter(|ws| ws.contains(t)).count();
            if df == 0 {
                continue;
            }
            let tf = words.iter().filter(|w| *w == t).count();
            if tf > 0 {
                score += tf as f64 * (1.0 + n / df as f64).ln();
            }
        }
        if score > 0.0 {
            out.push((doc.url.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn random_corpus(rng: &mut StdRng) -> Vec<CorpusDocument> {
    let n = rng.gen_range(0..=100);
    let mut docs: Vec<CorpusDocument> = (0..n)
        .map(|i| CorpusDocument {
            url: format!("http://site{}.example/{i}", rng.gen_range(0..20)),
            title: random_text(rng, 6),
            body: random_text(rng, 20),
        })
        .collect();
    docs.shuffle(rng);
    docs
}

fn local_run(seed: u64) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let dict = en();
    let mut transcript = String::new();
    for case in 0..50 {
        let docs = random_corpus(&mut rng);
        let provider = LocalProvider::new(
            "local",
            LocalIndex::build(docs.clone()).map_err(|e| e.to_string())?,
            dict.clone(),
        );
        for _ in 0..10 {
            let query = random_text(&mut rng, 4);
            let limit = rng.gen_range(1..=15);
            let got = provider.search(&query, limit).map_err(|e| e.to_string())?;
            let want = brute_rank(&docs, &dict, &query);
            ensure(got.total_estimate == want.len() as u64, || {
                format!("case {case} {query:?}: total {} vs oracle {}", got.total_estimate, want.len())
            })?;
            let full = provider.index().rank(&query, &dict);
            ensure(full.len() == want.len(), || format!("case {case} {query:?}: ranking length differs"))?;
            for ((doc, score), (url, w)) in full.iter().zip(&want) {
                ensure(doc.url == *url && (score - w).abs() < 1e-9, || {
                    format!("case {case} {query:?}: {} {score} vs oracle {url} {w}", doc.url)
                })?;
            }
            let urls: Vec<&str> = got.results.iter().map(|r| r.url.as_str()).collect();
            let expected: Vec<&str> = want.iter().take(limit).map(|(u, _)| u.as_str()).collect();
            ensure(urls == expected, || format!("case {case} {query:?}: truncated list differs"))?;
            transcript.push_str(&serde_json::to_string(&got).unwrap());
            transcript.push('\n');
        }
    }
    Ok(transcript)
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let first = local_run(4)?;
    let second = local_run(4)?;
    ensure(first == second, || "two runs differ".into())?;
    Ok(format!(
        "50 corpora x 10 queries match brute tf-idf, runs byte-identical ({} bytes) in {:?}",
        first.len(),
        started.elapsed()
    ))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let dir = common::fixtures_dir();
    let golden = std::fs::read_to_string(dir.join("expected_report.json")).map_err(|e| e.to_string())?;
    let (store, pid) = common::fixture_store();
    let registry = common::fixture_registry(&store);
    let suite = ScenarioSuite::load(&dir.join("scenarios.json")).map_err(|e| e.to_string())?;
    let providers = vec![registry.get("local").map_err(|e| e.to_string())?];
    let modes = [EvalMode::Without, EvalMode::With];
    let report = eval::run_suite(&store, &providers, &pid, &suite, &modes).map_err(|e| e.to_string())?;
    let delta = report.engines[0].deltas.as_ref().unwrap().delta_note;
    ensure(delta > 0.0, || format!("delta_note = {delta}"))?;
    ensure(report.to_json() == golden, || "library report differs from the golden file".into())?;

    let data = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cli_report = cli_golden_run(data.path())?;
    ensure(cli_report == golden, || "CLI report differs from the golden file".into())?;
    Ok(format!("delta_note = {delta:+.4}; library and CLI reports byte-equal to the golden file"))
}

/// Builds the fixture profile through the CLI alone and runs the suite.
fn cli_golden_run(data: &std::path::Path) -> Result<String, String> {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let dir = common::fixtures_dir();
    let config = dir.join("presy.json");
    let presy = |args: &[&str], stdin: &str| -> Result<String, String> {
        let mut child = Command::new(env!("CARGO_BIN_EXE_presy"))
            .arg("--data-dir")
            .arg(data)
            .arg("--config")
            .arg(&config)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| e.to_string())?;
        child.stdin.take().unwrap().write_all(stdin.as_bytes()).map_err(|e| e.to_string())?;
        let out = child.wait_with_output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("presy {args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(String::from_utf8(out.stdout).unwrap())
    };
    presy(
        &["profile", "create", "--id", "p1", "--language", "en", "--domain", "computing",
          "--specialty", "software", "--profession", "developer", "--age", "30"],
        "",
    )?;
    presy(&["search", "java", "--engine", "local", "--mode", "off", "--profile", "p1"], "")?;
    let doc: serde_json::Value = serde_json::from_str(&presy(&["profile", "show", "p1"], "")?).unwrap();
    let answers: String = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["status"] == "proposed" && e["attribute"] == "java")
        .map(|e| if e["value"] == "programming" { "y\n" } else { "\n" })
        .collect();
    let changed = presy(&["enrich", "--profile", "p1", "--attribute", "java"], &answers)?;
    ensure(changed.contains("\"programming\""), || format!("enrich changed {changed}"))?;
    let out = data.join("report.json");
    presy(
        &["eval", "run", dir.join("scenarios.json").to_str().unwrap(), "--engine", "local",
          "--profile", "p1", "--out", out.to_str().unwrap()],
        "",
    )?;
    std::fs::read_to_string(out).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- 6

fn title_strategy() -> impl Strategy<Value = Vec<String>> {
    let word = prop_oneof![
        proptest::sample::select(vec![
            "the", "The", "of", "a", "java", "Java", "x", "42", "2010", "c3po", "über", "ÉCOLE",
            "programming", "is", "and", "İstanbul", "٣٤", "v2", "ok",
        ])
        .prop_map(str::to_string),
        "[a-zA-Z0-9éß]{0,6}",
    ];
    let sep = proptest::sample::select(vec![" ", "-", ", ", "/", "  ", ".", "'"]);
    let title = proptest::collection::vec((word, sep), 0..12)
        .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect::<String>());
    proptest::collection::vec(title, 0..10)
}

fn criterion_6() -> Outcome {
    let started = Instant::now();
    let dict = en();
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 10_000,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    runner
        .run(&(title_strategy(), 0usize..25), |(titles, cap)| {
            let out = text::extract_candidates(&titles, &dict, cap);
            prop_assert!(out.len() <= cap);
            let mut seen = HashSet::new();
            let all: Vec<String> = titles.iter().flat_map(|t| text::words(t)).collect();
            for term in &out {
                prop_assert!(seen.insert(term.clone()), "duplicate {}", term);
                prop_assert!(!dict.is_stopword(term), "stop-word {}", term);
                prop_assert!(term.chars().count() >= 2, "short {}", term);
                prop_assert!(!term.chars().all(char::is_numeric), "digits {}", term);
                prop_assert!(all.contains(term), "not from titles {}", term);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("10000 cases in {elapsed:?}"))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let mut transitions = 0usize;
    for case in 0..40 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let store = ContextStore::open(dir.path()).map_err(|e| e.to_string())?;
        let pid = store
            .create_profile(NewProfile {
                language: "en".into(),
                domains: vec!["computing".into()],
                specialty: "data science".into(),
                ..Default::default()
            })
            .map_err(|e| e.to_string())?
            .id;
        let mut model: BTreeMap<String, EntryStatus> = store
            .entries(&pid)
            .unwrap()
            .into_iter()
            .map(|e| (e.id.to_string(), e.status))
            .collect();
        for step in 0..60 {
            match rng.gen_range(0..4) {
                0 => {
                    let attr = ATTRIBUTES.choose(&mut rng).unwrap();
                    let vals: Vec<&str> = (0..rng.gen_range(0..4)).map(|_| *VALUES.choose(&mut rng).unwrap()).collect();
                    for e in store.propose_dynamic_entries(&pid, attr, &vals).unwrap() {
                        model.entry(e.id.to_string()).or_insert(e.status);
                    }
                }
                1 | 2 => {
                    let entries = store.entries(&pid).unwrap();
                    let Some(e) = entries.choose(&mut rng) else { continue };
                    let decision = if rng.gen_bool(0.5) { Decision::Validated } else { Decision::Rejected };
                    let target = EntryStatus::from(decision);
                    let before = model[e.id.as_str()];
                    let legal = before == EntryStatus::Proposed || before == target;
                    match store.set_entry_status(&e.id, decision) {
                        Ok(updated) => {
                            ensure(legal && updated.status == target, || {
                                format!("case {case} step {step}: {before} -> {target} was accepted")
                            })?;
                            model.insert(e.id.to_string(), target);
                        }
                        Err(StoreError::IllegalTransition { .. }) => {
                            ensure(!legal, || format!("case {case} step {step}: legal {before} -> {target} refused"))?;
                        }
                        Err(other) => return Err(other.to_string()),
                    }
                }
                _ => {
                    let n = rng.gen_range(0..=12);
                    let record = HistoryRecord {
                        profile_id: pid.clone(),
                        timestamp: store.now(),
                        raw_query: random_query(&mut rng),
                        reformulated_query: None,
                        engine_id: "local".into(),
                        result_titles: (0..n).map(|i| format!("t{i}")).collect(),
                        result_urls: (0..n).map(|i| format!("http://x/{i}")).collect(),
                        total_estimate_baseline: n as u64,
                        total_estimate_reformulated: n as u64,
                    };
                    let res = store.append_history(record);
                    ensure(res.is_ok() == (n <= 10), || format!("case {case}: history of {n} results"))?;
                }
            }
            let entries = store.entries(&pid).unwrap();
            let mut pairs = HashSet::new();
            for e in &entries {
                ensure(pairs.insert((e.attribute.clone(), e.value.clone())), || {
                    format!("case {case}: duplicate pair {} -> {}", e.attribute, e.value)
                })?;
                ensure(model[e.id.as_str()] == e.status, || format!("case {case}: status drift on {}", e.id))?;
            }
        }
        let log = store.transitions(&pid).unwrap();
        transitions += log.len();
        for t in &log {
            ensure(
                !matches!(
                    (t.from, t.to),
                    (Some(EntryStatus::Validated), EntryStatus::Rejected)
                        | (Some(EntryStatus::Rejected), EntryStatus::Validated)
                ),
                || format!("case {case}: logged {:?} -> {}", t.from, t.to),
            )?;
        }

        let document = store.document(&pid).unwrap();
        let history = store.history(&pid).unwrap();
        let reopened = ContextStore::open(dir.path()).map_err(|e| e.to_string())?;
        ensure(reopened.document(&pid).unwrap() == document, || format!("case {case}: document changed on reopen"))?;
        ensure(reopened.history(&pid).unwrap() == history, || format!("case {case}: history changed on reopen"))?;
        let json = serde_json::to_string(&document).unwrap();
        let back: presy::store::ProfileDocument = serde_json::from_str(&json).unwrap();
        ensure(back == document, || format!("case {case}: serde round trip"))?;
        ensure(serde_json::to_string(&back).unwrap() == json, || format!("case {case}: serde bytes"))?;
    }
    Ok(format!("40 stores x 60 random steps, {transitions} logged transitions, reopen identity in {:?}", started.elapsed()))
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let (store, pid) = common::fixture_store();
    let registry = common::fixture_registry(&store);
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let listener = rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .map_err(|e| e.to_string())?;
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move {
        axum::serve(listener, service::router(AppState::new(store, registry)))
            .await
            .unwrap();
    });

    let agent = ureq::Agent::new_with_defaults();
    let url = format!("http://{addr}/profiles/{pid}/suggest?q=java");
    let body = agent
        .get(&url)
        .call()
        .map_err(|e| e.to_string())?
        .body_mut()
        .read_to_string()
        .map_err(|e| e.to_string())?;
    let first: serde_json::Value = serde_json::from_str(&body).map_err(|e| e.to_string())?;
    let values: Vec<&str> = first.as_array().unwrap().iter().map(|s| s["value"].as_str().unwrap()).collect();
    ensure(values == ["programming"], || format!("suggestions {values:?}"))?;

    let mut samples = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let started = Instant::now();
        let mut response = agent.get(&url).call().map_err(|e| e.to_string())?;
        response.body_mut().read_to_string().map_err(|e| e.to_string())?;
        samples.push(started.elapsed());
    }
    samples.sort();
    let p50 = samples[499];
    let p99 = samples[989];
    ensure(p50 < Duration::from_millis(20) && p99 < Duration::from_millis(100), || {
        format!("p50 {p50:?}, p99 {p99:?}")
    })?;
    Ok(format!("1000 sequential requests: p50 {p50:?}, p99 {p99:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("reference delta arithmetic", criterion_1),
        ("scoring oracle", criterion_2),
        ("suggestion oracle", criterion_3),
        ("local provider oracle and determinism", criterion_4),
        ("end-to-end fixture improvement", criterion_5),
        ("pipeline invariants", criterion_6),
        ("lifecycle invariants", criterion_7),
        ("suggest latency", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({why})", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: 8/8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
