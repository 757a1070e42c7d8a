//! The `presy` command line.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{Config, CONFIG_ENV};
use crate::eval::{self, EvalMode, ScenarioSuite};
use crate::gateway::{self, ComparisonResult, ProviderRegistry, SearchMode, SearchProvider, SearchResponse};
use crate::reformulate;
use crate::service::{self, AppState, ADDR_ENV, CORS_ENV, DEFAULT_ADDR};
use crate::store::{
    ContextStore, Decision, EntryStatus, NewProfile, ProfileId, Sex, StudyLevel, DATA_DIR_ENV,
    DEFAULT_DATA_DIR,
};

const TITLE_WIDTH: usize = 38;

#[derive(Debug, Parser)]
#[command(name = "presy", version, about = "Profile-driven query reformulation")]
pub struct Cli {
    /// Directory holding profiles, history logs and extra stop-word lists.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = DEFAULT_DATA_DIR)]
    pub data_dir: PathBuf,

    /// Engine configuration (defaults to presy.json in the data directory).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Off,
    Auto,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalModes {
    Both,
    Without,
    With,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create or inspect profiles.
    #[command(subcommand)]
    Profile(ProfileCommand),
    /// Rank reformulation terms for a partial query.
    Suggest {
        query: String,
        #[arg(long, env = "PRESY_PROFILE")]
        profile: String,
        #[arg(long, default_value_t = service::DEFAULT_SUGGESTION_LIMIT)]
        limit: usize,
    },
    /// Search with and without reformulation and propose new context terms.
    Search {
        query: String,
        #[arg(long)]
        engine: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Terms for manual mode.
        #[arg(long = "add")]
        add: Vec<String>,
        #[arg(long, env = "PRESY_PROFILE")]
        profile: String,
    },
    /// Accept or reject proposed context terms, one y/n answer per line.
    Enrich {
        #[arg(long, env = "PRESY_PROFILE")]
        profile: String,
        /// Only review proposals under this attribute.
        #[arg(long)]
        attribute: Option<String>,
    },
    /// Evaluation harness.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = ADDR_ENV, default_value = DEFAULT_ADDR)]
        addr: SocketAddr,
        /// Allowed CORS origins, comma separated; `*` allows any.
        #[arg(long, env = CORS_ENV, value_delimiter = ',')]
        cors_origin: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProfileCommand {
    Create {
        /// Profile id; generated when omitted.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        language: String,
        #[arg(long = "domain")]
        domains: Vec<String>,
        #[arg(long, default_value = "")]
        specialty: String,
        #[arg(long, default_value = "")]
        profession: String,
        #[arg(long, default_value_t = 0)]
        age: u32,
        #[arg(long, default_value = "unspecified")]
        sex: Sex,
        #[arg(long, default_value = "unspecified")]
        study_level: StudyLevel,
    },
    Show {
        id: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Score a scenario suite with and without reformulation.
    Run {
        scenarios: PathBuf,
        /// Engine to evaluate; repeat for several.
        #[arg(long = "engine", required = true)]
        engines: Vec<String>,
        #[arg(long, env = "PRESY_PROFILE")]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EvalModes::Both)]
        modes: EvalModes,
    },
}

/// Parses `std::env::args`, runs the command and maps the outcome to the
/// process exit status: 0 on success, 1 on a domain error, 2 on misuse.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdin = io::stdin();
    let stdout = io::stdout();
    match execute(&cli, &mut stdin.lock(), &mut stdout.lock(), &mut io::stderr()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("presy: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn open_store(cli: &Cli) -> Result<Arc<ContextStore>> {
    let store = ContextStore::open(&cli.data_dir)
        .with_context(|| format!("opening data directory {}", cli.data_dir.display()))?;
    Ok(Arc::new(store))
}

fn open_registry(cli: &Cli, store: &ContextStore) -> Result<Arc<ProviderRegistry>> {
    let registry = match Config::locate(cli.config.as_deref(), &cli.data_dir) {
        Some(path) => Config::load(&path)?.build_registry(store.dictionaries())?,
        None => ProviderRegistry::new(),
    };
    Ok(Arc::new(registry))
}

fn parse_profile(raw: &str) -> Result<ProfileId> {
    ProfileId::parse(raw).ok_or_else(|| anyhow!("invalid profile id {raw:?}"))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs a parsed command line against explicit streams.
pub fn execute(
    cli: &Cli,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    match &cli.command {
        Command::Profile(ProfileCommand::Create {
            id,
            language,
            domains,
            specialty,
            profession,
            age,
            sex,
            study_level,
        }) => {
            let store = open_store(cli)?;
            let fields = NewProfile {
                age: *age,
                sex: *sex,
                language: language.clone(),
                domains: domains.clone(),
                specialty: specialty.clone(),
                profession: profession.clone(),
                study_level: *study_level,
            };
            let profile = match id {
                Some(raw) => store.create_profile_with_id(parse_profile(raw)?, fields)?,
                None => store.create_profile(fields)?,
            };
            print_json(out, &profile)
        }
        Command::Profile(ProfileCommand::Show { id }) => {
            let store = open_store(cli)?;
            let id = parse_profile(id)?;
            match cli.format {
                Format::Json => print_json(out, &store.document(&id)?),
                Format::Table => {
                    let profile = store.profile(&id)?;
                    writeln!(out, "profile {}  language {}", profile.id, profile.language)?;
                    writeln!(out, "domains: {}", profile.domains.join(", "))?;
                    writeln!(out, "specialty: {}  profession: {}", profile.specialty, profile.profession)?;
                    for e in store.query_entries(&id, "", &EntryStatus::ALL)? {
                        writeln!(
                            out,
                            "  {:<20} -> {:<20} {:<9} {:?} used {}",
                            e.attribute, e.value, e.status, e.kind, e.use_count
                        )?;
                    }
                    Ok(())
                }
            }
        }
        Command::Suggest {
            query,
            profile,
            limit,
        } => {
            let store = open_store(cli)?;
            let suggestions = reformulate::suggest(&store, &parse_profile(profile)?, query, *limit)?;
            match cli.format {
                Format::Json => print_json(out, &suggestions),
                Format::Table => {
                    for s in &suggestions {
                        writeln!(out, "{:<24} {:>7.3}  {}", s.value, s.score, s.preview)?;
                    }
                    Ok(())
                }
            }
        }
        Command::Search {
            query,
            engine,
            mode,
            add,
            profile,
        } => {
            let mode = match mode {
                ModeArg::Off => SearchMode::Off,
                ModeArg::Auto => SearchMode::Auto,
                ModeArg::Manual => SearchMode::Manual(add.clone()),
            };
            if !add.is_empty() && !matches!(mode, SearchMode::Manual(_)) {
                bail!("--add only applies to --mode manual");
            }
            let store = open_store(cli)?;
            let registry = open_registry(cli, &store)?;
            let result = gateway::dual_search(&store, &registry, &parse_profile(profile)?, query, engine, &mode)?;
            write!(out, "{}", render_comparison(&result, cli.format))?;
            Ok(())
        }
        Command::Enrich { profile, attribute } => {
            let store = open_store(cli)?;
            enrich(&store, &parse_profile(profile)?, attribute.as_deref(), input, out, err)
        }
        Command::Eval(EvalCommand::Run {
            scenarios,
            engines,
            profile,
            out: report_path,
            modes,
        }) => {
            let store = open_store(cli)?;
            let registry = open_registry(cli, &store)?;
            let suite = ScenarioSuite::load(scenarios)?;
            let providers: Vec<Arc<dyn SearchProvider>> = engines
                .iter()
                .map(|e| registry.get(e))
                .collect::<Result<_, _>>()?;
            let modes = match modes {
                EvalModes::Both => vec![EvalMode::Without, EvalMode::With],
                EvalModes::Without => vec![EvalMode::Without],
                EvalModes::With => vec![EvalMode::With],
            };
            let report = eval::run_suite(&store, &providers, &parse_profile(profile)?, &suite, &modes)?;
            if let Some(path) = report_path {
                write_file(path, &report.to_json())?;
                writeln!(err, "report written to {}", path.display())?;
            }
            match cli.format {
                Format::Json if report_path.is_none() => write!(out, "{}", report.to_json())?,
                Format::Json => {}
                Format::Table => write!(out, "{}", report.render_table())?,
            }
            Ok(())
        }
        Command::Serve { addr, cors_origin } => {
            let store = open_store(cli)?;
            let registry = open_registry(cli, &store)?;
            let state = AppState::new(store, registry);
            writeln!(err, "listening on http://{addr}")?;
            tokio::runtime::Runtime::new()?.block_on(service::serve(*addr, state, cors_origin))?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct EnrichOutcome {
    entry_id: String,
    attribute: String,
    value: String,
    status: EntryStatus,
}

/// Walks the profile's pending proposals in the order they were made. `y` validates, `n` rejects, an
/// empty line or `s` skips, `q` stops. Prompts go to `err`; the changed
/// entries are printed to `out` as JSON.
pub fn enrich(
    store: &ContextStore,
    profile: &ProfileId,
    attribute: Option<&str>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let pending: Vec<_> = store
        .entries(profile)?
        .into_iter()
        .filter(|e| e.status == EntryStatus::Proposed)
        .filter(|e| attribute.is_none_or(|a| e.attribute == a))
        .collect();
    let mut changed = Vec::new();
    for entry in pending {
        write!(err, "{} -> {}? [y/n/s/q] ", entry.attribute, entry.value)?;
        err.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(err)?;
            break;
        }
        let decision = match line.trim().to_lowercase().as_str() {
            "y" | "yes" => Decision::Validated,
            "n" | "no" => Decision::Rejected,
            "q" | "quit" => break,
            _ => continue,
        };
        let updated = store.set_entry_status(&entry.id, decision)?;
        changed.push(EnrichOutcome {
            entry_id: updated.id.to_string(),
            attribute: updated.attribute,
            value: updated.value,
            status: updated.status,
        });
    }
    print_json(out, &changed)
}

fn clip(s: &str, width: usize) -> String {
    if s.chars().count() <= width {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(width - 1).collect();
        t.push('…');
        t
    }
}

fn column(response: &SearchResponse) -> Vec<String> {
    if response.results.is_empty() {
        return vec!["(no results)".to_string()];
    }
    response
        .results
        .iter()
        .map(|r| format!("{:>2}. {}", r.rank, clip(&r.title, TITLE_WIDTH)))
        .collect()
}

/// Text for a dual search: the exact API payload as JSON, or a side-by-side
/// table of both result lists with their total estimates and the added terms.
pub fn render_comparison(result: &ComparisonResult, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(result).expect("results serialize");
            s.push('\n');
            s
        }
        Format::Table => {
            let w = TITLE_WIDTH + 4;
            let mut s = String::new();
            let r = &result.reformulation;
            let added = if r.added_terms.is_empty() {
                "(none)".to_string()
            } else {
                r.added_terms.join(", ")
            };
            let _ = writeln!(s, "mode: {:?}  added terms: {added}", r.mode);
            let _ = writeln!(s, "{:<w$} | with reformulation", "without reformulation");
            let _ = writeln!(s, "{:<w$} | {}", result.baseline.query, result.reformulated.query);
            let left_total = format!("total estimate: {}", result.baseline.total_estimate);
            let _ = writeln!(
                s,
                "{left_total:<w$} | total estimate: {}",
                result.reformulated.total_estimate
            );
            let diff = result.reformulated.total_estimate as i128 - result.baseline.total_estimate as i128;
            let _ = writeln!(s, "difference: {diff:+}");
            let _ = writeln!(s, "{}-+-{}", "-".repeat(w), "-".repeat(w));
            let left = column(&result.baseline);
            let right = column(&result.reformulated);
            for i in 0..left.len().max(right.len()) {
                let l = left.get(i).map_or("", String::as_str);
                let r = right.get(i).map_or("", String::as_str);
                let _ = writeln!(s, "{l:<w$} | {r}");
            }
            if !result.proposals.is_empty() {
                let terms: Vec<String> = result
                    .proposals
                    .iter()
                    .map(|p| format!("{} ({})", p.term, p.status))
                    .collect();
                let _ = writeln!(s, "proposals: {}", terms.join(", "));
            }
            s
        }
    }
}
