use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nlds_core::graph::generate_synthetic;
use nlds_core::nl::{read_synonyms, Synonym};
use nlds_service::{read_log, replay, router, Dataset, ExecutionResult, Service, Session};

#[derive(Parser)]
#[command(
    name = "nlds",
    version,
    about = "Simplified-English data science questions to Cypher"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API over a CSV dataset.
    Serve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory for session logs and the shared synonym file.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Print the candidate queries for one question.
    Translate {
        question: String,
        #[arg(long)]
        data: PathBuf,
        /// Run every candidate and print its result.
        #[arg(long)]
        execute: bool,
        /// CSV of extra value synonyms (property,surface,canonical).
        #[arg(long)]
        synonyms: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded synthetic dataset.
    GenData {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        patients: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a session log and compare with what it recorded.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
}

fn load(data: &Path) -> Result<Dataset> {
    Dataset::load(data).with_context(|| format!("loading dataset from {}", data.display()))
}

fn print_result(result: &ExecutionResult) {
    for e in &result.estimates {
        println!(
            "-- statement {}: {} nodes, {} relationships, {}",
            e.statement_index, e.estimate.node_count, e.estimate.relationship_count, e.estimate.required_memory
        );
    }
    println!("{}", result.columns.join("\t"));
    for row in &result.rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        println!("{}", cells.join("\t"));
    }
}

fn translate(question: &str, data: &Path, execute: bool, synonyms: Option<&PathBuf>, json: bool) -> Result<ExitCode> {
    let dataset = load(data)?;
    let extras: Vec<Synonym> = match synonyms {
        Some(path) => read_synonyms(std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?)?,
        None => Vec::new(),
    };
    let mut session = Session::new("cli".into(), &dataset, extras, None)?;
    let response = session.post_question(question)?;
    if let Some(d) = &response.diagnostics {
        if json {
            println!("{}", serde_json::to_string_pretty(&response)?);
        }
        eprintln!("cannot translate: {}", d.message);
        if let Some((start, end)) = d.span {
            eprintln!("matched characters {start}..{end} as {:?}", d.productions);
        }
        return Ok(ExitCode::from(2));
    }
    let mut results = Vec::new();
    for c in &response.candidates {
        if !json {
            println!(
                "# {} [{:?}{}] score {:.2}",
                c.id,
                c.kind,
                c.algorithm.map(|a| format!(", {a}")).unwrap_or_default(),
                c.score
            );
            println!("# {}", c.explanation);
            println!("{};", c.script_text());
        }
        if execute {
            let result = session.execute_candidate(&dataset, response.turn_id, &c.id);
            if !json {
                match &result {
                    Ok(r) => print_result(r),
                    Err(e) => println!("-- failed: {e}"),
                }
                println!();
            }
            results.push(result.map_err(|e| e.to_string()));
        } else if !json {
            println!();
        }
    }
    if json {
        let out = serde_json::json!({ "turn": response, "results": results });
        println!("{}", serde_json::to_string_pretty(&out)?);
    }
    Ok(ExitCode::SUCCESS)
}

async fn serve(data: PathBuf, host: String, port: u16, state: Option<PathBuf>) -> Result<()> {
    let dataset = load(&data)?;
    tracing::info!(
        nodes = dataset.summary.node_count,
        relationships = dataset.summary.relationship_count,
        "dataset loaded"
    );
    let service = Arc::new(Service::new(dataset, state)?);
    let addr: SocketAddr = format!("{host}:{port}").parse().context("bad host or port")?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(service)).await?;
    Ok(())
}

fn main() -> Result<ExitCode> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match Cli::parse().command {
        Command::Serve {
            data,
            port,
            host,
            state,
        } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(data, host, port, state))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Translate {
            question,
            data,
            execute,
            synonyms,
            json,
        } => translate(&question, &data, execute, synonyms.as_ref(), json),
        Command::GenData { seed, patients, out } => {
            let manifest =
                generate_synthetic(&out, seed, patients).with_context(|| format!("writing {}", out.display()))?;
            for (file, rows) in &manifest.files {
                println!("{file}\t{rows}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { log, data } => {
            let dataset = load(&data)?;
            let events = read_log(&log)?;
            let report = replay(&events, &dataset)?;
            println!(
                "{} questions, {} executions replayed",
                report.questions, report.executions
            );
            for m in &report.mismatches {
                println!("mismatch: {m}");
            }
            Ok(if report.is_identical() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
