//! Conversational sessions: questions, executions, ratings and vocabulary
//! changes, each appended to a JSONL log before the caller sees the result.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use nlds_core::exec::{run_script, ResultTable, ScriptError, StatementEstimate, ViewCatalog};
use nlds_core::graph::{
    extract_schema, graph_summary, load_csv_dataset, GraphSchema, GraphSummary, IngestError, PropertyGraph,
    SchemaConflict,
};
use nlds_core::nl::{bind_vocabulary, parse_question, read_synonyms, Lexicon, Production, Synonym, VocabularyError};
use nlds_core::querygen::{generate_all, rank_candidates, FeedbackStore, QueryCandidate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SYNONYM_FILE: &str = "synonyms.csv";
pub const SESSION_DIR: &str = "sessions";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session {0}")]
    SessionNotFound(String),
    #[error("no turn {0} in this session")]
    TurnNotFound(u64),
    #[error("candidate {candidate_id} does not belong to turn {turn_id}")]
    CandidateNotFound { turn_id: u64, candidate_id: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error(transparent)]
    Execution(#[from] ScriptError),
    #[error("session log: {0}")]
    Io(#[from] io::Error),
    #[error("session log line {line}: {source}")]
    Log {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Schema(#[from] SchemaConflict),
}

/// The shared, read-only graph every session queries.
#[derive(Debug)]
pub struct Dataset {
    pub graph: PropertyGraph,
    pub schema: GraphSchema,
    pub summary: GraphSummary,
}

impl Dataset {
    pub fn new(graph: PropertyGraph) -> Result<Self, DatasetError> {
        Ok(Self {
            schema: extract_schema(&graph)?,
            summary: graph_summary(&graph),
            graph,
        })
    }

    pub fn load(directory: &Path) -> Result<Self, DatasetError> {
        Self::new(load_csv_dataset(directory)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub message: String,
    pub span: Option<(usize, usize)>,
    pub productions: Vec<Production>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResponse {
    pub turn_id: u64,
    pub candidates: Vec<QueryCandidate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<nlds_core::graph::Value>>,
    pub estimates: Vec<StatementEstimate>,
    /// Statements skipped because their view already existed.
    pub skipped: Vec<usize>,
}

impl ExecutionResult {
    pub fn table(&self) -> ResultTable {
        ResultTable {
            columns: self.columns.clone(),
            rows: self.rows.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub production: Production,
    pub kind: nlds_core::querygen::CandidateKind,
    pub algorithm: Option<nlds_core::nl::AlgorithmKind>,
    pub mean: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTurn {
    pub turn_id: u64,
    pub question: String,
    /// Number of question readings.
    pub asts: usize,
    pub candidates: Vec<QueryCandidate>,
    pub diagnostics: Option<Diagnostics>,
    pub chosen: Option<String>,
    pub result: Option<ExecutionResult>,
    pub stars: Option<u8>,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    SessionCreated {
        session_id: String,
        synonyms: Vec<Synonym>,
        summary: GraphSummary,
        timestamp: u64,
    },
    Question {
        turn_id: u64,
        text: String,
        candidate_ids: Vec<String>,
        timestamp: u64,
    },
    Execute {
        turn_id: Option<u64>,
        candidate_id: Option<String>,
        raw_script: Option<String>,
        outcome: Result<ExecutionResult, String>,
        timestamp: u64,
    },
    Feedback {
        turn_id: u64,
        stars: i64,
        timestamp: u64,
    },
    Vocabulary {
        synonym: Synonym,
        lexicon_version: u64,
        timestamp: u64,
    },
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub struct Session {
    pub id: String,
    lexicon: Lexicon,
    lexicon_version: u64,
    synonyms: Vec<Synonym>,
    views: ViewCatalog,
    turns: Vec<SessionTurn>,
    feedback: FeedbackStore,
    log: Option<File>,
}

impl Session {
    /// A fresh session; with `log_path` the creation event is written
    /// immediately.
    pub fn new(
        id: String,
        dataset: &Dataset,
        synonyms: Vec<Synonym>,
        log_path: Option<&Path>,
    ) -> Result<Self, ServiceError> {
        let lexicon = bind_vocabulary(&dataset.schema, &synonyms)?;
        let log = match log_path {
            Some(p) => Some(OpenOptions::new().create(true).append(true).open(p)?),
            None => None,
        };
        let mut session = Self {
            id: id.clone(),
            lexicon,
            lexicon_version: 0,
            synonyms: synonyms.clone(),
            views: ViewCatalog::new(),
            turns: Vec::new(),
            feedback: FeedbackStore::new(),
            log,
        };
        session.append(&LogEvent::SessionCreated {
            session_id: id,
            synonyms,
            summary: dataset.summary.clone(),
            timestamp: now(),
        })?;
        Ok(session)
    }

    fn append(&mut self, event: &LogEvent) -> Result<(), ServiceError> {
        if let Some(file) = &mut self.log {
            let mut line = serde_json::to_string(event).expect("log events serialize");
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        Ok(())
    }

    pub fn lexicon_version(&self) -> u64 {
        self.lexicon_version
    }

    pub fn turns(&self) -> &[SessionTurn] {
        &self.turns
    }

    pub fn view_names(&self) -> Vec<String> {
        self.views.names().into_iter().collect()
    }

    fn turn_mut(&mut self, turn_id: u64) -> Result<&mut SessionTurn, ServiceError> {
        self.turns
            .iter_mut()
            .find(|t| t.turn_id == turn_id)
            .ok_or(ServiceError::TurnNotFound(turn_id))
    }

    /// Tokenize, parse, generate and rank. A question nothing can be made
    /// of still gets a turn, with diagnostics and no candidates.
    pub fn post_question(&mut self, text: &str) -> Result<QuestionResponse, ServiceError> {
        if text.trim().is_empty() {
            return Err(ServiceError::Validation("question text is empty".into()));
        }
        let turn_id = self.turns.last().map_or(1, |t| t.turn_id + 1);
        let (asts, candidates, diagnostics) = match parse_question(text, &self.lexicon) {
            Err(e) => (
                0,
                Vec::new(),
                Some(Diagnostics {
                    message: e.message.clone(),
                    span: Some(e.span),
                    productions: e.productions.clone(),
                }),
            ),
            Ok(asts) => match generate_all(&asts, &self.lexicon, &self.views.names()) {
                Ok(candidates) => (asts.len(), rank_candidates(candidates, &self.feedback), None),
                Err(e) => (
                    asts.len(),
                    Vec::new(),
                    Some(Diagnostics {
                        message: e.to_string(),
                        span: None,
                        productions: asts.iter().map(|a| a.production()).collect(),
                    }),
                ),
            },
        };
        let timestamp = now();
        self.turns.push(SessionTurn {
            turn_id,
            question: text.to_string(),
            asts,
            candidates: candidates.clone(),
            diagnostics: diagnostics.clone(),
            chosen: None,
            result: None,
            stars: None,
            timestamp,
        });
        self.append(&LogEvent::Question {
            turn_id,
            text: text.to_string(),
            candidate_ids: candidates.iter().map(|c| c.id.clone()).collect(),
            timestamp,
        })?;
        Ok(QuestionResponse {
            turn_id,
            candidates,
            diagnostics,
        })
    }

    fn run(&self, dataset: &Dataset, script: &str, reuse_views: bool) -> Result<ExecutionResult, ScriptError> {
        let outcome = run_script(script, &dataset.graph, &self.views, reuse_views)?;
        Ok(ExecutionResult {
            columns: outcome.table.columns,
            rows: outcome.table.rows,
            estimates: outcome.estimates,
            skipped: outcome.skipped,
        })
    }

    /// Runs a candidate of `turn_id`; views it creates stay in the
    /// session, and an existing view is reused rather than recreated.
    pub fn execute_candidate(
        &mut self,
        dataset: &Dataset,
        turn_id: u64,
        candidate_id: &str,
    ) -> Result<ExecutionResult, ServiceError> {
        let turn = self.turn_mut(turn_id)?;
        let candidate =
            turn.candidates
                .iter()
                .find(|c| c.id == candidate_id)
                .ok_or_else(|| ServiceError::CandidateNotFound {
                    turn_id,
                    candidate_id: candidate_id.to_string(),
                })?;
        let script = candidate.script_text();
        let outcome = self.run(dataset, &script, true);
        if let Ok(result) = &outcome {
            let turn = self.turn_mut(turn_id)?;
            turn.chosen = Some(candidate_id.to_string());
            turn.result = Some(result.clone());
        }
        self.append(&LogEvent::Execute {
            turn_id: Some(turn_id),
            candidate_id: Some(candidate_id.to_string()),
            raw_script: None,
            outcome: outcome.clone().map_err(|e| e.to_string()),
            timestamp: now(),
        })?;
        Ok(outcome?)
    }

    /// Runs an edited script as typed; creating an existing view fails.
    pub fn execute_raw(&mut self, dataset: &Dataset, script: &str) -> Result<ExecutionResult, ServiceError> {
        let outcome = self.run(dataset, script, false);
        self.append(&LogEvent::Execute {
            turn_id: None,
            candidate_id: None,
            raw_script: Some(script.to_string()),
            outcome: outcome.clone().map_err(|e| e.to_string()),
            timestamp: now(),
        })?;
        Ok(outcome?)
    }

    /// Rates the candidate executed in `turn_id`, or its top candidate if
    /// none was executed.
    pub fn record_feedback(&mut self, turn_id: u64, stars: i64) -> Result<Vec<FeedbackEntry>, ServiceError> {
        let turn = self.turn_mut(turn_id)?;
        let rated = turn
            .chosen
            .as_ref()
            .and_then(|id| turn.candidates.iter().find(|c| &c.id == id))
            .or_else(|| turn.candidates.first())
            .ok_or_else(|| ServiceError::Validation(format!("turn {turn_id} has no candidates to rate")))?;
        let key = rated.feedback_key();
        self.feedback
            .record(key, stars)
            .map_err(|e| ServiceError::Validation(e.to_string()))?;
        self.turn_mut(turn_id)?.stars = Some(stars as u8);
        self.append(&LogEvent::Feedback {
            turn_id,
            stars,
            timestamp: now(),
        })?;
        Ok(self.feedback_summary())
    }

    pub fn feedback_summary(&self) -> Vec<FeedbackEntry> {
        self.feedback
            .entries()
            .map(|(key, tally)| FeedbackEntry {
                production: key.production,
                kind: key.kind,
                algorithm: key.algorithm,
                mean: self.feedback.score(key),
                count: tally.count,
            })
            .collect()
    }

    /// Rebuilds the lexicon with one more value synonym and returns the
    /// lexicon version. Adding a synonym already present changes nothing.
    pub fn add_synonym(&mut self, synonym: Synonym) -> Result<u64, ServiceError> {
        if self.synonyms.contains(&synonym) {
            return Ok(self.lexicon_version);
        }
        let mut synonyms = self.synonyms.clone();
        synonyms.push(synonym.clone());
        self.lexicon = bind_vocabulary(self.lexicon.schema(), &synonyms)?;
        self.synonyms = synonyms;
        self.lexicon_version += 1;
        self.append(&LogEvent::Vocabulary {
            synonym,
            lexicon_version: self.lexicon_version,
            timestamp: now(),
        })?;
        Ok(self.lexicon_version)
    }
}

/// All sessions over one dataset, plus the state directory holding
/// session logs and the shared synonym file.
pub struct Service {
    pub dataset: Arc<Dataset>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    state_dir: Option<PathBuf>,
    synonyms: Mutex<Vec<Synonym>>,
}

impl Service {
    /// Without `state_dir` nothing is persisted.
    pub fn new(dataset: Dataset, state_dir: Option<PathBuf>) -> Result<Self, ServiceError> {
        let mut synonyms = Vec::new();
        if let Some(dir) = &state_dir {
            fs::create_dir_all(dir.join(SESSION_DIR))?;
            let path = dir.join(SYNONYM_FILE);
            if path.exists() {
                synonyms = read_synonyms(File::open(&path)?)?;
                bind_vocabulary(&dataset.schema, &synonyms)?;
            }
        }
        Ok(Self {
            dataset: Arc::new(dataset),
            sessions: RwLock::new(HashMap::new()),
            state_dir,
            synonyms: Mutex::new(synonyms),
        })
    }

    pub fn log_path(&self, session_id: &str) -> Option<PathBuf> {
        self.state_dir
            .as_ref()
            .map(|d| d.join(SESSION_DIR).join(format!("{session_id}.jsonl")))
    }

    pub fn create_session(&self) -> Result<String, ServiceError> {
        let id = uuid::Uuid::new_v4().to_string();
        let synonyms = self.synonyms.lock().expect("synonym lock").clone();
        let session = Session::new(id.clone(), &self.dataset, synonyms, self.log_path(&id).as_deref())?;
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::SessionNotFound(id.to_string()))
    }

    /// Runs `f` on the session with exclusive access, so requests for one
    /// session happen one at a time.
    pub fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session, &Dataset) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let session = self.session(id)?;
        let mut guard = session.lock().unwrap_or_else(|e| e.into_inner());
        f(&mut guard, &self.dataset)
    }

    /// Adds the synonym to the session and to the shared synonym file that
    /// later sessions start from.
    pub fn add_synonym(&self, id: &str, synonym: Synonym) -> Result<u64, ServiceError> {
        let version = self.with_session(id, |s, _| s.add_synonym(synonym.clone()))?;
        let mut shared = self.synonyms.lock().expect("synonym lock");
        if !shared.contains(&synonym) {
            if let Some(dir) = &self.state_dir {
                append_synonym(&dir.join(SYNONYM_FILE), &synonym)?;
            }
            shared.push(synonym);
        }
        Ok(version)
    }
}

fn append_synonym(path: &Path, synonym: &Synonym) -> Result<(), ServiceError> {
    let fresh = !path.exists();
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    writer
        .serialize(synonym)
        .map_err(|e| ServiceError::Vocabulary(VocabularyError::Csv(e)))?;
    writer.flush()?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<LogEvent>, ServiceError> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|source| ServiceError::Log { line: i + 1, source })?);
    }
    Ok(events)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReplayReport {
    pub questions: usize,
    pub executions: usize,
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn is_identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs every logged event on a fresh, unlogged session over
/// `dataset` and compares candidate ids and execution results with what
/// the log recorded.
pub fn replay(events: &[LogEvent], dataset: &Dataset) -> Result<ReplayReport, ServiceError> {
    let mut report = ReplayReport::default();
    let mut session: Option<Session> = None;
    let mut turn_ids: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, event) in events.iter().enumerate() {
        if let LogEvent::SessionCreated {
            session_id,
            synonyms,
            summary,
            ..
        } = event
        {
            if *summary != dataset.summary {
                report
                    .mismatches
                    .push(format!("event {i}: dataset differs from the one the session ran on"));
            }
            session = Some(Session::new(session_id.clone(), dataset, synonyms.clone(), None)?);
            continue;
        }
        let s = session
            .as_mut()
            .ok_or_else(|| ServiceError::Validation("log does not start with session_created".into()))?;
        match event {
            LogEvent::SessionCreated { .. } => unreachable!(),
            LogEvent::Question {
                turn_id,
                text,
                candidate_ids,
                ..
            } => {
                report.questions += 1;
                let response = s.post_question(text)?;
                turn_ids.insert(*turn_id, response.turn_id);
                let got: Vec<_> = response.candidates.iter().map(|c| c.id.clone()).collect();
                if &got != candidate_ids {
                    report.mismatches.push(format!(
                        "event {i} ({text:?}): candidates {got:?}, logged {candidate_ids:?}"
                    ));
                }
            }
            LogEvent::Execute {
                turn_id,
                candidate_id,
                raw_script,
                outcome,
                ..
            } => {
                report.executions += 1;
                let got = match (turn_id, candidate_id, raw_script) {
                    (Some(t), Some(c), _) => {
                        let t = turn_ids.get(t).copied().unwrap_or(*t);
                        s.execute_candidate(dataset, t, c)
                    }
                    (_, _, Some(script)) => s.execute_raw(dataset, script),
                    _ => Err(ServiceError::Validation(format!("event {i}: nothing to execute"))),
                };
                let same = match (&got, outcome) {
                    (Ok(a), Ok(b)) => a == b,
                    (Err(ServiceError::Execution(a)), Err(b)) => &a.to_string() == b,
                    _ => false,
                };
                if !same {
                    report
                        .mismatches
                        .push(format!("event {i}: execution result differs from the log"));
                }
            }
            LogEvent::Feedback { turn_id, stars, .. } => {
                let t = turn_ids.get(turn_id).copied().unwrap_or(*turn_id);
                s.record_feedback(t, *stars)?;
            }
            LogEvent::Vocabulary { synonym, .. } => {
                s.add_synonym(synonym.clone())?;
            }
        }
    }
    Ok(report)
}
