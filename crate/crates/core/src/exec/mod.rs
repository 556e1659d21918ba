//! Reference execution engine for the generated Cypher subset.

mod algo;
mod cypher;
mod engine;
mod plan;
mod view;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use algo::{
    degree_centrality, label_propagation, label_propagation_run, pagerank, pagerank_run, LabelPropagationRun,
    PageRankRun, PAGERANK_TOLERANCE,
};
pub use cypher::{parse_cypher, split_statements, CypherSubsetError, Span};
pub use engine::{execute, execute_statement, run_script, ScriptError, ScriptOutcome, StatementEstimate};
pub use plan::*;
pub use view::{estimate_memory, GraphView, MemoryEstimate, ViewCatalog};

use crate::graph::Value;

/// Longest path explored by `-[*]->`.
pub const MAX_PATH_LENGTH: usize = 8;
pub const DEFAULT_PAGERANK_ITERATIONS: i64 = 20;
pub const DEFAULT_DAMPING_FACTOR: f64 = 0.85;
pub const DEFAULT_LABEL_PROPAGATION_ITERATIONS: i64 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("graph view {0} does not exist")]
    ViewNotFound(String),
    #[error("graph view {0} already exists")]
    ViewExists(String),
    #[error("invalid view definition: {0}")]
    ViewDefinition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no column named {0}")]
    UnknownColumn(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row arity must match columns");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// RFC 4180 CSV with a header row; nulls are empty fields.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|v| v.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}
