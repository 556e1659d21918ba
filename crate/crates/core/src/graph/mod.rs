//! In-memory property graph.
//!
//! Nodes carry exactly one label, relationships exactly one type, and both
//! carry scalar properties. Ids are dense: node `i` lives at index `i`.
//! The graph is built once (CSV ingestion or by hand in tests) and then
//! shared read-only.

mod ingest;
mod schema;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ingest::{load_csv_dataset, IngestError, ENTITY_FILES};
pub use schema::{extract_schema, graph_summary, GraphSchema, GraphSummary, SchemaConflict};
pub use synth::{generate_synthetic, DatasetManifest, MEDICATION_DESCRIPTIONS};

/// Scalar stored on nodes/relationships or produced in a result cell.
///
/// `Null` never appears as a stored property; it only shows up in query
/// results (e.g. reading a property a node does not have).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Loose equality used for property filters: numbers compare by value
    /// across int/float, everything else structurally.
    pub fn matches(&self, other: &Value) -> bool {
        match (self.as_f64(), other.as_f64()) {
            (Some(a), Some(b)) => a == b,
            _ => self == other,
        }
    }

    /// Total order used by ORDER BY: numbers < strings < null.
    pub fn sort_cmp(&self, other: &Value) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Int(_) | Value::Float(_) => 0,
                Value::Str(_) => 1,
                Value::Null => 2,
            }
        }
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
                _ => rank(self).cmp(&rank(other)),
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

pub type Properties = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for RelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub properties: Properties,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relationship {
    pub id: RelId,
    pub rel_type: String,
    pub source: NodeId,
    pub target: NodeId,
    pub properties: Properties,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("relationship {rel_type} references missing node {node}")]
    DanglingEndpoint { rel_type: String, node: NodeId },
}

#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: Vec<Node>,
    relationships: Vec<Relationship>,
    by_label: BTreeMap<String, Vec<NodeId>>,
    outgoing: Vec<Vec<RelId>>,
    incoming: Vec<Vec<RelId>>,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: impl Into<String>, properties: Properties) -> NodeId {
        let id = NodeId(self.nodes.len());
        let label = label.into();
        self.by_label.entry(label.clone()).or_default().push(id);
        self.nodes.push(Node { id, label, properties });
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        id
    }

    pub fn add_relationship(
        &mut self,
        rel_type: impl Into<String>,
        source: NodeId,
        target: NodeId,
        properties: Properties,
    ) -> Result<RelId, GraphError> {
        let rel_type = rel_type.into();
        for endpoint in [source, target] {
            if endpoint.0 >= self.nodes.len() {
                return Err(GraphError::DanglingEndpoint {
                    rel_type,
                    node: endpoint,
                });
            }
        }
        let id = RelId(self.relationships.len());
        self.outgoing[source.0].push(id);
        self.incoming[target.0].push(id);
        self.relationships.push(Relationship {
            id,
            rel_type,
            source,
            target,
            properties,
        });
        Ok(id)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn relationships(&self) -> &[Relationship] {
        &self.relationships
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    pub fn relationship(&self, id: RelId) -> Option<&Relationship> {
        self.relationships.get(id.0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn relationship_count(&self) -> usize {
        self.relationships.len()
    }

    /// Node ids carrying `label`, ascending.
    pub fn nodes_with_label(&self, label: &str) -> &[NodeId] {
        self.by_label.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.by_label.contains_key(label)
    }

    pub fn has_relationship_type(&self, rel_type: &str) -> bool {
        self.relationships.iter().any(|r| r.rel_type == rel_type)
    }

    pub fn outgoing(&self, node: NodeId) -> &[RelId] {
        &self.outgoing[node.0]
    }

    pub fn incoming(&self, node: NodeId) -> &[RelId] {
        &self.incoming[node.0]
    }
}
