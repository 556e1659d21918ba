use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PropertyGraph;

/// Labels, relationship types and property names observed in a graph.
///
/// This is the vocabulary source for the question lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub labels: BTreeSet<String>,
    /// type name -> (source label, target label)
    pub relationship_types: BTreeMap<String, (String, String)>,
    pub properties: BTreeMap<String, BTreeSet<String>>,
}

impl GraphSchema {
    pub fn has_property(&self, label: &str, property: &str) -> bool {
        self.properties.get(label).is_some_and(|props| props.contains(property))
    }

    /// Whether any label carries `property`.
    pub fn knows_property(&self, property: &str) -> bool {
        self.properties.values().any(|props| props.contains(property))
    }

    pub fn endpoints(&self, rel_type: &str) -> Option<(&str, &str)> {
        self.relationship_types
            .get(rel_type)
            .map(|(s, t)| (s.as_str(), t.as_str()))
    }

    /// True when `rel_type` has `label` at either end.
    pub fn touches(&self, rel_type: &str, label: &str) -> bool {
        self.endpoints(rel_type).is_some_and(|(s, t)| s == label || t == label)
    }

    /// Relationship types joining `a` and `b` in either direction, sorted.
    pub fn relationships_between(&self, a: &str, b: &str) -> Vec<&str> {
        self.relationship_types
            .iter()
            .filter(|(_, (s, t))| (s == a && t == b) || (s == b && t == a))
            .map(|(name, _)| name.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("relationship type {rel_type} observed as {first:?} and {second:?}")]
pub struct SchemaConflict {
    pub rel_type: String,
    pub first: (String, String),
    pub second: (String, String),
}

pub fn extract_schema(graph: &PropertyGraph) -> Result<GraphSchema, SchemaConflict> {
    let mut schema = GraphSchema::default();
    for node in graph.nodes() {
        schema.labels.insert(node.label.clone());
        schema
            .properties
            .entry(node.label.clone())
            .or_default()
            .extend(node.properties.keys().cloned());
    }
    for rel in graph.relationships() {
        let pair = (
            graph.nodes()[rel.source.0].label.clone(),
            graph.nodes()[rel.target.0].label.clone(),
        );
        match schema.relationship_types.get(&rel.rel_type) {
            Some(seen) if *seen != pair => {
                return Err(SchemaConflict {
                    rel_type: rel.rel_type.clone(),
                    first: seen.clone(),
                    second: pair,
                })
            }
            Some(_) => {}
            None => {
                schema.relationship_types.insert(rel.rel_type.clone(), pair);
            }
        }
    }
    Ok(schema)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub node_count: usize,
    pub relationship_count: usize,
    pub per_label: BTreeMap<String, usize>,
    pub per_type: BTreeMap<String, usize>,
}

pub fn graph_summary(graph: &PropertyGraph) -> GraphSummary {
    let mut summary = GraphSummary {
        node_count: graph.node_count(),
        relationship_count: graph.relationship_count(),
        ..GraphSummary::default()
    };
    for node in graph.nodes() {
        *summary.per_label.entry(node.label.clone()).or_default() += 1;
    }
    for rel in graph.relationships() {
        *summary.per_type.entry(rel.rel_type.clone()).or_default() += 1;
    }
    summary
}
