use std::fmt;

use serde::{Deserialize, Serialize};

use super::lexicon::AlgorithmKind;

/// Grammar productions, in the order parse results are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Production {
    Selection,
    Projection,
    SelectionProjection,
    Aggregation,
    ViewCreation,
    EstimateMemory,
    Centrality,
    Community,
}

impl Production {
    pub const ALL: [Production; 8] = [
        Production::Selection,
        Production::Projection,
        Production::SelectionProjection,
        Production::Aggregation,
        Production::ViewCreation,
        Production::EstimateMemory,
        Production::Centrality,
        Production::Community,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Production::Selection => "Selection",
            Production::Projection => "Projection",
            Production::SelectionProjection => "SelectionProjection",
            Production::Aggregation => "Aggregation",
            Production::ViewCreation => "ViewCreation",
            Production::EstimateMemory => "EstimateMemory",
            Production::Centrality => "Centrality",
            Production::Community => "Community",
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub property: String,
    pub value: String,
}

impl Condition {
    pub fn new(property: &str, value: &str) -> Self {
        Self {
            property: property.to_string(),
            value: value.to_string(),
        }
    }
}

/// Expression tree of one reading of a question. Names are canonical
/// schema names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "production")]
pub enum QuestionAst {
    Selection {
        label: String,
        conditions: Vec<Condition>,
    },
    Projection {
        label: String,
        property: String,
    },
    SelectionProjection {
        source_label: String,
        source_property: String,
        target_label: String,
        target_conditions: Vec<Condition>,
    },
    Aggregation {
        label: String,
        conditions: Vec<Condition>,
    },
    ViewCreation {
        base_graph: Option<String>,
        view_name: Option<String>,
        node_label: String,
        rel_type: String,
        oriented: bool,
    },
    EstimateMemory {
        algorithm: AlgorithmKind,
        view_name: String,
    },
    Centrality {
        keyword: String,
        node_label: String,
        rel_type: String,
        graph_name: Option<String>,
        max_iterations: Option<i64>,
        damping_factor: Option<f64>,
    },
    Community {
        keyword: String,
        node_label: String,
        view_name: Option<String>,
        rel_type: String,
        max_iterations: Option<i64>,
    },
}

impl QuestionAst {
    pub fn production(&self) -> Production {
        match self {
            QuestionAst::Selection { .. } => Production::Selection,
            QuestionAst::Projection { .. } => Production::Projection,
            QuestionAst::SelectionProjection { .. } => Production::SelectionProjection,
            QuestionAst::Aggregation { .. } => Production::Aggregation,
            QuestionAst::ViewCreation { .. } => Production::ViewCreation,
            QuestionAst::EstimateMemory { .. } => Production::EstimateMemory,
            QuestionAst::Centrality { .. } => Production::Centrality,
            QuestionAst::Community { .. } => Production::Community,
        }
    }
}
