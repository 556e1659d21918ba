//! Question trees to ranked Cypher candidates.

mod feedback;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{format_float, Orientation};
use crate::exec::{quote, DEFAULT_DAMPING_FACTOR, DEFAULT_LABEL_PROPAGATION_ITERATIONS, DEFAULT_PAGERANK_ITERATIONS};
use crate::nl::{AlgorithmKind, Condition, Lexicon, Production, QuestionAst};

pub use feedback::{rank_candidates, FeedbackError, FeedbackKey, FeedbackStore, Tally, DEFAULT_SCORE};

/// View name used when a question names none.
pub const DEFAULT_VIEW: &str = "my_graph";
pub const PAGERANK_LIMIT: usize = 10;
pub const COMMUNITY_LIMIT: usize = 5;

const ESTIMATE_YIELD: &str = "YIELD nodeCount, relationshipCount, bytesMin, bytesMax, requiredMemory";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CandidateKind {
    Navigational,
    DataScience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryCandidate {
    pub id: String,
    pub script: Vec<String>,
    pub kind: CandidateKind,
    pub algorithm: Option<AlgorithmKind>,
    pub explanation: String,
    pub score: f64,
    /// Production of the question reading this candidate came from.
    pub production: Production,
}

impl QueryCandidate {
    fn new(
        production: Production,
        kind: CandidateKind,
        algorithm: Option<AlgorithmKind>,
        script: Vec<String>,
        explanation: String,
    ) -> Self {
        Self {
            id: candidate_id(&script),
            script,
            kind,
            algorithm,
            explanation,
            score: DEFAULT_SCORE,
            production,
        }
    }

    /// Statements joined with `;\n`.
    pub fn script_text(&self) -> String {
        self.script.join(";\n")
    }

    pub fn feedback_key(&self) -> FeedbackKey {
        FeedbackKey {
            production: self.production,
            kind: self.kind,
            algorithm: self.algorithm,
        }
    }
}

/// Lowercase hex of the 64-bit FNV-1a hash of the `;\n`-joined script.
pub fn candidate_id(script: &[String]) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let hash = script
        .join(";\n")
        .bytes()
        .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME));
    format!("{hash:016x}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{phrase:?} is not an algorithm keyword")]
pub struct KeywordError {
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("relationship type {rel_type} does not connect label {label}")]
    Disconnected { rel_type: String, label: String },
    #[error(transparent)]
    Keyword(#[from] KeywordError),
}

/// The lexicon's algorithm set for a keyword phrase.
pub fn map_keyword_to_algorithms(phrase: &str, lexicon: &Lexicon) -> Result<BTreeSet<AlgorithmKind>, KeywordError> {
    lexicon.keyword_algorithms(phrase).cloned().ok_or_else(|| KeywordError {
        phrase: phrase.to_string(),
    })
}

fn property_map(conditions: &[Condition]) -> String {
    if conditions.is_empty() {
        return String::new();
    }
    let entries: Vec<String> = conditions
        .iter()
        .map(|c| format!("{}:{}", c.property, quote(&c.value)))
        .collect();
    format!(" {{{}}}", entries.join(", "))
}

fn describe(conditions: &[Condition]) -> String {
    let parts: Vec<String> = conditions
        .iter()
        .map(|c| format!("{} is '{}'", c.property, c.value))
        .collect();
    parts.join(" and ")
}

fn create_view(view: &str, label: &str, rel_type: &str, orientation: Orientation) -> String {
    format!(
        "CALL gds.graph.create({}, {}, {{{rel_type}: {{orientation: '{}'}}}})",
        quote(view),
        quote(label),
        orientation.as_str()
    )
}

fn pagerank_estimate(view: &str, max_iterations: i64, damping: f64) -> String {
    format!(
        "CALL gds.pageRank.write.estimate({}, {{writeProperty: 'pageRank', maxIterations: {max_iterations}, dampingFactor: {}}}) {ESTIMATE_YIELD}",
        quote(view),
        format_float(damping)
    )
}

fn label_propagation_estimate(view: &str) -> String {
    format!(
        "CALL gds.labelPropagation.write.estimate({}, {{writeProperty: 'community'}}) {ESTIMATE_YIELD}",
        quote(view)
    )
}

fn check_connected(lexicon: &Lexicon, rel_type: &str, label: &str) -> Result<(), GenerationError> {
    if lexicon.schema().touches(rel_type, label) {
        Ok(())
    } else {
        Err(GenerationError::Disconnected {
            rel_type: rel_type.to_string(),
            label: label.to_string(),
        })
    }
}

/// Candidates for one question reading, navigational first and then by
/// script text. `views` are the views that already exist; scripts skip
/// creating those.
pub fn generate(
    ast: &QuestionAst,
    lexicon: &Lexicon,
    views: &BTreeSet<String>,
) -> Result<Vec<QueryCandidate>, GenerationError> {
    use CandidateKind::*;
    let production = ast.production();
    let single = |kind, algorithm, script: Vec<String>, explanation: String| {
        vec![QueryCandidate::new(production, kind, algorithm, script, explanation)]
    };
    let mut candidates = match ast {
        QuestionAst::Selection { label, conditions } => single(
            Navigational,
            None,
            vec![format!("MATCH (n:{label}{}) RETURN n", property_map(conditions))],
            format!("Returns the {label} nodes where {}.", describe(conditions)),
        ),
        QuestionAst::Projection { label, property } => single(
            Navigational,
            None,
            vec![format!("MATCH (n:{label}) RETURN n.{property}")],
            format!("Returns the {property} of every {label} node."),
        ),
        QuestionAst::SelectionProjection {
            source_label,
            source_property,
            target_label,
            target_conditions,
        } => {
            let mut returned = vec![format!("n.{source_property}")];
            for c in target_conditions {
                let column = format!("m.{}", c.property);
                if !returned.contains(&column) {
                    returned.push(column);
                }
            }
            single(
                Navigational,
                None,
                vec![format!(
                    "MATCH (n:{source_label})-[*]->(m:{target_label}{}) RETURN {}",
                    property_map(target_conditions),
                    returned.join(", ")
                )],
                format!(
                    "Returns the {source_property} of {source_label} nodes with a path to {target_label} nodes where {}.",
                    describe(target_conditions)
                ),
            )
        }
        QuestionAst::Aggregation { label, conditions } => {
            let explanation = if conditions.is_empty() {
                format!("Counts the {label} nodes.")
            } else {
                format!("Counts the {label} nodes where {}.", describe(conditions))
            };
            single(
                Navigational,
                None,
                vec![format!("MATCH (n:{label}{}) RETURN count(n)", property_map(conditions))],
                explanation,
            )
        }
        QuestionAst::ViewCreation {
            base_graph,
            view_name,
            node_label,
            rel_type,
            oriented,
        } => {
            let view = view_name.as_deref().or(base_graph.as_deref()).unwrap_or(DEFAULT_VIEW);
            let orientation = if *oriented {
                Orientation::Natural
            } else {
                Orientation::Undirected
            };
            let mut script = Vec::new();
            if !views.contains(view) {
                script.push(create_view(view, node_label, rel_type, orientation));
            }
            script.push(format!(
                "CALL gds.graph.create.estimate({}, {{{rel_type}: {{orientation: '{}'}}}}) {ESTIMATE_YIELD}",
                quote(node_label),
                orientation.as_str()
            ));
            single(
                DataScience,
                None,
                script,
                format!(
                    "Creates view '{view}' of {node_label} nodes linked by {rel_type} ({}) and estimates its memory.",
                    orientation.as_str()
                ),
            )
        }
        QuestionAst::EstimateMemory { algorithm, view_name } => {
            let statement = match algorithm {
                AlgorithmKind::LabelPropagation => label_propagation_estimate(view_name),
                _ => pagerank_estimate(view_name, DEFAULT_PAGERANK_ITERATIONS, DEFAULT_DAMPING_FACTOR),
            };
            single(
                DataScience,
                Some(*algorithm),
                vec![statement],
                format!("Estimates the memory {algorithm} needs on view '{view_name}'."),
            )
        }
        QuestionAst::Centrality {
            keyword,
            node_label,
            rel_type,
            graph_name,
            max_iterations,
            damping_factor,
        } => {
            check_connected(lexicon, rel_type, node_label)?;
            let view = graph_name.as_deref().unwrap_or(DEFAULT_VIEW);
            let mut out = Vec::new();
            for algorithm in map_keyword_to_algorithms(keyword, lexicon)? {
                out.push(match algorithm {
                    AlgorithmKind::DegreeCentrality => QueryCandidate::new(
                        production,
                        Navigational,
                        Some(algorithm),
                        vec![format!(
                            "MATCH (n:{node_label})-[r:{rel_type}]-() WITH n, count(*) AS degree RETURN id(n), degree ORDER BY (degree) DESC"
                        )],
                        format!("Ranks {node_label} nodes by their number of {rel_type} relationships."),
                    ),
                    _ => {
                        let iterations = max_iterations.unwrap_or(DEFAULT_PAGERANK_ITERATIONS);
                        let damping = damping_factor.unwrap_or(DEFAULT_DAMPING_FACTOR);
                        let mut script = Vec::new();
                        if !views.contains(view) {
                            script.push(create_view(view, node_label, rel_type, Orientation::Natural));
                        }
                        script.push(pagerank_estimate(view, iterations, damping));
                        let name = if lexicon.schema().has_property(node_label, "DESCRIPTION") {
                            "gds.util.asNode(nodeId).DESCRIPTION"
                        } else {
                            "nodeId"
                        };
                        script.push(format!(
                            "CALL gds.pageRank.stream({}) YIELD nodeId, score RETURN {name} AS name, score ORDER BY score DESC LIMIT {PAGERANK_LIMIT}",
                            quote(view)
                        ));
                        QueryCandidate::new(
                            production,
                            DataScience,
                            Some(AlgorithmKind::PageRank),
                            script,
                            format!(
                                "Runs PageRank on {node_label} nodes over {rel_type} in view '{view}' ({iterations} iterations, damping {}) and lists the top {PAGERANK_LIMIT}.",
                                format_float(damping)
                            ),
                        )
                    }
                });
            }
            out
        }
        QuestionAst::Community {
            keyword,
            node_label,
            view_name,
            rel_type,
            max_iterations,
        } => {
            check_connected(lexicon, rel_type, node_label)?;
            let view = view_name.as_deref().unwrap_or(DEFAULT_VIEW);
            let iterations = max_iterations.unwrap_or(DEFAULT_LABEL_PROPAGATION_ITERATIONS);
            let mut out = Vec::new();
            for algorithm in map_keyword_to_algorithms(keyword, lexicon)? {
                let mut script = Vec::new();
                if !views.contains(view) {
                    script.push(create_view(view, node_label, rel_type, Orientation::Undirected));
                }
                script.push(label_propagation_estimate(view));
                script.push(format!(
                    "CALL gds.labelPropagation.stream({}, {{maxIterations: {iterations}}}) YIELD nodeId, communityId RETURN communityId, count(nodeId) AS size ORDER BY size DESC LIMIT {COMMUNITY_LIMIT}",
                    quote(view)
                ));
                out.push(QueryCandidate::new(
                    production,
                    DataScience,
                    Some(algorithm),
                    script,
                    format!(
                        "Groups {node_label} nodes linked by {rel_type} in view '{view}' with Label Propagation ({iterations} iterations) and lists the {COMMUNITY_LIMIT} largest communities."
                    ),
                ));
            }
            out
        }
    };
    candidates.sort_by(|a, b| (a.kind, &a.script).cmp(&(b.kind, &b.script)));
    candidates.dedup_by(|a, b| a.id == b.id);
    Ok(candidates)
}

/// Candidates for every reading, in reading order. Readings that cannot
/// be generated are skipped; if none can, the first error is returned.
pub fn generate_all(
    asts: &[QuestionAst],
    lexicon: &Lexicon,
    views: &BTreeSet<String>,
) -> Result<Vec<QueryCandidate>, GenerationError> {
    let mut out: Vec<QueryCandidate> = Vec::new();
    let mut first_error = None;
    for ast in asts {
        match generate(ast, lexicon, views) {
            Ok(candidates) => {
                for c in candidates {
                    if !out.iter().any(|o| o.id == c.id) {
                        out.push(c);
                    }
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) if out.is_empty() => Err(e),
        _ => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::parse_cypher;
    use crate::graph::GraphSchema;
    use crate::nl::bind_vocabulary;

    fn lexicon() -> Lexicon {
        let mut s = GraphSchema::default();
        for l in ["Patients", "Medications", "Encounters"] {
            s.labels.insert(l.into());
        }
        for (t, a, b) in [
            ("PATIENT_HAS_MEDICATION", "Patients", "Medications"),
            ("ENCOUNTER_FOR_MEDICATION", "Encounters", "Medications"),
        ] {
            s.relationship_types.insert(t.into(), (a.into(), b.into()));
        }
        s.properties.insert("Patients".into(), ["RACE".to_string()].into());
        s.properties
            .insert("Medications".into(), ["DESCRIPTION".to_string()].into());
        bind_vocabulary(&s, &[]).unwrap()
    }

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 64 test vectors
        assert_eq!(candidate_id(&[String::new()]), "cbf29ce484222325");
        assert_eq!(candidate_id(&["a".to_string()]), "af63dc4c8601ec8c");
        assert_eq!(candidate_id(&["foobar".to_string()]), "85944171f73967e8");
        assert_eq!(
            candidate_id(&["a".to_string(), "b".to_string()]),
            candidate_id(&["a;\nb".to_string()])
        );
    }

    #[test]
    fn aggregation_template() {
        let ast = QuestionAst::Aggregation {
            label: "Patients".into(),
            conditions: vec![Condition::new("RACE", "white")],
        };
        let c = generate(&ast, &lexicon(), &BTreeSet::new()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].script, vec!["MATCH (n:Patients {RACE:'white'}) RETURN count(n)"]);
        assert_eq!(c[0].kind, CandidateKind::Navigational);
        assert_eq!(c[0].score, DEFAULT_SCORE);
    }

    #[test]
    fn popular_expands_to_two_algorithms() {
        let ast = QuestionAst::Centrality {
            keyword: "most popular".into(),
            node_label: "Encounters".into(),
            rel_type: "ENCOUNTER_FOR_MEDICATION".into(),
            graph_name: None,
            max_iterations: None,
            damping_factor: None,
        };
        let c = generate(&ast, &lexicon(), &BTreeSet::new()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].algorithm, Some(AlgorithmKind::DegreeCentrality));
        assert_eq!(c[1].algorithm, Some(AlgorithmKind::PageRank));
        assert_eq!(c[1].script.len(), 3);
        // Encounters has no DESCRIPTION in this schema
        assert!(c[1].script[2].contains("RETURN nodeId AS name"));
        for candidate in &c {
            for statement in &candidate.script {
                parse_cypher(statement).unwrap();
            }
        }
        let reused = generate(&ast, &lexicon(), &BTreeSet::from([DEFAULT_VIEW.to_string()])).unwrap();
        assert_eq!(reused[1].script.len(), 2);
        assert_ne!(reused[1].id, c[1].id);
    }

    #[test]
    fn disconnected_relationship_is_an_error() {
        let ast = QuestionAst::Community {
            keyword: "communities".into(),
            node_label: "Encounters".into(),
            view_name: None,
            rel_type: "PATIENT_HAS_MEDICATION".into(),
            max_iterations: None,
        };
        assert_eq!(
            generate(&ast, &lexicon(), &BTreeSet::new()).unwrap_err(),
            GenerationError::Disconnected {
                rel_type: "PATIENT_HAS_MEDICATION".into(),
                label: "Encounters".into()
            }
        );
    }

    #[test]
    fn keyword_mapping() {
        let lex = lexicon();
        assert_eq!(
            map_keyword_to_algorithms("most important", &lex).unwrap(),
            BTreeSet::from([AlgorithmKind::PageRank])
        );
        assert_eq!(
            map_keyword_to_algorithms("communities", &lex).unwrap(),
            BTreeSet::from([AlgorithmKind::LabelPropagation])
        );
        assert_eq!(
            map_keyword_to_algorithms("fastest", &lex).unwrap_err(),
            KeywordError {
                phrase: "fastest".into()
            }
        );
    }

    #[test]
    fn view_creation_orientation() {
        let ast = QuestionAst::ViewCreation {
            base_graph: Some("synthea".into()),
            view_name: None,
            node_label: "Medications".into(),
            rel_type: "ENCOUNTER_FOR_MEDICATION".into(),
            oriented: false,
        };
        let c = generate(&ast, &lexicon(), &BTreeSet::new()).unwrap();
        assert_eq!(c[0].script.len(), 2);
        assert!(c[0].script[0].starts_with("CALL gds.graph.create('synthea', 'Medications'"));
        assert!(c[0].script[1].contains("'UNDIRECTED'"));
    }
}
