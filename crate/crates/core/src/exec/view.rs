//! Named in-memory graph views (the GDS "graph catalog").

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::plan::Orientation;
use super::ExecError;
use crate::graph::{NodeId, PropertyGraph};

/// Projection of one node label and one relationship type.
///
/// Members are all nodes of the label; a relationship is kept only when
/// both endpoints are members. Undirected views store every kept
/// relationship in both adjacency lists, so `relationship_count` counts
/// it twice.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphView {
    pub name: String,
    pub node_label: String,
    pub rel_type: String,
    pub orientation: Orientation,
    nodes: Vec<NodeId>,
    adjacency: Vec<Vec<usize>>,
}

impl GraphView {
    pub fn project(
        name: &str,
        graph: &PropertyGraph,
        node_label: &str,
        rel_type: &str,
        orientation: Orientation,
    ) -> Result<Self, ExecError> {
        if !graph.has_label(node_label) {
            return Err(ExecError::ViewDefinition(format!("unknown node label {node_label}")));
        }
        if !graph.has_relationship_type(rel_type) {
            return Err(ExecError::ViewDefinition(format!(
                "unknown relationship type {rel_type}"
            )));
        }
        let nodes = graph.nodes_with_label(node_label).to_vec();
        let index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let edges = graph
            .relationships()
            .iter()
            .filter(|r| r.rel_type == rel_type)
            .filter_map(|r| Some((*index.get(&r.source)?, *index.get(&r.target)?)));
        let mut view = Self::from_edges(nodes.len(), edges, orientation);
        view.name = name.to_string();
        view.node_label = node_label.to_string();
        view.rel_type = rel_type.to_string();
        view.nodes = nodes;
        Ok(view)
    }

    /// View over `n` anonymous members (`NodeId(0..n)`) with the given
    /// dense edges. Handy for exercising the algorithms directly.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, orientation: Orientation) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (s, t) in edges {
            adjacency[s].push(t);
            if orientation == Orientation::Undirected {
                adjacency[t].push(s);
            }
        }
        Self {
            name: String::new(),
            node_label: String::new(),
            rel_type: String::new(),
            orientation,
            nodes: (0..n).map(NodeId).collect(),
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn relationship_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Graph id of dense member `i`.
    pub fn node_id(&self, i: usize) -> NodeId {
        self.nodes[i]
    }

    /// Dense neighbours of dense member `i` (out-neighbours for NATURAL).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }
}

/// Per-session registry of views. Creation takes the write lock; lookups
/// share the read lock.
#[derive(Debug, Default)]
pub struct ViewCatalog {
    views: RwLock<BTreeMap<String, Arc<GraphView>>>,
}

impl ViewCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_view(
        &self,
        name: &str,
        node_label: &str,
        rel_type: &str,
        orientation: Orientation,
        graph: &PropertyGraph,
    ) -> Result<Arc<GraphView>, ExecError> {
        let mut views = self.views.write().expect("catalog lock poisoned");
        if views.contains_key(name) {
            return Err(ExecError::ViewExists(name.to_string()));
        }
        let view = Arc::new(GraphView::project(name, graph, node_label, rel_type, orientation)?);
        views.insert(name.to_string(), view.clone());
        Ok(view)
    }

    pub fn get(&self, name: &str) -> Result<Arc<GraphView>, ExecError> {
        self.views
            .read()
            .expect("catalog lock poisoned")
            .get(name)
            .cloned()
            .ok_or_else(|| ExecError::ViewNotFound(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.views.read().expect("catalog lock poisoned").contains_key(name)
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.views
            .read()
            .expect("catalog lock poisoned")
            .keys()
            .cloned()
            .collect()
    }
}

/// Deterministic memory estimate for running an algorithm over a view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MemoryEstimate {
    pub node_count: u64,
    pub relationship_count: u64,
    pub bytes_min: u64,
    pub bytes_max: u64,
    pub required_memory: String,
}

const BYTES_PER_NODE: u64 = 40;
const BYTES_PER_RELATIONSHIP: u64 = 24;
const BYTES_PER_SCORE: u64 = 8;

impl MemoryEstimate {
    pub fn for_counts(node_count: u64, relationship_count: u64) -> Self {
        let bytes_min =
            BYTES_PER_NODE * node_count + BYTES_PER_RELATIONSHIP * relationship_count + BYTES_PER_SCORE * node_count;
        let bytes_max = 2 * bytes_min;
        Self {
            node_count,
            relationship_count,
            bytes_min,
            bytes_max,
            required_memory: format!("[{bytes_min} Bytes ... {bytes_max} Bytes]"),
        }
    }
}

/// The estimate only depends on the view's size: every supported
/// algorithm keeps one 8-byte value per node on top of the projection.
pub fn estimate_memory(view: &GraphView) -> MemoryEstimate {
    MemoryEstimate::for_counts(view.node_count() as u64, view.relationship_count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Properties;

    fn fixture() -> PropertyGraph {
        // 3 patients, 2 medications of patient 0, plus one medication->medication link
        let mut g = PropertyGraph::new();
        let p: Vec<_> = (0..3).map(|_| g.add_node("Patients", Properties::new())).collect();
        let m1 = g.add_node("Medications", Properties::new());
        let m2 = g.add_node("Medications", Properties::new());
        g.add_relationship("PATIENT_HAS_MEDICATION", p[0], m1, Properties::new())
            .unwrap();
        g.add_relationship("PATIENT_HAS_MEDICATION", p[0], m2, Properties::new())
            .unwrap();
        g
    }

    #[test]
    fn cross_label_relationships_are_dropped() {
        let g = fixture();
        let catalog = ViewCatalog::new();
        let view = catalog
            .create_view(
                "my_graph",
                "Medications",
                "PATIENT_HAS_MEDICATION",
                Orientation::Natural,
                &g,
            )
            .unwrap();
        assert_eq!(view.node_count(), 2);
        assert_eq!(view.relationship_count(), 0);
        assert_eq!(view.node_id(0), NodeId(3));
    }

    #[test]
    fn duplicate_and_unknown_definitions() {
        let g = fixture();
        let catalog = ViewCatalog::new();
        catalog
            .create_view("v", "Patients", "PATIENT_HAS_MEDICATION", Orientation::Natural, &g)
            .unwrap();
        assert_eq!(
            catalog
                .create_view("v", "Patients", "PATIENT_HAS_MEDICATION", Orientation::Natural, &g)
                .unwrap_err(),
            ExecError::ViewExists("v".into())
        );
        assert!(matches!(
            catalog.create_view("w", "Nope", "PATIENT_HAS_MEDICATION", Orientation::Natural, &g),
            Err(ExecError::ViewDefinition(_))
        ));
        assert!(matches!(
            catalog.create_view("w", "Patients", "NOPE", Orientation::Natural, &g),
            Err(ExecError::ViewDefinition(_))
        ));
        assert_eq!(catalog.get("zzz").unwrap_err(), ExecError::ViewNotFound("zzz".into()));
        assert_eq!(catalog.names().into_iter().collect::<Vec<_>>(), vec!["v".to_string()]);
    }

    #[test]
    fn undirected_adjacency_is_symmetric() {
        let view = GraphView::from_edges(3, [(0, 1), (1, 2)], Orientation::Undirected);
        assert_eq!(view.relationship_count(), 4);
        for i in 0..3 {
            for &j in view.neighbors(i) {
                assert!(view.neighbors(j).contains(&i));
            }
        }
    }

    #[test]
    fn estimate_formula() {
        let e = MemoryEstimate::for_counts(5, 4);
        assert_eq!((e.bytes_min, e.bytes_max), (336, 672));
        assert_eq!(MemoryEstimate::for_counts(100, 37).bytes_min, 5688);
        let empty = estimate_memory(&GraphView::from_edges(0, [], Orientation::Natural));
        assert_eq!(
            empty,
            MemoryEstimate {
                node_count: 0,
                relationship_count: 0,
                bytes_min: 0,
                bytes_max: 0,
                required_memory: "[0 Bytes ... 0 Bytes]".into()
            }
        );
    }
}
