//! Graph algorithms run by the `gds.*` procedures.

use super::plan::Orientation;
use super::view::GraphView;
use super::{ExecError, ResultTable};
use crate::graph::{NodeId, PropertyGraph, Value};

/// L1 change between two iterations below which PageRank stops early.
pub const PAGERANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankRun {
    /// Score per dense view member.
    pub scores: Vec<f64>,
    pub iterations: usize,
}

fn check_iterations(max_iterations: i64) -> Result<usize, ExecError> {
    if max_iterations < 1 {
        return Err(ExecError::InvalidParameter(format!(
            "maxIterations must be at least 1, got {max_iterations}"
        )));
    }
    Ok(max_iterations as usize)
}

/// Synchronous power iteration from the uniform vector.
///
/// Each step computes `(1-d)/N + d * (sum over in-links of s(u)/outdeg(u)
/// + dangling mass / N)`, so the scores stay a probability distribution.
pub fn pagerank_run(view: &GraphView, max_iterations: i64, damping: f64) -> Result<PageRankRun, ExecError> {
    let max_iterations = check_iterations(max_iterations)?;
    if !(damping > 0.0 && damping < 1.0) {
        return Err(ExecError::InvalidParameter(format!(
            "dampingFactor must be in (0, 1), got {damping}"
        )));
    }
    let n = view.node_count();
    if n == 0 {
        return Ok(PageRankRun {
            scores: Vec::new(),
            iterations: 0,
        });
    }
    let nf = n as f64;
    let mut scores = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let dangling: f64 = (0..n)
            .filter(|&u| view.neighbors(u).is_empty())
            .map(|u| scores[u])
            .sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (u, score) in scores.iter().enumerate() {
            let out = view.neighbors(u);
            if out.is_empty() {
                continue;
            }
            let share = damping * score / out.len() as f64;
            for &v in out {
                next[v] += share;
            }
        }
        let delta: f64 = scores.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut scores, &mut next);
        if delta < PAGERANK_TOLERANCE {
            break;
        }
    }
    Ok(PageRankRun { scores, iterations })
}

/// `(graph node id, score)` in view order.
pub fn pagerank(view: &GraphView, max_iterations: i64, damping: f64) -> Result<Vec<(NodeId, f64)>, ExecError> {
    let run = pagerank_run(view, max_iterations, damping)?;
    Ok(run
        .scores
        .into_iter()
        .enumerate()
        .map(|(i, s)| (view.node_id(i), s))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPropagationRun {
    /// Label per dense member; a label is the dense index of the member
    /// it started on.
    pub labels: Vec<usize>,
    pub iterations: usize,
    /// True when the last sweep changed nothing.
    pub converged: bool,
}

/// Asynchronous label propagation: sweeps visit members in view order and
/// update labels in place.
///
/// Relationships count in both directions whatever the view orientation.
/// A member keeps its label while it is among the most frequent labels of
/// its neighbours; otherwise it takes the largest most frequent label.
/// Every change strictly increases the number of relationships whose ends
/// agree, so the sweeps always reach a fixed point.
pub fn label_propagation_run(view: &GraphView, max_iterations: i64) -> Result<LabelPropagationRun, ExecError> {
    let max_iterations = check_iterations(max_iterations)?;
    let n = view.node_count();
    let mut adjacency: Vec<Vec<usize>> = (0..n).map(|i| view.neighbors(i).to_vec()).collect();
    if view.orientation == Orientation::Natural {
        for u in 0..n {
            for &v in view.neighbors(u) {
                adjacency[v].push(u);
            }
        }
    }
    let mut labels: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut seen = Vec::new();
    let mut iterations = 0;
    let mut converged = n == 0;
    while !converged && iterations < max_iterations {
        iterations += 1;
        let mut changed = false;
        for u in 0..n {
            if adjacency[u].is_empty() {
                continue;
            }
            for &v in &adjacency[u] {
                let l = labels[v];
                if counts[l] == 0 {
                    seen.push(l);
                }
                counts[l] += 1;
            }
            let best = seen.iter().map(|&l| counts[l]).max().unwrap_or(0);
            if counts[labels[u]] < best {
                labels[u] = seen
                    .iter()
                    .copied()
                    .filter(|&l| counts[l] == best)
                    .max()
                    .expect("some label has the best count");
                changed = true;
            }
            for l in seen.drain(..) {
                counts[l] = 0;
            }
        }
        converged = !changed;
    }
    Ok(LabelPropagationRun {
        labels,
        iterations,
        converged,
    })
}

/// `(graph node id, community id)` in view order; the community id is the
/// graph id of the member whose label won.
pub fn label_propagation(view: &GraphView, max_iterations: i64) -> Result<Vec<(NodeId, NodeId)>, ExecError> {
    let run = label_propagation_run(view, max_iterations)?;
    Ok(run
        .labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| (view.node_id(i), view.node_id(l)))
        .collect())
}

/// Incident `rel_type` relationships per `label` node, in either direction.
///
/// Same rows, columns and order as
/// `MATCH (n:L)-[r:T]-() WITH n, count(*) AS degree RETURN id(n), degree
/// ORDER BY degree DESC`: nodes without a match are absent and ties keep
/// ascending node id.
pub fn degree_centrality(graph: &PropertyGraph, label: &str, rel_type: &str) -> ResultTable {
    let mut rows: Vec<(NodeId, i64)> = graph
        .nodes_with_label(label)
        .iter()
        .map(|&n| {
            let out = graph
                .outgoing(n)
                .iter()
                .filter(|r| graph.relationships()[r.0].rel_type == rel_type);
            let inc = graph.incoming(n).iter().filter(|r| {
                let rel = &graph.relationships()[r.0];
                rel.rel_type == rel_type && rel.source != rel.target
            });
            (n, (out.count() + inc.count()) as i64)
        })
        .filter(|(_, d)| *d > 0)
        .collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.1));
    let mut table = ResultTable::new(vec!["id(n)".into(), "degree".into()]);
    for (n, d) in rows {
        table.push_row(vec![Value::Int(n.0 as i64), Value::Int(d)]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Properties;

    #[test]
    fn directed_cycle_is_uniform() {
        let view = GraphView::from_edges(3, [(0, 1), (1, 2), (2, 0)], Orientation::Natural);
        let run = pagerank_run(&view, 50, 0.85).unwrap();
        for s in &run.scores {
            assert!((s - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    /// One synchronous step on 0->1, 0->2, 1->2, 3 dangling (and 2 dangling),
    /// worked by hand with d = 0.5, N = 4, s0 = 1/4:
    ///   dangling mass = s2 + s3 = 1/2, base = 0.5/4 + 0.5*0.5/4 = 0.1875
    ///   s0 = base                           = 0.1875
    ///   s1 = base + 0.5 * (1/4)/2           = 0.25
    ///   s2 = base + 0.5 * ((1/4)/2 + 1/4)   = 0.375
    ///   s3 = base                           = 0.1875
    #[test]
    fn single_step_matches_hand_computation() {
        let view = GraphView::from_edges(4, [(0, 1), (0, 2), (1, 2)], Orientation::Natural);
        let run = pagerank_run(&view, 1, 0.5).unwrap();
        assert_eq!(run.iterations, 1);
        let expected = [0.1875, 0.25, 0.375, 0.1875];
        for (s, e) in run.scores.iter().zip(expected) {
            assert!((s - e).abs() < 1e-15, "{s} vs {e}");
        }
    }

    #[test]
    fn pagerank_rejects_bad_parameters_and_handles_empty() {
        let view = GraphView::from_edges(2, [(0, 1)], Orientation::Natural);
        assert!(pagerank(&view, 0, 0.85).is_err());
        assert!(pagerank(&view, 10, 1.0).is_err());
        assert!(pagerank(&view, 10, 0.0).is_err());
        let empty = GraphView::from_edges(0, [], Orientation::Natural);
        assert!(pagerank(&empty, 10, 0.85).unwrap().is_empty());
        assert!(label_propagation(&empty, 10).unwrap().is_empty());
    }

    #[test]
    fn two_triangles_give_two_communities() {
        let view = GraphView::from_edges(
            6,
            [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)],
            Orientation::Undirected,
        );
        let run = label_propagation_run(&view, 20).unwrap();
        assert!(run.converged);
        assert_eq!(run.labels, vec![2, 2, 2, 5, 5, 5]);
    }

    #[test]
    fn single_node_keeps_its_label() {
        let view = GraphView::from_edges(1, [], Orientation::Undirected);
        assert_eq!(label_propagation(&view, 5).unwrap(), vec![(NodeId(0), NodeId(0))]);
    }

    #[test]
    fn isolated_edge_settles() {
        let view = GraphView::from_edges(2, [(0, 1)], Orientation::Undirected);
        let run = label_propagation_run(&view, 20).unwrap();
        assert!(run.converged);
        assert_eq!(run.labels, vec![1, 1]);
    }

    #[test]
    fn degree_counts_both_directions_once() {
        let mut g = PropertyGraph::new();
        let a = g.add_node("A", Properties::new());
        let b = g.add_node("A", Properties::new());
        let c = g.add_node("A", Properties::new());
        let _lonely = g.add_node("A", Properties::new());
        for (s, t) in [(a, b), (c, a), (a, a)] {
            g.add_relationship("T", s, t, Properties::new()).unwrap();
        }
        g.add_relationship("U", b, c, Properties::new()).unwrap();
        let table = degree_centrality(&g, "A", "T");
        assert_eq!(
            table.rows,
            vec![
                vec![Value::Int(0), Value::Int(3)],
                vec![Value::Int(1), Value::Int(1)],
                vec![Value::Int(2), Value::Int(1)],
            ]
        );
        assert!(degree_centrality(&g, "A", "NONE").rows.is_empty());
    }
}
