//! Independent reference computations used by the integration and
//! acceptance tests. Nothing here calls into the engine's algorithms.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use nlds_core::graph::{Properties, PropertyGraph, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random multigraph: `n` nodes split between labels `A` and `B`, `m`
/// relationships of types `T` and `U` with random endpoints (self-loops
/// and parallel edges allowed).
pub fn random_graph(seed: u64, n: usize, m: usize) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PropertyGraph::new();
    let mut ids = Vec::new();
    for i in 0..n {
        let label = if rng.gen_bool(0.75) { "A" } else { "B" };
        let mut props = Properties::new();
        props.insert("NAME".into(), Value::from(format!("node{i}")));
        ids.push(g.add_node(label, props));
    }
    if n > 0 {
        for _ in 0..m {
            let s = ids[rng.gen_range(0..n)];
            let t = ids[rng.gen_range(0..n)];
            let ty = if rng.gen_bool(0.8) { "T" } else { "U" };
            g.add_relationship(ty, s, t, Properties::new()).unwrap();
        }
    }
    g
}

/// Dense member index of every `label` node (in id order) and the
/// `rel_type` edges between members, read straight off the graph.
pub fn projected_edges(g: &PropertyGraph, label: &str, rel_type: &str) -> (Vec<usize>, Vec<(usize, usize)>) {
    let members: Vec<usize> = g.nodes().iter().filter(|n| n.label == label).map(|n| n.id.0).collect();
    let index: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let edges = g
        .relationships()
        .iter()
        .filter(|r| r.rel_type == rel_type)
        .filter_map(|r| Some((*index.get(&r.source.0)?, *index.get(&r.target.0)?)))
        .collect();
    (members, edges)
}

/// Stationary PageRank by dense power iteration on the Google matrix
/// `G = d (M + D) + (1 - d)/n J`, where `M[v][u] = mult(u->v)/outdeg(u)`
/// and dangling columns `D` spread uniformly. Iterates until the change
/// is below 1e-15 (or 100k steps).
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], damping: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let mut out_degree = vec![0usize; n];
    for &(s, _) in edges {
        out_degree[s] += 1;
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for &(s, t) in edges {
        m[(t, s)] += 1.0 / out_degree[s] as f64;
    }
    for u in 0..n {
        if out_degree[u] == 0 {
            for v in 0..n {
                m[(v, u)] = 1.0 / nf;
            }
        }
    }
    let google = m * damping + DMatrix::from_element(n, n, (1.0 - damping) / nf);
    let mut x = DVector::from_element(n, 1.0 / nf);
    for _ in 0..100_000 {
        let next = &google * &x;
        let delta = (&next - &x).abs().max();
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    x.iter().copied().collect()
}

/// `(node id, degree)` for `label` nodes with at least one incident
/// `rel_type` relationship, by scanning every relationship per node.
/// A self-loop counts once. Sorted by degree descending, then id.
pub fn brute_force_degree(g: &PropertyGraph, label: &str, rel_type: &str) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = g
        .nodes()
        .iter()
        .filter(|n| n.label == label)
        .map(|n| {
            let degree = g
                .relationships()
                .iter()
                .filter(|r| r.rel_type == rel_type && (r.source == n.id || r.target == n.id))
                .count();
            (n.id.0 as i64, degree as i64)
        })
        .filter(|(_, d)| *d > 0)
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Rows of `file` whose `column` equals `value`, counted with a plain CSV
/// reader.
pub fn csv_count(file: &Path, column: &str, value: &str) -> usize {
    let mut reader = csv::Reader::from_path(file).unwrap();
    let headers = reader.headers().unwrap().clone();
    let idx = headers.iter().position(|h| h == column).unwrap();
    reader
        .records()
        .filter(|r| r.as_ref().unwrap().get(idx) == Some(value))
        .count()
}

const CYPHER_KEYWORDS: &[&str] = &[
    "match", "return", "with", "as", "order", "by", "desc", "asc", "limit", "call", "yield", "count", "id",
];

/// Cypher text with whitespace outside string literals removed, curly
/// quotes straightened and keywords lowercased, for comparing scripts
/// "modulo whitespace and keyword case".
pub fn normalize_cypher(text: &str) -> String {
    let text: String = text
        .chars()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' => '\'',
            other => other,
        })
        .collect();
    let mut out = String::new();
    let mut word = String::new();
    let mut in_quote = false;
    let flush = |word: &mut String, out: &mut String| {
        if CYPHER_KEYWORDS.contains(&word.to_lowercase().as_str()) {
            out.push_str(&word.to_lowercase());
        } else {
            out.push_str(word);
        }
        word.clear();
    };
    for c in text.chars() {
        if in_quote {
            out.push(c);
            if c == '\'' {
                in_quote = false;
            }
        } else if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            if c == '\'' {
                in_quote = true;
                out.push(c);
            } else if !c.is_whitespace() {
                out.push(c);
            }
        }
    }
    flush(&mut word, &mut out);
    out
}

/// Lowercases everything outside single- or double-quoted spans.
pub fn lowercase_outside_quotes(text: &str) -> String {
    let mut out = String::new();
    let mut quote: Option<char> = None;
    for c in text.chars() {
        match quote {
            Some(q) => {
                out.push(c);
                if c == q {
                    quote = None;
                }
            }
            None => {
                if c == '\'' || c == '"' {
                    quote = Some(c);
                    out.push(c);
                } else {
                    out.extend(c.to_lowercase());
                }
            }
        }
    }
    out
}
