use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::algo::{label_propagation, pagerank};
use super::cypher::{parse_cypher, split_statements, CypherSubsetError};
use super::plan::*;
use super::view::{estimate_memory, GraphView, MemoryEstimate, ViewCatalog};
use super::{
    ExecError, ResultTable, DEFAULT_DAMPING_FACTOR, DEFAULT_LABEL_PROPAGATION_ITERATIONS, DEFAULT_PAGERANK_ITERATIONS,
    MAX_PATH_LENGTH,
};
use crate::graph::{Node, NodeId, PropertyGraph, RelId, Value};

#[derive(Debug, Clone)]
enum Binding {
    Node(NodeId),
    Rel(RelId),
    Value(Value),
}

/// Hashable image of a binding, for grouping.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Node(usize),
    Rel(usize),
    Null,
    Int(i64),
    Float(u64),
    Str(String),
}

impl From<&Binding> for Key {
    fn from(b: &Binding) -> Self {
        match b {
            Binding::Node(n) => Key::Node(n.0),
            Binding::Rel(r) => Key::Rel(r.0),
            Binding::Value(Value::Null) => Key::Null,
            Binding::Value(Value::Int(i)) => Key::Int(*i),
            Binding::Value(Value::Float(x)) => Key::Float(x.to_bits()),
            Binding::Value(Value::Str(s)) => Key::Str(s.clone()),
        }
    }
}

struct Frame {
    columns: Vec<String>,
    rows: Vec<Vec<Binding>>,
}

impl Frame {
    fn slot(&self, var: &str) -> usize {
        self.columns
            .iter()
            .position(|c| c == var)
            .expect("parser guarantees variables are bound")
    }
}

fn literal_value(lit: &Literal) -> Value {
    match lit {
        Literal::Str(s) => Value::Str(s.clone()),
        Literal::Int(i) => Value::Int(*i),
        Literal::Float(x) => Value::Float(*x),
        Literal::Map(_) => Value::Null,
    }
}

fn node_matches(node: &Node, pattern: &NodePattern) -> bool {
    pattern.label.as_ref().is_none_or(|l| *l == node.label)
        && pattern
            .properties
            .iter()
            .all(|(k, lit)| node.properties.get(k).is_some_and(|v| v.matches(&literal_value(lit))))
}

fn node_text(node: &Node) -> String {
    let props: Vec<String> = node
        .properties
        .iter()
        .map(|(k, v)| match v {
            Value::Str(s) => format!("{k}: {}", quote(s)),
            other => format!("{k}: {other}"),
        })
        .collect();
    format!("(:{} {{{}}})", node.label, props.join(", "))
}

struct Executor<'a> {
    graph: &'a PropertyGraph,
    views: &'a ViewCatalog,
}

impl Executor<'_> {
    fn to_value(&self, b: &Binding) -> Value {
        match b {
            Binding::Node(n) => Value::Str(node_text(&self.graph.nodes()[n.0])),
            Binding::Rel(r) => Value::Str(format!("[:{}]", self.graph.relationships()[r.0].rel_type)),
            Binding::Value(v) => v.clone(),
        }
    }

    fn eval(&self, expr: &Expr, frame: &Frame, row: &[Binding]) -> Binding {
        match expr {
            Expr::Variable(v) => row[frame.slot(v)].clone(),
            Expr::Property { var, key } => {
                let props = match &row[frame.slot(var)] {
                    Binding::Node(n) => &self.graph.nodes()[n.0].properties,
                    Binding::Rel(r) => &self.graph.relationships()[r.0].properties,
                    Binding::Value(_) => return Binding::Value(Value::Null),
                };
                Binding::Value(props.get(key).cloned().unwrap_or(Value::Null))
            }
            Expr::Id(var) => Binding::Value(match &row[frame.slot(var)] {
                Binding::Node(n) => Value::Int(n.0 as i64),
                Binding::Rel(r) => Value::Int(r.0 as i64),
                Binding::Value(_) => Value::Null,
            }),
            Expr::AsNodeProperty { var, key } => {
                let node = match &row[frame.slot(var)] {
                    Binding::Value(Value::Int(i)) if *i >= 0 => self.graph.node(NodeId(*i as usize)),
                    Binding::Node(n) => self.graph.node(*n),
                    _ => None,
                };
                Binding::Value(node.and_then(|n| n.properties.get(key).cloned()).unwrap_or(Value::Null))
            }
            Expr::Count(_) => unreachable!("aggregates are evaluated by group"),
        }
    }

    fn candidates(&self, pattern: &NodePattern) -> Vec<NodeId> {
        let pool: Box<dyn Iterator<Item = NodeId>> = match &pattern.label {
            Some(l) => Box::new(self.graph.nodes_with_label(l).iter().copied()),
            None => Box::new((0..self.graph.node_count()).map(NodeId)),
        };
        pool.filter(|n| node_matches(&self.graph.nodes()[n.0], pattern))
            .collect()
    }

    /// Neighbours reachable over one relationship, each relationship once.
    fn step(&self, from: NodeId, rel: &RelPattern) -> Vec<(RelId, NodeId)> {
        let rels = self.graph.relationships();
        let type_ok = |r: &RelId| rel.rel_type.as_ref().is_none_or(|t| *t == rels[r.0].rel_type);
        let mut out: Vec<(RelId, NodeId)> = self
            .graph
            .outgoing(from)
            .iter()
            .filter(|r| type_ok(r))
            .map(|r| (*r, rels[r.0].target))
            .collect();
        if rel.direction == Direction::Either {
            out.extend(
                self.graph
                    .incoming(from)
                    .iter()
                    .filter(|r| type_ok(r) && rels[r.0].source != rels[r.0].target)
                    .map(|r| (*r, rels[r.0].source)),
            );
        }
        out
    }

    /// End nodes of every path of length 1..=MAX_PATH_LENGTH from `from`
    /// that visits no node twice; one entry per path.
    fn variable_length(&self, from: NodeId, rel: &RelPattern) -> Vec<NodeId> {
        let mut ends = Vec::new();
        let mut path = vec![from];
        self.walk(&mut path, rel, &mut ends);
        ends
    }

    fn walk(&self, path: &mut Vec<NodeId>, rel: &RelPattern, ends: &mut Vec<NodeId>) {
        let here = *path.last().expect("non-empty path");
        for (_, next) in self.step(here, rel) {
            if path.contains(&next) {
                continue;
            }
            ends.push(next);
            if path.len() < MAX_PATH_LENGTH {
                path.push(next);
                self.walk(path, rel, ends);
                path.pop();
            }
        }
    }

    fn path_match(&self, path: &PathPattern) -> Frame {
        // column layout: first occurrence of each variable owns a slot
        let mut columns: Vec<String> = Vec::new();
        let mut slot_of = |var: &Option<String>| -> Option<(usize, bool)> {
            let v = var.as_ref()?;
            match columns.iter().position(|c| c == v) {
                Some(i) => Some((i, false)),
                None => {
                    columns.push(v.clone());
                    Some((columns.len() - 1, true))
                }
            }
        };
        let start_slot = slot_of(&path.start.var);
        let hop_slots: Vec<_> = path
            .hops
            .iter()
            .map(|h| (slot_of(&h.rel.var), slot_of(&h.node.var)))
            .collect();
        let width = columns.len();

        fn bind(row: &mut [Binding], slot: Option<(usize, bool)>, value: Binding) -> bool {
            match slot {
                None => true,
                Some((i, true)) => {
                    row[i] = value;
                    true
                }
                Some((i, false)) => Key::from(&row[i]) == Key::from(&value),
            }
        }

        let mut states: Vec<(Vec<Binding>, NodeId)> = Vec::new();
        for n in self.candidates(&path.start) {
            let mut row = vec![Binding::Value(Value::Null); width];
            if bind(&mut row, start_slot, Binding::Node(n)) {
                states.push((row, n));
            }
        }
        for (hop, (rel_slot, node_slot)) in path.hops.iter().zip(hop_slots) {
            let mut next_states = Vec::new();
            for (row, at) in states {
                let steps: Vec<(Option<RelId>, NodeId)> = if hop.rel.variable_length {
                    self.variable_length(at, &hop.rel)
                        .into_iter()
                        .map(|n| (None, n))
                        .collect()
                } else {
                    self.step(at, &hop.rel).into_iter().map(|(r, n)| (Some(r), n)).collect()
                };
                for (rel, node) in steps {
                    if !node_matches(&self.graph.nodes()[node.0], &hop.node) {
                        continue;
                    }
                    let mut row = row.clone();
                    let rel_ok = match rel {
                        Some(r) => bind(&mut row, rel_slot, Binding::Rel(r)),
                        None => true,
                    };
                    if rel_ok && bind(&mut row, node_slot, Binding::Node(node)) {
                        next_states.push((row, node));
                    }
                }
            }
            states = next_states;
        }
        Frame {
            columns,
            rows: states.into_iter().map(|(row, _)| row).collect(),
        }
    }

    /// Evaluates a WITH/RETURN item list; groups by the non-count items
    /// (first-appearance order) when any item is a count.
    fn project(&self, frame: &Frame, items: &[ReturnItem]) -> Frame {
        let columns: Vec<String> = items.iter().map(ReturnItem::column_name).collect();
        if !items.iter().any(|i| i.expr.is_aggregate()) {
            let rows = frame
                .rows
                .iter()
                .map(|row| items.iter().map(|i| self.eval(&i.expr, frame, row)).collect())
                .collect();
            return Frame { columns, rows };
        }
        let mut index: HashMap<Vec<Key>, usize> = HashMap::new();
        let mut groups: Vec<(Vec<Binding>, Vec<i64>)> = Vec::new();
        let n_counts = items.iter().filter(|i| i.expr.is_aggregate()).count();
        for row in &frame.rows {
            let keys: Vec<Binding> = items
                .iter()
                .filter(|i| !i.expr.is_aggregate())
                .map(|i| self.eval(&i.expr, frame, row))
                .collect();
            let hashed: Vec<Key> = keys.iter().map(Key::from).collect();
            let g = *index.entry(hashed).or_insert_with(|| {
                groups.push((keys, vec![0; n_counts]));
                groups.len() - 1
            });
            let counts = &mut groups[g].1;
            for (c, item) in items.iter().filter(|i| i.expr.is_aggregate()).enumerate() {
                let counted = match &item.expr {
                    Expr::Count(None) => true,
                    Expr::Count(Some(v)) => !matches!(row[frame.slot(v)], Binding::Value(Value::Null)),
                    _ => unreachable!(),
                };
                if counted {
                    counts[c] += 1;
                }
            }
        }
        if groups.is_empty() && n_counts == items.len() {
            groups.push((Vec::new(), vec![0; n_counts]));
        }
        let rows = groups
            .into_iter()
            .map(|(keys, counts)| {
                let mut keys = keys.into_iter();
                let mut counts = counts.into_iter();
                items
                    .iter()
                    .map(|i| {
                        if i.expr.is_aggregate() {
                            Binding::Value(Value::Int(counts.next().expect("one per count")))
                        } else {
                            keys.next().expect("one per key")
                        }
                    })
                    .collect()
            })
            .collect();
        Frame { columns, rows }
    }

    fn view(&self, graph: &str) -> Result<std::sync::Arc<GraphView>, ExecError> {
        self.views.get(graph)
    }

    fn call(&self, call: &ProcedureCall) -> Result<(Frame, Option<MemoryEstimate>), ExecError> {
        fn estimate_row(e: &MemoryEstimate) -> Vec<Value> {
            vec![
                Value::Int(e.node_count as i64),
                Value::Int(e.relationship_count as i64),
                Value::Int(e.bytes_min as i64),
                Value::Int(e.bytes_max as i64),
                Value::Str(e.required_memory.clone()),
            ]
        }
        fn check(config: &AlgoConfig) -> Result<(), ExecError> {
            if let Some(m) = config.max_iterations {
                if m < 1 {
                    return Err(ExecError::InvalidParameter(format!(
                        "maxIterations must be at least 1, got {m}"
                    )));
                }
            }
            if let Some(d) = config.damping_factor {
                if !(d > 0.0 && d < 1.0) {
                    return Err(ExecError::InvalidParameter(format!(
                        "dampingFactor must be in (0, 1), got {d}"
                    )));
                }
            }
            Ok(())
        }

        let mut estimate = None;
        let rows: Vec<Vec<Value>> = match &call.procedure {
            Procedure::GraphCreate {
                graph,
                label,
                rel_type,
                orientation,
            } => {
                let view = self
                    .views
                    .create_view(graph, label, rel_type, *orientation, self.graph)?;
                vec![vec![
                    Value::Str(graph.clone()),
                    Value::Int(view.node_count() as i64),
                    Value::Int(view.relationship_count() as i64),
                ]]
            }
            Procedure::GraphCreateEstimate {
                label,
                rel_type,
                orientation,
            } => {
                let view = GraphView::project("", self.graph, label, rel_type, *orientation)?;
                let e = estimate_memory(&view);
                let row = estimate_row(&e);
                estimate = Some(e);
                vec![row]
            }
            Procedure::PageRankEstimate { graph, config } | Procedure::LabelPropagationEstimate { graph, config } => {
                check(config)?;
                let e = estimate_memory(&*self.view(graph)?);
                let row = estimate_row(&e);
                estimate = Some(e);
                vec![row]
            }
            Procedure::PageRankStream { graph, config } => {
                let config = config.clone().unwrap_or_default();
                check(&config)?;
                let view = self.view(graph)?;
                pagerank(
                    &view,
                    config.max_iterations.unwrap_or(DEFAULT_PAGERANK_ITERATIONS),
                    config.damping_factor.unwrap_or(DEFAULT_DAMPING_FACTOR),
                )?
                .into_iter()
                .map(|(n, s)| vec![Value::Int(n.0 as i64), Value::Float(s)])
                .collect()
            }
            Procedure::LabelPropagationStream { graph, config } => {
                let config = config.clone().unwrap_or_default();
                check(&config)?;
                let view = self.view(graph)?;
                label_propagation(
                    &view,
                    config.max_iterations.unwrap_or(DEFAULT_LABEL_PROPAGATION_ITERATIONS),
                )?
                .into_iter()
                .map(|(n, c)| vec![Value::Int(n.0 as i64), Value::Int(c.0 as i64)])
                .collect()
            }
        };
        let outputs = call.procedure.output_columns();
        let selected: Vec<usize> = match &call.yields {
            Some(cols) => cols
                .iter()
                .map(|c| outputs.iter().position(|o| o == c).expect("validated by parser"))
                .collect(),
            None => (0..outputs.len()).collect(),
        };
        let frame = Frame {
            columns: selected.iter().map(|&i| outputs[i].to_string()).collect(),
            rows: rows
                .into_iter()
                .map(|row| selected.iter().map(|&i| Binding::Value(row[i].clone())).collect())
                .collect(),
        };
        Ok((frame, estimate))
    }

    fn to_table(&self, frame: Frame) -> ResultTable {
        let mut table = ResultTable::new(frame.columns);
        for row in frame.rows {
            let row = row.iter().map(|b| self.to_value(b)).collect();
            table.push_row(row);
        }
        table
    }

    fn run(&self, plan: &QueryPlan) -> Result<(ResultTable, Option<MemoryEstimate>), ExecError> {
        let mut frame = Frame {
            columns: Vec::new(),
            rows: Vec::new(),
        };
        let mut table: Option<ResultTable> = None;
        let mut estimate = None;
        for op in &plan.ops {
            match op {
                PlanOp::NodeScan(pattern) => {
                    frame = self.path_match(&PathPattern {
                        start: pattern.clone(),
                        hops: Vec::new(),
                    })
                }
                PlanOp::PathMatch(path) => frame = self.path_match(path),
                PlanOp::ProcedureCall(call) => {
                    let (f, e) = self.call(call)?;
                    frame = f;
                    estimate = e;
                }
                PlanOp::Aggregate(items) => frame = self.project(&frame, items),
                PlanOp::Project(items) => {
                    let projected = self.project(&frame, items);
                    table = Some(self.to_table(projected));
                    frame = Frame {
                        columns: Vec::new(),
                        rows: Vec::new(),
                    };
                }
                PlanOp::OrderLimit(ol) => {
                    let t = table.as_mut().expect("parser puts ORDER BY after RETURN");
                    if let Some((key, dir)) = &ol.order {
                        let name = key.to_string();
                        let i = t.column_index(&name).ok_or(ExecError::UnknownColumn(name))?;
                        match dir {
                            SortDirection::Ascending => t.rows.sort_by(|a, b| a[i].sort_cmp(&b[i])),
                            SortDirection::Descending => t.rows.sort_by(|a, b| b[i].sort_cmp(&a[i])),
                        }
                    }
                    if let Some(n) = ol.limit {
                        t.rows.truncate(n);
                    }
                }
            }
        }
        let table = match table {
            Some(t) => t,
            None => self.to_table(frame),
        };
        Ok((table, estimate))
    }
}

/// Runs one plan. Unknown labels, types and properties simply match
/// nothing; only view problems and bad parameters are errors.
pub fn execute(plan: &QueryPlan, graph: &PropertyGraph, views: &ViewCatalog) -> Result<ResultTable, ExecError> {
    execute_statement(plan, graph, views).map(|(t, _)| t)
}

/// Like [`execute`], also returning the estimate an estimate procedure
/// produced.
pub fn execute_statement(
    plan: &QueryPlan,
    graph: &PropertyGraph,
    views: &ViewCatalog,
) -> Result<(ResultTable, Option<MemoryEstimate>), ExecError> {
    Executor { graph, views }.run(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementEstimate {
    pub statement_index: usize,
    pub estimate: MemoryEstimate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptOutcome {
    /// Result of the last statement that ran.
    pub table: ResultTable,
    pub estimates: Vec<StatementEstimate>,
    /// Indices of `gds.graph.create` statements skipped because the view
    /// already existed.
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScriptError {
    #[error("statement {statement_index}: {source}")]
    Parse {
        statement_index: usize,
        #[source]
        source: CypherSubsetError,
    },
    #[error("statement {statement_index}: {source}")]
    Exec {
        statement_index: usize,
        #[source]
        source: ExecError,
    },
}

impl ScriptError {
    pub fn statement_index(&self) -> usize {
        match self {
            ScriptError::Parse { statement_index, .. } | ScriptError::Exec { statement_index, .. } => *statement_index,
        }
    }
}

/// Parses and runs every `;`-separated statement in order.
///
/// With `reuse_views`, a `gds.graph.create` naming a view that already
/// exists is skipped instead of failing.
pub fn run_script(
    script: &str,
    graph: &PropertyGraph,
    views: &ViewCatalog,
    reuse_views: bool,
) -> Result<ScriptOutcome, ScriptError> {
    let statements = split_statements(script);
    if statements.is_empty() {
        return Err(ScriptError::Parse {
            statement_index: 0,
            source: CypherSubsetError {
                message: "empty script".into(),
                span: (0, script.len()),
            },
        });
    }
    let plans = statements
        .iter()
        .enumerate()
        .map(|(i, s)| {
            parse_cypher(s).map_err(|source| ScriptError::Parse {
                statement_index: i,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut outcome = ScriptOutcome::default();
    for (i, plan) in plans.iter().enumerate() {
        if let [PlanOp::ProcedureCall(ProcedureCall {
            procedure: Procedure::GraphCreate { graph: name, .. },
            ..
        })] = plan.ops.as_slice()
        {
            if reuse_views && views.contains(name) {
                outcome.skipped.push(i);
                continue;
            }
        }
        let (table, estimate) = execute_statement(plan, graph, views).map_err(|source| ScriptError::Exec {
            statement_index: i,
            source,
        })?;
        if let Some(estimate) = estimate {
            outcome.estimates.push(StatementEstimate {
                statement_index: i,
                estimate,
            });
        }
        outcome.table = table;
    }
    Ok(outcome)
}
