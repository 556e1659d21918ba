//! Query plans for the supported Cypher subset.
//!
//! A plan is a linear pipeline. `Display` renders a plan back to Cypher
//! that parses to an equal plan.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub ops: Vec<PlanOp>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOp {
    NodeScan(NodePattern),
    PathMatch(PathPattern),
    /// `WITH` clause: group by the non-count items, bind aliases.
    Aggregate(Vec<ReturnItem>),
    /// `RETURN` clause; groups implicitly when a `count` is present.
    Project(Vec<ReturnItem>),
    OrderLimit(OrderLimit),
    ProcedureCall(ProcedureCall),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodePattern {
    pub var: Option<String>,
    pub label: Option<String>,
    pub properties: Vec<(String, Literal)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub start: NodePattern,
    pub hops: Vec<Hop>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub rel: RelPattern,
    pub node: NodePattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Outgoing,
    Either,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelPattern {
    pub var: Option<String>,
    pub rel_type: Option<String>,
    pub variable_length: bool,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Int(i64),
    Float(f64),
    Map(Vec<(String, Literal)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Variable(String),
    Property {
        var: String,
        key: String,
    },
    Id(String),
    /// `count(*)` when `None`.
    Count(Option<String>),
    /// `gds.util.asNode(var).key`
    AsNodeProperty {
        var: String,
        key: String,
    },
}

impl Expr {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, Expr::Count(_))
    }

    /// Variables the expression reads.
    pub fn variable(&self) -> Option<&str> {
        match self {
            Expr::Variable(v) | Expr::Property { var: v, .. } | Expr::Id(v) | Expr::AsNodeProperty { var: v, .. } => {
                Some(v)
            }
            Expr::Count(v) => v.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl ReturnItem {
    /// Result column name: the alias, else the expression text.
    pub fn column_name(&self) -> String {
        self.alias.clone().unwrap_or_else(|| self.expr.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortDirection {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderLimit {
    pub order: Option<(Expr, SortDirection)>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Orientation {
    Natural,
    Undirected,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Natural => "NATURAL",
            Orientation::Undirected => "UNDIRECTED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "NATURAL" => Some(Orientation::Natural),
            "UNDIRECTED" => Some(Orientation::Undirected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgoConfig {
    pub write_property: Option<String>,
    pub max_iterations: Option<i64>,
    pub damping_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Procedure {
    GraphCreate {
        graph: String,
        label: String,
        rel_type: String,
        orientation: Orientation,
    },
    GraphCreateEstimate {
        label: String,
        rel_type: String,
        orientation: Orientation,
    },
    PageRankEstimate {
        graph: String,
        config: AlgoConfig,
    },
    PageRankStream {
        graph: String,
        config: Option<AlgoConfig>,
    },
    LabelPropagationEstimate {
        graph: String,
        config: AlgoConfig,
    },
    LabelPropagationStream {
        graph: String,
        config: Option<AlgoConfig>,
    },
}

pub(crate) const ESTIMATE_COLUMNS: &[&str] = &[
    "nodeCount",
    "relationshipCount",
    "bytesMin",
    "bytesMax",
    "requiredMemory",
];

impl Procedure {
    pub fn name(&self) -> &'static str {
        match self {
            Procedure::GraphCreate { .. } => "gds.graph.create",
            Procedure::GraphCreateEstimate { .. } => "gds.graph.create.estimate",
            Procedure::PageRankEstimate { .. } => "gds.pageRank.write.estimate",
            Procedure::PageRankStream { .. } => "gds.pageRank.stream",
            Procedure::LabelPropagationEstimate { .. } => "gds.labelPropagation.write.estimate",
            Procedure::LabelPropagationStream { .. } => "gds.labelPropagation.stream",
        }
    }

    pub fn output_columns(&self) -> &'static [&'static str] {
        match self {
            Procedure::GraphCreate { .. } => &["graphName", "nodeCount", "relationshipCount"],
            Procedure::PageRankStream { .. } => &["nodeId", "score"],
            Procedure::LabelPropagationStream { .. } => &["nodeId", "communityId"],
            _ => ESTIMATE_COLUMNS,
        }
    }

    pub fn is_estimate(&self) -> bool {
        matches!(
            self,
            Procedure::GraphCreateEstimate { .. }
                | Procedure::PageRankEstimate { .. }
                | Procedure::LabelPropagationEstimate { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureCall {
    pub procedure: Procedure,
    /// `None` when the statement has no YIELD (all outputs are returned).
    pub yields: Option<Vec<String>>,
}

/// Formats a float with at least two decimals (`0.6` -> `0.60`,
/// `0.125` -> `0.125`), the way generated scripts spell damping factors.
pub fn format_float(x: f64) -> String {
    let plain = format!("{x}");
    match plain.split_once('.') {
        None => format!("{plain}.00"),
        Some((_, frac)) if frac.len() < 2 => format!("{plain}{}", "0".repeat(2 - frac.len())),
        Some(_) => plain,
    }
}

/// Single-quoted Cypher string literal.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => f.write_str(&quote(s)),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(x) => f.write_str(&format_float(*x)),
            Literal::Map(entries) => {
                f.write_char('{')?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_char('}')
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Variable(v) => f.write_str(v),
            Expr::Property { var, key } => write!(f, "{var}.{key}"),
            Expr::Id(v) => write!(f, "id({v})"),
            Expr::Count(None) => f.write_str("count(*)"),
            Expr::Count(Some(v)) => write!(f, "count({v})"),
            Expr::AsNodeProperty { var, key } => write!(f, "gds.util.asNode({var}).{key}"),
        }
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        if let Some(v) = &self.var {
            f.write_str(v)?;
        }
        if let Some(l) = &self.label {
            write!(f, ":{l}")?;
        }
        if !self.properties.is_empty() {
            if self.var.is_some() || self.label.is_some() {
                f.write_char(' ')?;
            }
            write!(f, "{}", Literal::Map(self.properties.clone()))?;
        }
        f.write_char(')')
    }
}

impl fmt::Display for RelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("-[")?;
        if let Some(v) = &self.var {
            f.write_str(v)?;
        }
        if let Some(t) = &self.rel_type {
            write!(f, ":{t}")?;
        }
        if self.variable_length {
            f.write_char('*')?;
        }
        f.write_str("]-")?;
        if self.direction == Direction::Outgoing {
            f.write_char('>')?;
        }
        Ok(())
    }
}

fn write_items(f: &mut fmt::Formatter<'_>, items: &[ReturnItem]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}", item.expr)?;
        if let Some(a) = &item.alias {
            write!(f, " AS {a}")?;
        }
    }
    Ok(())
}

fn config_literal(config: &AlgoConfig) -> Literal {
    let mut entries = Vec::new();
    if let Some(w) = &config.write_property {
        entries.push(("writeProperty".to_string(), Literal::Str(w.clone())));
    }
    if let Some(m) = config.max_iterations {
        entries.push(("maxIterations".to_string(), Literal::Int(m)));
    }
    if let Some(d) = config.damping_factor {
        entries.push(("dampingFactor".to_string(), Literal::Float(d)));
    }
    Literal::Map(entries)
}

fn projection_literal(rel_type: &str, orientation: Orientation) -> Literal {
    Literal::Map(vec![(
        rel_type.to_string(),
        Literal::Map(vec![(
            "orientation".to_string(),
            Literal::Str(orientation.as_str().to_string()),
        )]),
    )])
}

impl Procedure {
    pub fn args(&self) -> Vec<Literal> {
        let s = |x: &str| Literal::Str(x.to_string());
        match self {
            Procedure::GraphCreate {
                graph,
                label,
                rel_type,
                orientation,
            } => vec![s(graph), s(label), projection_literal(rel_type, *orientation)],
            Procedure::GraphCreateEstimate {
                label,
                rel_type,
                orientation,
            } => vec![s(label), projection_literal(rel_type, *orientation)],
            Procedure::PageRankEstimate { graph, config } | Procedure::LabelPropagationEstimate { graph, config } => {
                vec![s(graph), config_literal(config)]
            }
            Procedure::PageRankStream { graph, config } | Procedure::LabelPropagationStream { graph, config } => {
                let mut args = vec![s(graph)];
                if let Some(c) = config {
                    args.push(config_literal(c));
                }
                args
            }
        }
    }
}

impl fmt::Display for QueryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            match op {
                PlanOp::NodeScan(node) => write!(f, "MATCH {node}")?,
                PlanOp::PathMatch(path) => {
                    write!(f, "MATCH {}", path.start)?;
                    for hop in &path.hops {
                        write!(f, "{}{}", hop.rel, hop.node)?;
                    }
                }
                PlanOp::Aggregate(items) => {
                    f.write_str("WITH ")?;
                    write_items(f, items)?;
                }
                PlanOp::Project(items) => {
                    f.write_str("RETURN ")?;
                    write_items(f, items)?;
                }
                PlanOp::OrderLimit(ol) => {
                    if let Some((key, dir)) = &ol.order {
                        write!(f, "ORDER BY {key}")?;
                        if *dir == SortDirection::Descending {
                            f.write_str(" DESC")?;
                        }
                    }
                    if let Some(n) = ol.limit {
                        if ol.order.is_some() {
                            f.write_char(' ')?;
                        }
                        write!(f, "LIMIT {n}")?;
                    }
                }
                PlanOp::ProcedureCall(call) => {
                    write!(f, "CALL {}(", call.procedure.name())?;
                    for (j, arg) in call.procedure.args().iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{arg}")?;
                    }
                    f.write_char(')')?;
                    if let Some(yields) = &call.yields {
                        write!(f, " YIELD {}", yields.join(", "))?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_keeps_two_decimals() {
        assert_eq!(format_float(0.6), "0.60");
        assert_eq!(format_float(0.85), "0.85");
        assert_eq!(format_float(0.125), "0.125");
        assert_eq!(format_float(1.0), "1.00");
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(quote("it's"), r"'it\'s'");
        assert_eq!(quote("a\\b"), r"'a\\b'");
    }
}
