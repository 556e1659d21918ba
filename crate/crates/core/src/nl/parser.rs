//! Backtracking parser over question tokens.
//!
//! Every production function returns all positions (with partial results)
//! it can reach, so optional segments and ambiguous readings need no
//! lookahead; a production is accepted when some branch consumes every
//! token.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{Condition, Production, QuestionAst};
use super::lexicon::{AlgorithmKind, Lexicon};
use super::token::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{message}")]
pub struct ParseError {
    pub message: String,
    /// Characters `[start, end)` of the longest prefix any production matched.
    pub span: (usize, usize),
    /// Productions that matched that prefix.
    pub productions: Vec<Production>,
}

struct RawValue {
    text: String,
    quoted: bool,
}

struct Parser<'a> {
    tokens: &'a [Token],
    lex: &'a Lexicon,
    production: Cell<Production>,
    reach: RefCell<BTreeMap<Production, usize>>,
}

const FIND: &[&str] = &["find", "get", "show", "list"];
const COPULA: &[&str] = &["is", "are", "equals"];
const ITERATIONS: &[&str] = &["iterations", "iteration"];

impl<'a> Parser<'a> {
    fn at(&self, i: usize) -> Option<&'a Token> {
        self.tokens.get(i)
    }

    fn done(&self, i: usize) -> bool {
        i == self.tokens.len()
    }

    fn mark(&self, end: usize) {
        let mut reach = self.reach.borrow_mut();
        let r = reach.entry(self.production.get()).or_insert(0);
        *r = (*r).max(end);
    }

    fn matched(&self, i: usize, kind: TokenKind) -> Option<&'a Token> {
        let t = self.at(i).filter(|t| t.kind == kind)?;
        self.mark(i + 1);
        Some(t)
    }

    fn kw(&self, i: usize, word: &str) -> Option<usize> {
        self.at(i)
            .filter(|t| t.kind == TokenKind::Keyword && t.normalized() == word)?;
        self.mark(i + 1);
        Some(i + 1)
    }

    fn kw_any(&self, i: usize, words: &[&str]) -> Option<usize> {
        words.iter().find_map(|w| self.kw(i, w))
    }

    fn kw_seq(&self, i: usize, words: &[&str]) -> Option<usize> {
        words.iter().try_fold(i, |p, w| self.kw(p, w))
    }

    /// `[word]`: positions with and without it.
    fn opt(&self, i: usize, word: &str) -> Vec<usize> {
        self.opt_any(i, &[word])
    }

    fn opt_any(&self, i: usize, words: &[&str]) -> Vec<usize> {
        let mut out = vec![i];
        out.extend(self.kw_any(i, words));
        out
    }

    fn resolved(&self, i: usize, kind: TokenKind) -> Option<(usize, String)> {
        let t = self.matched(i, kind)?;
        Some((i + 1, t.resolved.clone().expect("reference tokens are resolved")))
    }

    fn label(&self, i: usize) -> Option<(usize, String)> {
        self.resolved(i, TokenKind::LabelRef)
    }

    fn rel(&self, i: usize) -> Option<(usize, String)> {
        self.resolved(i, TokenKind::RelRef)
    }

    fn prop(&self, i: usize) -> Option<(usize, String)> {
        self.resolved(i, TokenKind::PropRef)
    }

    /// Property owned by `label`.
    fn prop_of(&self, i: usize, label: &str) -> Option<(usize, String)> {
        self.prop(i).filter(|(_, p)| self.lex.schema().has_property(label, p))
    }

    /// View or graph name: one plain word or value literal.
    fn name(&self, i: usize) -> Option<(usize, String)> {
        let t = self
            .matched(i, TokenKind::Word)
            .or_else(|| self.matched(i, TokenKind::ValueLiteral))?;
        Some((i + 1, t.text().to_string()))
    }

    fn int(&self, i: usize) -> Option<(usize, i64)> {
        let t = self.matched(i, TokenKind::NumberLiteral)?;
        Some((i + 1, t.surface.parse().ok()?))
    }

    fn float(&self, i: usize) -> Option<(usize, f64)> {
        let t = self.matched(i, TokenKind::FloatLiteral)?;
        Some((i + 1, t.surface.parse().ok()?))
    }

    /// A quoted literal, or any run of words, numbers and unquoted literals.
    fn value(&self, i: usize) -> Vec<(usize, RawValue)> {
        let mut out = Vec::new();
        if let Some(t) = self.at(i).filter(|t| t.is_quoted()) {
            self.mark(i + 1);
            out.push((
                i + 1,
                RawValue {
                    text: t.text().to_string(),
                    quoted: true,
                },
            ));
            return out;
        }
        let mut words: Vec<&str> = Vec::new();
        let mut j = i;
        while let Some(t) = self.at(j) {
            let plain = matches!(
                t.kind,
                TokenKind::Word | TokenKind::NumberLiteral | TokenKind::FloatLiteral
            ) || (t.kind == TokenKind::ValueLiteral && !t.is_quoted());
            if !plain {
                break;
            }
            words.push(&t.surface);
            j += 1;
            self.mark(j);
            out.push((
                j,
                RawValue {
                    text: words.join(" "),
                    quoted: false,
                },
            ));
        }
        out
    }

    fn resolve_value(&self, property: &str, raw: &RawValue) -> String {
        if raw.quoted {
            return raw.text.clone();
        }
        self.lex
            .value_synonym(property, &raw.text)
            .map_or_else(|| raw.text.clone(), str::to_string)
    }

    /// `[the] P [of [the] (P | L)] is V` with `P` a property of `label`.
    fn condition(&self, label: &str, i: usize) -> Vec<(usize, Condition)> {
        let mut out = Vec::new();
        for a in self.opt(i, "the") {
            let Some((b, property)) = self.prop_of(a, label) else {
                continue;
            };
            let mut mids = vec![b];
            if let Some(c) = self.kw(b, "of") {
                for d in self.opt(c, "the") {
                    if let Some((e, _)) = self.prop(d).or_else(|| self.label(d)) {
                        mids.push(e);
                    }
                }
            }
            for m in mids {
                let Some(n) = self.kw_any(m, COPULA) else {
                    continue;
                };
                for (e, raw) in self.value(n) {
                    out.push((e, Condition::new(&property, &self.resolve_value(&property, &raw))));
                }
            }
        }
        out
    }

    fn conditions(&self, label: &str, i: usize) -> Vec<(usize, Vec<Condition>)> {
        let mut out = Vec::new();
        for (e, first) in self.condition(label, i) {
            out.push((e, vec![first.clone()]));
            if let Some(a) = self.kw(e, "and") {
                for (f, rest) in self.conditions(label, a) {
                    let mut all = vec![first.clone()];
                    all.extend(rest);
                    out.push((f, all));
                }
            }
        }
        out
    }

    /// `[the] p of [the] L2 is V`
    fn target_condition(&self, i: usize) -> Vec<(usize, String, Condition)> {
        let mut out = Vec::new();
        for a in self.opt(i, "the") {
            let Some((b, property)) = self.prop(a) else {
                continue;
            };
            let Some(c) = self.kw(b, "of") else {
                continue;
            };
            for d in self.opt(c, "the") {
                let Some((e, label)) = self.label(d) else {
                    continue;
                };
                if !self.lex.schema().has_property(&label, &property) {
                    continue;
                }
                let Some(f) = self.kw_any(e, COPULA) else {
                    continue;
                };
                for (g, raw) in self.value(f) {
                    let value = self.resolve_value(&property, &raw);
                    out.push((g, label.clone(), Condition::new(&property, &value)));
                }
            }
        }
        out
    }

    fn target_conditions(&self, i: usize) -> Vec<(usize, String, Vec<Condition>)> {
        let mut out = Vec::new();
        for (e, label, first) in self.target_condition(i) {
            out.push((e, label.clone(), vec![first.clone()]));
            if let Some(a) = self.kw(e, "and") {
                for (f, other, rest) in self.target_conditions(a) {
                    if other == label {
                        let mut all = vec![first.clone()];
                        all.extend(rest);
                        out.push((f, label.clone(), all));
                    }
                }
            }
        }
        out
    }

    /// `[in the [name] (study | graph | database)]`
    fn scope(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        if let Some(j) = self.kw_seq(i, &["in", "the"]) {
            let mut starts = vec![j];
            starts.extend(self.name(j).map(|(k, _)| k));
            for s in starts {
                out.extend(self.kw_any(s, &["study", "graph", "database"]));
            }
        }
        out
    }

    /// Find verb and optional article.
    fn find_the(&self, i: usize) -> Vec<usize> {
        self.kw_any(i, FIND).map(|a| self.opt(a, "the")).unwrap_or_default()
    }

    /// Keyword-table phrase of the requested family at `i`.
    fn algorithm_keyword(&self, i: usize, community: bool) -> Option<(usize, String)> {
        let t = self.at(i).filter(|t| t.kind == TokenKind::Keyword)?;
        let phrase = t.normalized();
        let algos = self.lex.keyword_algorithms(&phrase)?;
        if algos.iter().all(|a| a.is_community()) != community {
            return None;
        }
        self.mark(i + 1);
        Some((i + 1, phrase))
    }

    /// `[word] (with | for | by | ... | who have) [the] [relation] (R | L2)`;
    /// a label `L2` stands for every relationship type joining it to `label`.
    fn relation_clause(&self, label: &str, i: usize) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        let mut starts = vec![i];
        if self.matched(i, TokenKind::Word).is_some() {
            starts.push(i + 1);
        }
        for s in starts {
            let mut connectors = Vec::new();
            connectors.extend(self.kw_any(s, &["with", "for", "by", "via", "through", "having"]));
            for w in ["who", "that"] {
                connectors.extend(self.kw(s, w).and_then(|j| self.kw_any(j, &["have", "has"])));
            }
            for c in connectors {
                for d in self.opt(c, "the") {
                    for e in self.opt_any(d, &["relation", "relationship"]) {
                        if let Some((f, rel)) = self.rel(e) {
                            out.push((f, rel));
                        }
                        if let Some((f, other)) = self.label(e) {
                            for rel in self.lex.schema().relationships_between(label, &other) {
                                out.push((f, rel.to_string()));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `[name]`, taken whenever present.
    fn named(&self, i: usize) -> Vec<(usize, Option<String>)> {
        match self.name(i) {
            Some((j, n)) => vec![(j, Some(n))],
            None => vec![(i, None)],
        }
    }

    /// `in the graph [name]`
    fn graph_clause(&self, i: usize) -> Vec<(usize, Option<String>)> {
        self.kw_seq(i, &["in", "the", "graph"])
            .map(|j| self.named(j))
            .unwrap_or_default()
    }

    /// `(within | in) the (view | graph) [name]`
    fn view_clause(&self, i: usize) -> Vec<(usize, Option<String>)> {
        self.kw_any(i, &["within", "in"])
            .and_then(|j| self.kw(j, "the"))
            .and_then(|j| self.kw_any(j, &["view", "graph"]))
            .map(|j| self.named(j))
            .unwrap_or_default()
    }

    fn iterations(&self, i: usize) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for a in self.opt_any(i, &["with", "and"]) {
            for b in self.opt(a, "a") {
                if let Some((d, n)) = self.kw_seq(b, &["maximum", "of"]).and_then(|c| self.int(c)) {
                    out.extend(self.kw_any(d, ITERATIONS).map(|e| (e, n)));
                }
            }
            if let Some((b, n)) = self.int(a) {
                out.extend(
                    self.kw_seq(b, &["maximum", "of"])
                        .and_then(|c| self.kw_any(c, ITERATIONS))
                        .map(|e| (e, n)),
                );
                out.extend(self.kw_any(b, ITERATIONS).map(|e| (e, n)));
            }
            if let Some(c) = self
                .kw_any(a, &["max", "maximum"])
                .and_then(|b| self.kw_any(b, ITERATIONS))
            {
                out.extend(self.int(c));
            }
        }
        out.retain(|&(_, n)| n >= 1);
        out
    }

    fn damping(&self, i: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for a in self.opt(i, "and") {
            for b in self.opt(a, "with") {
                for c in self.opt(b, "a") {
                    let Some(d) = self.kw(c, "damping factor") else {
                        continue;
                    };
                    for e in self.opt(d, "of") {
                        out.extend(self.float(e));
                    }
                }
            }
        }
        out.retain(|&(_, x)| x > 0.0 && x < 1.0);
        out
    }

    fn selection(&self) -> Vec<QuestionAst> {
        let mut out = Vec::new();
        for a in self.find_the(0) {
            let Some((b, label)) = self.label(a) else {
                continue;
            };
            let Some(c) = self.kw_any(b, &["for which", "where", "with", "whose"]) else {
                continue;
            };
            for (e, conditions) in self.conditions(&label, c) {
                if self.done(e) {
                    out.push(QuestionAst::Selection {
                        label: label.clone(),
                        conditions,
                    });
                }
            }
        }
        out
    }

    fn projection(&self) -> Vec<QuestionAst> {
        let mut starts = Vec::new();
        if let Some(a) = self
            .kw_any(0, &["which", "what"])
            .and_then(|a| self.kw_any(a, &["is", "are"]))
            .and_then(|a| self.kw(a, "the"))
        {
            starts.push(a);
        }
        starts.extend(self.find_the(0));
        let mut out = Vec::new();
        for a in starts {
            let Some((b, property)) = self.prop(a) else {
                continue;
            };
            let Some(c) = self.kw(b, "of") else {
                continue;
            };
            for d in self.opt(c, "the") {
                let Some((e, label)) = self.label(d) else {
                    continue;
                };
                if !self.lex.schema().has_property(&label, &property) {
                    continue;
                }
                if self.scope(e).into_iter().any(|f| self.done(f)) {
                    out.push(QuestionAst::Projection {
                        label: label.clone(),
                        property: property.clone(),
                    });
                }
            }
        }
        out
    }

    fn selection_projection(&self) -> Vec<QuestionAst> {
        let mut out = Vec::new();
        for a in self.find_the(0) {
            let Some((b, source_label)) = self.label(a) else {
                continue;
            };
            let Some((c, source_property)) = self.prop_of(b, &source_label) else {
                continue;
            };
            for d in self.opt_any(c, &["node", "nodes"]) {
                let Some(e) = self.kw_any(d, &["where", "for which"]) else {
                    continue;
                };
                for (f, target_label, target_conditions) in self.target_conditions(e) {
                    if self.done(f) {
                        out.push(QuestionAst::SelectionProjection {
                            source_label: source_label.clone(),
                            source_property: source_property.clone(),
                            target_label,
                            target_conditions,
                        });
                    }
                }
            }
        }
        out
    }

    fn aggregation(&self) -> Vec<QuestionAst> {
        let mut out = Vec::new();
        let Some((a, label)) = self.kw(0, "how many").and_then(|a| self.label(a)) else {
            return out;
        };
        if let Some(b) = self.kw_any(a, &["are", "is"]) {
            if let Some(c) = self.kw(b, "there") {
                if self.scope(c).into_iter().any(|d| self.done(d)) {
                    out.push(QuestionAst::Aggregation {
                        label: label.clone(),
                        conditions: Vec::new(),
                    });
                }
            }
            // adjective: a value synonym of one of the label's properties
            let properties = self.lex.schema().properties.get(&label).cloned().unwrap_or_default();
            for (c, raw) in self.value(b) {
                if !self.scope(c).into_iter().any(|d| self.done(d)) {
                    continue;
                }
                for property in &properties {
                    if let Some(canonical) = self.lex.value_synonym(property, &raw.text) {
                        out.push(QuestionAst::Aggregation {
                            label: label.clone(),
                            conditions: vec![Condition::new(property, canonical)],
                        });
                    }
                }
            }
        }
        if let Some(b) = self.kw_any(a, &["with", "where", "whose", "have", "has"]) {
            for (c, conditions) in self.conditions(&label, b) {
                if self.done(c) {
                    out.push(QuestionAst::Aggregation {
                        label: label.clone(),
                        conditions,
                    });
                }
            }
        }
        out
    }

    fn view_creation(&self) -> Vec<QuestionAst> {
        let mut out = Vec::new();
        let Some(a) = self.kw_seq(
            0,
            &["create", "and", "estimate", "memory", "for", "the", "graph", "view"],
        ) else {
            return out;
        };
        for (b, base_graph) in self.named(a) {
            let mut named = vec![(b, None)];
            if let Some(c) = self.kw_seq(b, &["named", "as"]) {
                named.extend(self.name(c).map(|(d, n)| (d, Some(n))));
            }
            for (c, view_name) in named {
                let Some((d, node_label)) = self.kw_seq(c, &["with", "the", "node"]).and_then(|d| self.label(d)) else {
                    continue;
                };
                let Some(e) = self.kw(d, "and") else {
                    continue;
                };
                for f in self.opt(e, "the") {
                    let Some((g, rel_type)) = self.kw_any(f, &["relationship", "relation"]).and_then(|g| self.rel(g))
                    else {
                        continue;
                    };
                    for h in self.opt(g, "oriented") {
                        if self.done(h) {
                            out.push(QuestionAst::ViewCreation {
                                base_graph: base_graph.clone(),
                                view_name: view_name.clone(),
                                node_label: node_label.clone(),
                                rel_type: rel_type.clone(),
                                oriented: h > g,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn estimate_memory(&self) -> Vec<QuestionAst> {
        let mut out = Vec::new();
        let Some(a) = self.kw_seq(0, &["estimate", "the", "required", "memory", "for", "applying"]) else {
            return out;
        };
        let Some(t) = self.at(a).filter(|t| t.kind == TokenKind::Keyword) else {
            return out;
        };
        let Some(algorithm) = self
            .lex
            .algorithm_named(&t.normalized())
            .filter(|k| *k != AlgorithmKind::DegreeCentrality)
        else {
            return out;
        };
        self.mark(a + 1);
        if let Some((c, view_name)) = self
            .kw_seq(a + 1, &["on", "the", "graph", "view"])
            .and_then(|b| self.name(b))
        {
            if self.done(c) {
                out.push(QuestionAst::EstimateMemory { algorithm, view_name });
            }
        }
        out
    }

    fn centrality(&self) -> Vec<QuestionAst> {
        let mut out = Vec::new();
        for a in self.find_the(0) {
            let Some((b, keyword)) = self.algorithm_keyword(a, false) else {
                continue;
            };
            let Some((c, node_label)) = self.label(b) else {
                continue;
            };
            for (d, rel_type) in self.relation_clause(&node_label, c) {
                let mut graphs = vec![(d, None)];
                graphs.extend(self.graph_clause(d));
                for (e, graph_name) in graphs {
                    let mut iters = vec![(e, None)];
                    iters.extend(self.iterations(e).into_iter().map(|(f, n)| (f, Some(n))));
                    for (f, max_iterations) in iters {
                        let mut damps = vec![(f, None)];
                        damps.extend(self.damping(f).into_iter().map(|(g, x)| (g, Some(x))));
                        for (g, damping_factor) in damps {
                            if self.done(g) {
                                out.push(QuestionAst::Centrality {
                                    keyword: keyword.clone(),
                                    node_label: node_label.clone(),
                                    rel_type: rel_type.clone(),
                                    graph_name: graph_name.clone(),
                                    max_iterations,
                                    damping_factor,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn community(&self) -> Vec<QuestionAst> {
        let mut starts = Vec::new();
        if let Some(a) = self.kw(0, "classify") {
            starts.extend(self.opt(a, "the").into_iter().map(|b| (b, "classify".to_string())));
        }
        for a in self.find_the(0) {
            if let Some((b, keyword)) = self.algorithm_keyword(a, true) {
                if let Some(c) = self.kw(b, "of") {
                    starts.extend(self.opt(c, "the").into_iter().map(|d| (d, keyword.clone())));
                }
            }
        }
        let mut out = Vec::new();
        for (a, keyword) in starts {
            let Some((b, node_label)) = self.label(a) else {
                continue;
            };
            let mut before = vec![(b, None)];
            before.extend(self.view_clause(b));
            for (c, first_view) in before {
                for (d, rel_type) in self.relation_clause(&node_label, c) {
                    let mut after = vec![(d, first_view.clone())];
                    if first_view.is_none() {
                        after.extend(self.view_clause(d));
                    }
                    for (e, view_name) in after {
                        let mut iters = vec![(e, None)];
                        iters.extend(self.iterations(e).into_iter().map(|(f, n)| (f, Some(n))));
                        for (f, max_iterations) in iters {
                            if self.done(f) {
                                out.push(QuestionAst::Community {
                                    keyword: keyword.clone(),
                                    node_label: node_label.clone(),
                                    view_name: view_name.clone(),
                                    rel_type: rel_type.clone(),
                                    max_iterations,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Every reading of `tokens`, in production order and then by content.
pub fn parse(tokens: &[Token], lexicon: &Lexicon) -> Result<Vec<QuestionAst>, ParseError> {
    let parser = Parser {
        tokens,
        lex: lexicon,
        production: Cell::new(Production::Selection),
        reach: RefCell::new(BTreeMap::new()),
    };
    let mut asts = Vec::new();
    for production in Production::ALL {
        parser.production.set(production);
        asts.extend(match production {
            Production::Selection => parser.selection(),
            Production::Projection => parser.projection(),
            Production::SelectionProjection => parser.selection_projection(),
            Production::Aggregation => parser.aggregation(),
            Production::ViewCreation => parser.view_creation(),
            Production::EstimateMemory => parser.estimate_memory(),
            Production::Centrality => parser.centrality(),
            Production::Community => parser.community(),
        });
    }
    asts.sort_by_cached_key(|a| (a.production(), format!("{a:?}")));
    asts.dedup();
    if !asts.is_empty() {
        return Ok(asts);
    }

    let reach = parser.reach.into_inner();
    let furthest = reach.values().copied().max().unwrap_or(0);
    let productions: Vec<Production> = if furthest == 0 {
        Production::ALL.to_vec()
    } else {
        reach.iter().filter(|(_, &r)| r == furthest).map(|(p, _)| *p).collect()
    };
    let end = if furthest == 0 { 0 } else { tokens[furthest - 1].span.1 };
    let message = if tokens.is_empty() {
        "the question is empty".to_string()
    } else if furthest == 0 {
        format!("no question form starts with {:?}", tokens[0].surface)
    } else if furthest < tokens.len() {
        format!("the question stops matching at {:?}", tokens[furthest].surface)
    } else {
        "no question form accepts the whole question".to_string()
    };
    Err(ParseError {
        message,
        span: (0, end),
        productions,
    })
}

/// Tokenizes and parses `text`.
pub fn parse_question(text: &str, lexicon: &Lexicon) -> Result<Vec<QuestionAst>, ParseError> {
    parse(&tokenize(text, lexicon), lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSchema;
    use crate::nl::lexicon::bind_vocabulary;

    fn schema() -> GraphSchema {
        let mut s = GraphSchema::default();
        for l in ["Patients", "Medications", "Encounters", "CarePlans"] {
            s.labels.insert(l.into());
        }
        for (t, a, b) in [
            ("PATIENT_HAS_MEDICATION", "Patients", "Medications"),
            ("PATIENT_HAS_ENCOUNTER", "Patients", "Encounters"),
            ("PATIENT_HAS_CAREPLAN", "Patients", "CarePlans"),
            ("ENCOUNTER_FOR_MEDICATION", "Encounters", "Medications"),
        ] {
            s.relationship_types.insert(t.into(), (a.into(), b.into()));
        }
        s.properties.insert(
            "Patients".into(),
            ["ID", "RACE", "BIRTHPLACE", "GENDER"].map(String::from).into(),
        );
        for l in ["Medications", "Encounters"] {
            s.properties
                .insert(l.into(), ["ID", "DESCRIPTION", "REASON"].map(String::from).into());
        }
        s
    }

    fn parse_one(text: &str) -> Vec<QuestionAst> {
        parse_question(text, &bind_vocabulary(&schema(), &[]).unwrap()).unwrap()
    }

    #[test]
    fn projection() {
        assert_eq!(
            parse_one("Which is the birthplace of the PATIENTS in the study?"),
            vec![QuestionAst::Projection {
                label: "Patients".into(),
                property: "BIRTHPLACE".into()
            }]
        );
    }

    #[test]
    fn selection_with_qualified_condition() {
        assert_eq!(
            parse_one(
                "Find the Medications for which the DESCRIPTION is Lisinopril 10 MG Oral Tablet and the REASON of the DESCRIPTION is Hypertension."
            ),
            vec![QuestionAst::Selection {
                label: "Medications".into(),
                conditions: vec![
                    Condition::new("DESCRIPTION", "Lisinopril 10 MG Oral Tablet"),
                    Condition::new("REASON", "Hypertension"),
                ]
            }]
        );
    }

    #[test]
    fn selection_projection() {
        assert_eq!(
            parse_one("Find the Encounters DESCRIPTION node where the DESCRIPTION of the drugs is Amlodipine 5 MG Oral Tablet."),
            vec![QuestionAst::SelectionProjection {
                source_label: "Encounters".into(),
                source_property: "DESCRIPTION".into(),
                target_label: "Medications".into(),
                target_conditions: vec![Condition::new("DESCRIPTION", "Amlodipine 5 MG Oral Tablet")],
            }]
        );
    }

    #[test]
    fn aggregation_forms() {
        assert_eq!(
            parse_one("How many patients are caucasian?"),
            vec![QuestionAst::Aggregation {
                label: "Patients".into(),
                conditions: vec![Condition::new("RACE", "white")]
            }]
        );
        assert_eq!(
            parse_one("How many patients are there in the Synthea study?"),
            vec![QuestionAst::Aggregation {
                label: "Patients".into(),
                conditions: vec![]
            }]
        );
        assert_eq!(
            parse_one("how many patients where the gender is female"),
            vec![QuestionAst::Aggregation {
                label: "Patients".into(),
                conditions: vec![Condition::new("GENDER", "F")]
            }]
        );
    }

    #[test]
    fn centrality_with_parameters() {
        assert_eq!(
            parse_one(
                "Find the most important Drugs prescribed for the PATIENT with a maximum of 25 iterations and a damping factor of 0.60."
            ),
            vec![QuestionAst::Centrality {
                keyword: "most important".into(),
                node_label: "Medications".into(),
                rel_type: "PATIENT_HAS_MEDICATION".into(),
                graph_name: None,
                max_iterations: Some(25),
                damping_factor: Some(0.60),
            }]
        );
        assert_eq!(
            parse_one("Find the most popular Encounters for Medications in the graph."),
            vec![QuestionAst::Centrality {
                keyword: "most popular".into(),
                node_label: "Encounters".into(),
                rel_type: "ENCOUNTER_FOR_MEDICATION".into(),
                graph_name: None,
                max_iterations: None,
                damping_factor: None,
            }]
        );
        let q2 = parse_one(
            "Find the most popular Patients with PATIENT_HAS_ENCOUNTER in the graph g1 with 30 maximum of iterations and with a damping factor 0.5",
        );
        assert!(matches!(
            &q2[..],
            [QuestionAst::Centrality { graph_name: Some(g), max_iterations: Some(30), damping_factor: Some(d), .. }]
                if g == "g1" && *d == 0.5
        ));
    }

    #[test]
    fn community_forms() {
        assert_eq!(
            parse_one("Get the subgroup of Patients who have PATIENT_HAS_CAREPLAN in the graph with max iterations 20"),
            vec![QuestionAst::Community {
                keyword: "subgroup".into(),
                node_label: "Patients".into(),
                view_name: None,
                rel_type: "PATIENT_HAS_CAREPLAN".into(),
                max_iterations: Some(20),
            }]
        );
        assert_eq!(
            parse_one(
                "Classify Patients within the view v1 with relation PATIENT_HAS_ENCOUNTER with 5 maximum of iterations"
            ),
            vec![QuestionAst::Community {
                keyword: "classify".into(),
                node_label: "Patients".into(),
                view_name: Some("v1".into()),
                rel_type: "PATIENT_HAS_ENCOUNTER".into(),
                max_iterations: Some(5),
            }]
        );
    }

    #[test]
    fn label_inferred_relation_fans_out() {
        let asts = parse_one("Find the communities of Patients with Medications");
        assert_eq!(asts.len(), 1);
        let mut s = schema();
        s.relationship_types.insert(
            "PATIENT_PREFERS_MEDICATION".into(),
            ("Patients".into(), "Medications".into()),
        );
        let lex = bind_vocabulary(&s, &[]).unwrap();
        let asts = parse_question("Find the communities of Patients with Medications", &lex).unwrap();
        let rels: Vec<_> = asts
            .iter()
            .map(|a| match a {
                QuestionAst::Community { rel_type, .. } => rel_type.as_str(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(rels, vec!["PATIENT_HAS_MEDICATION", "PATIENT_PREFERS_MEDICATION"]);
    }

    #[test]
    fn view_creation_and_estimate() {
        assert_eq!(
            parse_one("Create and estimate memory for the graph view synthea named as meds with the node Medications and the relationship ENCOUNTER_FOR_MEDICATION oriented"),
            vec![QuestionAst::ViewCreation {
                base_graph: Some("synthea".into()),
                view_name: Some("meds".into()),
                node_label: "Medications".into(),
                rel_type: "ENCOUNTER_FOR_MEDICATION".into(),
                oriented: true,
            }]
        );
        assert_eq!(
            parse_one("Estimate the required memory for applying Label Propagation on the graph view my_graph"),
            vec![QuestionAst::EstimateMemory {
                algorithm: AlgorithmKind::LabelPropagation,
                view_name: "my_graph".into()
            }]
        );
    }

    #[test]
    fn rejections() {
        let lex = bind_vocabulary(&schema(), &[]).unwrap();
        let err = parse_question("colorless green ideas sleep furiously", &lex).unwrap_err();
        assert_eq!(err.span, (0, 0));
        assert_eq!(err.productions.len(), Production::ALL.len());

        let err = parse_question("How many patients are purple", &lex).unwrap_err();
        assert_eq!(err.productions, vec![Production::Aggregation]);
        assert_eq!(err.span, (0, 28));

        // property of the wrong label
        assert!(parse_question("Which is the birthplace of the Medications?", &lex).is_err());
        // iterations must be positive, damping inside (0, 1)
        assert!(parse_question(
            "Find the most important Patients with PATIENT_HAS_ENCOUNTER with a maximum of 0 iterations",
            &lex
        )
        .is_err());
        assert!(parse_question(
            "Find the most important Patients with PATIENT_HAS_ENCOUNTER and a damping factor of 1.5",
            &lex
        )
        .is_err());
        assert!(parse_question("", &lex).is_err());
    }

    #[test]
    fn quoted_values_are_exact() {
        assert_eq!(
            parse_one("How many patients where the race is 'caucasian'"),
            vec![QuestionAst::Aggregation {
                label: "Patients".into(),
                conditions: vec![Condition::new("RACE", "caucasian")]
            }]
        );
    }
}
