//! Lexer and recursive-descent parser for the Cypher subset the generator
//! emits: single-pattern MATCH with optional WITH/count aggregation, and
//! the handful of `gds.*` procedure calls used by the data-science
//! templates. Anything else is rejected with the offending span.

use std::collections::BTreeSet;

use thiserror::Error;

use super::plan::*;

/// Byte span `(start, end)` into the statement text.
pub type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at {}..{}", span.0, span.1)]
pub struct CypherSubsetError {
    pub message: String,
    pub span: Span,
}

fn err<T>(message: impl Into<String>, span: Span) -> Result<T, CypherSubsetError> {
    Err(CypherSubsetError {
        message: message.into(),
        span,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, CypherSubsetError> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| bytes.get(i).map(|(p, _)| *p).unwrap_or(text.len());
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (start, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].1.is_ascii_alphanumeric() || bytes[j].1 == '_') {
                j += 1;
            }
            out.push((Tok::Ident(text[start..end_of(j)].to_string()), (start, end_of(j))));
            i = j;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].1.is_ascii_digit() {
                j += 1;
            }
            let is_float = j + 1 < bytes.len() && bytes[j].1 == '.' && bytes[j + 1].1.is_ascii_digit();
            if is_float {
                j += 1;
                while j < bytes.len() && bytes[j].1.is_ascii_digit() {
                    j += 1;
                }
            }
            let span = (start, end_of(j));
            let lexeme = &text[span.0..span.1];
            let tok = if is_float {
                Tok::Float(lexeme.parse().expect("digits"))
            } else {
                match lexeme.parse() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => return err("integer literal out of range", span),
                }
            };
            out.push((tok, span));
            i = j;
        } else if c == '\'' || c == '"' {
            let mut value = String::new();
            let mut j = i + 1;
            loop {
                match bytes.get(j) {
                    None => return err("unterminated string literal", (start, text.len())),
                    Some((_, '\\')) => {
                        match bytes.get(j + 1) {
                            Some((_, e)) => value.push(*e),
                            None => return err("unterminated string literal", (start, text.len())),
                        }
                        j += 2;
                    }
                    Some((_, q)) if *q == c => break,
                    Some((_, other)) => {
                        value.push(*other);
                        j += 1;
                    }
                }
            }
            out.push((Tok::Str(value), (start, end_of(j + 1))));
            i = j + 1;
        } else if "()[]{}:,.*-><;".contains(c) {
            out.push((Tok::Sym(c), (start, end_of(i + 1))));
            i += 1;
        } else {
            return err(format!("unexpected character {c:?}"), (start, end_of(i + 1)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|(_, s)| *s).unwrap_or((self.len, self.len))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, CypherSubsetError> {
        err(message, self.span())
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let hit = self.is_keyword(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), CypherSubsetError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(format!("expected {kw}"))
        }
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Sym(c))
    }

    fn eat_sym(&mut self, c: char) -> bool {
        let hit = self.is_sym(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, c: char) -> Result<(), CypherSubsetError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> Result<String, CypherSubsetError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected identifier"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn literal(&mut self) -> Result<Literal, CypherSubsetError> {
        let negative = self.eat_sym('-');
        let lit = match self.peek().cloned() {
            Some(Tok::Str(s)) if !negative => Literal::Str(s),
            Some(Tok::Int(i)) => Literal::Int(if negative { -i } else { i }),
            Some(Tok::Float(x)) => Literal::Float(if negative { -x } else { x }),
            Some(Tok::Sym('{')) if !negative => return self.map(),
            _ => return self.fail("expected literal"),
        };
        self.pos += 1;
        Ok(lit)
    }

    fn map(&mut self) -> Result<Literal, CypherSubsetError> {
        self.expect_sym('{')?;
        let mut entries = Vec::new();
        if !self.eat_sym('}') {
            loop {
                let key = self.ident()?;
                self.expect_sym(':')?;
                entries.push((key, self.literal()?));
                if self.eat_sym('}') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        Ok(Literal::Map(entries))
    }

    fn node_pattern(&mut self) -> Result<NodePattern, CypherSubsetError> {
        self.expect_sym('(')?;
        let var = match self.peek() {
            Some(Tok::Ident(_)) => Some(self.ident()?),
            _ => None,
        };
        let label = if self.eat_sym(':') { Some(self.ident()?) } else { None };
        let mut properties = Vec::new();
        if self.is_sym('{') {
            let start = self.span();
            let Literal::Map(entries) = self.map()? else {
                unreachable!()
            };
            for (k, v) in entries {
                if matches!(v, Literal::Map(_)) {
                    return err("nested maps are not allowed in node patterns", start);
                }
                properties.push((k, v));
            }
        }
        self.expect_sym(')')?;
        Ok(NodePattern { var, label, properties })
    }

    fn rel_pattern(&mut self) -> Result<RelPattern, CypherSubsetError> {
        if self.is_sym('<') {
            return self.fail("incoming relationship patterns are not supported");
        }
        self.expect_sym('-')?;
        self.expect_sym('[')?;
        let start = self.span();
        let var = match self.peek() {
            Some(Tok::Ident(_)) => Some(self.ident()?),
            _ => None,
        };
        let rel_type = if self.eat_sym(':') { Some(self.ident()?) } else { None };
        let variable_length = self.eat_sym('*');
        if variable_length && var.is_some() {
            return err("variable-length relationships cannot be bound", start);
        }
        self.expect_sym(']')?;
        self.expect_sym('-')?;
        let direction = if self.eat_sym('>') {
            Direction::Outgoing
        } else {
            Direction::Either
        };
        Ok(RelPattern {
            var,
            rel_type,
            variable_length,
            direction,
        })
    }

    fn expr(&mut self) -> Result<Expr, CypherSubsetError> {
        if self.eat_sym('(') {
            let inner = self.expr()?;
            self.expect_sym(')')?;
            return Ok(inner);
        }
        let name = self.ident()?;
        if name.eq_ignore_ascii_case("count") && self.is_sym('(') {
            self.pos += 1;
            let arg = if self.eat_sym('*') { None } else { Some(self.ident()?) };
            self.expect_sym(')')?;
            return Ok(Expr::Count(arg));
        }
        if name.eq_ignore_ascii_case("id") && self.is_sym('(') {
            self.pos += 1;
            let v = self.ident()?;
            self.expect_sym(')')?;
            return Ok(Expr::Id(v));
        }
        if name == "gds" && self.is_sym('.') {
            for part in ["util", "asNode"] {
                self.expect_sym('.')?;
                if self.ident()? != part {
                    return err(
                        "only gds.util.asNode(...) is supported in expressions",
                        self.toks[self.pos - 1].1,
                    );
                }
            }
            self.expect_sym('(')?;
            let var = self.ident()?;
            self.expect_sym(')')?;
            self.expect_sym('.')?;
            let key = self.ident()?;
            return Ok(Expr::AsNodeProperty { var, key });
        }
        if self.eat_sym('.') {
            let key = self.ident()?;
            return Ok(Expr::Property { var: name, key });
        }
        if self.is_sym('(') {
            return err(format!("function {name} is not supported"), self.toks[self.pos - 1].1);
        }
        Ok(Expr::Variable(name))
    }

    fn items(&mut self) -> Result<Vec<(ReturnItem, Span)>, CypherSubsetError> {
        let mut items = Vec::new();
        loop {
            let start = self.span();
            let expr = self.expr()?;
            let alias = if self.eat_keyword("AS") {
                Some(self.ident()?)
            } else {
                None
            };
            let end = self.toks[self.pos - 1].1 .1;
            items.push((ReturnItem { expr, alias }, (start.0, end)));
            if !self.eat_sym(',') {
                return Ok(items);
            }
        }
    }

    fn order_limit(&mut self) -> Result<Option<OrderLimit>, CypherSubsetError> {
        let mut ol = OrderLimit {
            order: None,
            limit: None,
        };
        if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            let key = self.expr()?;
            let dir = if self.eat_keyword("DESC") {
                SortDirection::Descending
            } else {
                self.eat_keyword("ASC");
                SortDirection::Ascending
            };
            ol.order = Some((key, dir));
        }
        if self.eat_keyword("LIMIT") {
            match self.peek() {
                Some(Tok::Int(n)) if *n >= 0 => {
                    ol.limit = Some(*n as usize);
                    self.pos += 1;
                }
                _ => return self.fail("LIMIT expects a non-negative integer"),
            }
        }
        Ok((ol.order.is_some() || ol.limit.is_some()).then_some(ol))
    }
}

/// Checks every item reads only bound variables; returns the names the
/// clause binds (aliases, or the variable itself).
fn check_items(
    items: &[(ReturnItem, Span)],
    bound: &BTreeSet<String>,
    require_alias: bool,
) -> Result<BTreeSet<String>, CypherSubsetError> {
    let mut out = BTreeSet::new();
    for (item, span) in items {
        if let Some(v) = item.expr.variable() {
            if !bound.contains(v) {
                return err(format!("variable {v} is not bound"), *span);
            }
        }
        if require_alias && item.alias.is_none() && !matches!(item.expr, Expr::Variable(_)) {
            return err("WITH expressions need an alias", *span);
        }
        out.insert(item.column_name());
    }
    Ok(out)
}

fn str_arg(args: &[(Literal, Span)], i: usize, what: &str, call: Span) -> Result<String, CypherSubsetError> {
    match args.get(i) {
        Some((Literal::Str(s), _)) => Ok(s.clone()),
        Some((_, span)) => err(format!("{what} must be a string"), *span),
        None => err(format!("missing {what}"), call),
    }
}

fn relationship_projection(
    arg: Option<&(Literal, Span)>,
    call: Span,
) -> Result<(String, Orientation), CypherSubsetError> {
    let Some((Literal::Map(entries), span)) = arg else {
        return err(
            "expected relationship projection {TYPE: {orientation: ...}}",
            arg.map(|a| a.1).unwrap_or(call),
        );
    };
    let [(rel_type, Literal::Map(inner))] = entries.as_slice() else {
        return err("relationship projection must name exactly one type", *span);
    };
    let orientation = match inner.as_slice() {
        [] => Orientation::Natural,
        [(k, Literal::Str(o))] if k == "orientation" => match Orientation::parse(o) {
            Some(o) => o,
            None => return err(format!("unknown orientation {o}"), *span),
        },
        _ => return err("relationship projection only supports orientation", *span),
    };
    Ok((rel_type.clone(), orientation))
}

fn algo_config(arg: &(Literal, Span), allowed: &[&str]) -> Result<AlgoConfig, CypherSubsetError> {
    let (Literal::Map(entries), span) = arg else {
        return err("configuration must be a map", arg.1);
    };
    let mut config = AlgoConfig::default();
    for (k, v) in entries {
        if !allowed.contains(&k.as_str()) {
            return err(format!("unsupported configuration key {k}"), *span);
        }
        match (k.as_str(), v) {
            ("writeProperty", Literal::Str(s)) => config.write_property = Some(s.clone()),
            ("maxIterations", Literal::Int(n)) => config.max_iterations = Some(*n),
            ("dampingFactor", Literal::Float(x)) => config.damping_factor = Some(*x),
            ("dampingFactor", Literal::Int(n)) => config.damping_factor = Some(*n as f64),
            _ => return err(format!("bad value for {k}"), *span),
        }
    }
    Ok(config)
}

fn procedure(name: &str, args: &[(Literal, Span)], call: Span) -> Result<Procedure, CypherSubsetError> {
    let arity = |lo: usize, hi: usize| {
        if args.len() < lo || args.len() > hi {
            err(format!("{name} takes {lo}..={hi} arguments, got {}", args.len()), call)
        } else {
            Ok(())
        }
    };
    Ok(match name {
        "gds.graph.create" => {
            arity(3, 3)?;
            let (rel_type, orientation) = relationship_projection(args.get(2), call)?;
            Procedure::GraphCreate {
                graph: str_arg(args, 0, "graph name", call)?,
                label: str_arg(args, 1, "node label", call)?,
                rel_type,
                orientation,
            }
        }
        "gds.graph.create.estimate" => {
            arity(2, 2)?;
            let (rel_type, orientation) = relationship_projection(args.get(1), call)?;
            Procedure::GraphCreateEstimate {
                label: str_arg(args, 0, "node label", call)?,
                rel_type,
                orientation,
            }
        }
        "gds.pageRank.write.estimate" | "gds.labelPropagation.write.estimate" => {
            arity(2, 2)?;
            let graph = str_arg(args, 0, "graph name", call)?;
            let pagerank = name.starts_with("gds.pageRank");
            let allowed: &[&str] = if pagerank {
                &["writeProperty", "maxIterations", "dampingFactor"]
            } else {
                &["writeProperty", "maxIterations"]
            };
            let config = algo_config(&args[1], allowed)?;
            if config.write_property.is_none() {
                return err("write mode requires writeProperty", args[1].1);
            }
            if pagerank {
                Procedure::PageRankEstimate { graph, config }
            } else {
                Procedure::LabelPropagationEstimate { graph, config }
            }
        }
        "gds.pageRank.stream" | "gds.labelPropagation.stream" => {
            arity(1, 2)?;
            let graph = str_arg(args, 0, "graph name", call)?;
            let pagerank = name.starts_with("gds.pageRank");
            let allowed: &[&str] = if pagerank {
                &["maxIterations", "dampingFactor"]
            } else {
                &["maxIterations"]
            };
            let config = args.get(1).map(|a| algo_config(a, allowed)).transpose()?;
            if pagerank {
                Procedure::PageRankStream { graph, config }
            } else {
                Procedure::LabelPropagationStream { graph, config }
            }
        }
        _ => return err(format!("procedure {name} is not supported"), call),
    })
}

/// Parses one statement (a trailing `;` is tolerated).
pub fn parse_cypher(text: &str) -> Result<QueryPlan, CypherSubsetError> {
    let mut toks = lex(text)?;
    if matches!(toks.last(), Some((Tok::Sym(';'), _))) {
        toks.pop();
    }
    if toks.is_empty() {
        return err("empty statement", (0, text.len()));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        len: text.len(),
    };
    let mut ops = Vec::new();
    let mut bound = BTreeSet::new();

    if p.eat_keyword("MATCH") {
        let start = p.node_pattern()?;
        let mut hops = Vec::new();
        while p.is_sym('-') || p.is_sym('<') {
            let rel = p.rel_pattern()?;
            let node = p.node_pattern()?;
            hops.push(Hop { rel, node });
        }
        let mut names = Vec::new();
        names.extend(start.var.clone());
        for hop in &hops {
            names.extend(hop.rel.var.clone());
            names.extend(hop.node.var.clone());
        }
        bound.extend(names);
        ops.push(if hops.is_empty() {
            PlanOp::NodeScan(start)
        } else {
            PlanOp::PathMatch(PathPattern { start, hops })
        });
        if p.eat_keyword("WITH") {
            let items = p.items()?;
            bound = check_items(&items, &bound, true)?;
            ops.push(PlanOp::Aggregate(items.into_iter().map(|(i, _)| i).collect()));
        }
        p.expect_keyword("RETURN")?;
    } else if p.eat_keyword("CALL") {
        let call_start = p.span();
        let mut name = p.ident()?;
        while p.eat_sym('.') {
            name.push('.');
            name.push_str(&p.ident()?);
        }
        p.expect_sym('(')?;
        let mut args = Vec::new();
        if !p.eat_sym(')') {
            loop {
                let start = p.span();
                let lit = p.literal()?;
                let end = p.toks[p.pos - 1].1 .1;
                args.push((lit, (start.0, end)));
                if p.eat_sym(')') {
                    break;
                }
                p.expect_sym(',')?;
            }
        }
        let call_span = (call_start.0, p.toks[p.pos - 1].1 .1);
        let procedure = procedure(&name, &args, call_span)?;
        let yields = if p.eat_keyword("YIELD") {
            let mut cols = Vec::new();
            loop {
                let span = p.span();
                let col = p.ident()?;
                if !procedure.output_columns().contains(&col.as_str()) {
                    return err(format!("{} does not yield {col}", procedure.name()), span);
                }
                cols.push(col);
                if !p.eat_sym(',') {
                    break;
                }
            }
            Some(cols)
        } else {
            None
        };
        bound = match &yields {
            Some(cols) => cols.iter().cloned().collect(),
            None => procedure.output_columns().iter().map(|s| s.to_string()).collect(),
        };
        ops.push(PlanOp::ProcedureCall(ProcedureCall { procedure, yields }));
        if !p.eat_keyword("RETURN") {
            if !p.at_end() {
                return p.fail("expected RETURN or end of statement");
            }
            return Ok(QueryPlan { ops });
        }
    } else {
        return p.fail("only MATCH and CALL statements are supported");
    }

    let items = p.items()?;
    let columns = check_items(&items, &bound, false)?;
    ops.push(PlanOp::Project(items.into_iter().map(|(i, _)| i).collect()));
    let order_span = p.span();
    if let Some(ol) = p.order_limit()? {
        if let Some((key, _)) = &ol.order {
            if !columns.contains(&key.to_string()) {
                return err(format!("ORDER BY {key} is not a returned column"), order_span);
            }
        }
        ops.push(PlanOp::OrderLimit(ol));
    }
    if !p.at_end() {
        return p.fail("unexpected trailing input");
    }
    Ok(QueryPlan { ops })
}

/// Splits a script on `;` outside string literals, dropping empty pieces.
pub fn split_statements(script: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in script.chars() {
        match quote {
            Some(q) => {
                current.push(c);
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None if c == ';' => out.push(std::mem::take(&mut current)),
            None => {
                if c == '\'' || c == '"' {
                    quote = Some(c);
                }
                current.push(c);
            }
        }
    }
    out.push(current);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
