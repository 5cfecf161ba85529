//! Parameterized models: finite domains and conditional probability tables.
//!
//! The `.cidm` format extends `.cid` with
//!
//! ```text
//! domain S -1 1
//! cpt S
//!   : 0.5 0.5
//! cpt U
//!   -1 -1 : 0 1
//!   -1 1 : 1 0
//! ```
//!
//! Table rows list parent values in the order the parents were declared,
//! followed by one probability per domain value.

use std::fmt;
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};
use crate::text::{parse_document, syntax, write_graph, Token};

pub const DEFAULT_MAX_DOMAIN: usize = 4;
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Label(String),
    Number(Ratio<i64>),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Number(Ratio::from_integer(n))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(r) => Some(*r.numer() as f64 / *r.denom() as f64),
            Value::Label(_) => None,
        }
    }

    /// Reads a numeral (`3`, `-0.25`, `1/3`), falling back to a label.
    pub fn parse(s: &str) -> Value {
        match parse_rational(s) {
            Some(r) => Value::Number(r),
            None => Value::Label(s.to_string()),
        }
    }
}

fn has_only_2_and_5(mut d: i64) -> bool {
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    d == 1
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Label(s) => f.write_str(s),
            Value::Number(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Value::Number(r) if has_only_2_and_5(*r.denom()) => {
                // terminating decimal: scale until the denominator is 10^k
                let (mut n, mut d) = (*r.numer() as i128, *r.denom() as i128);
                let mut digits = 0;
                while d != 1 {
                    if d % 10 == 0 {
                        d /= 10;
                    } else if d % 2 == 0 {
                        d /= 2;
                        n *= 5;
                    } else {
                        d /= 5;
                        n *= 2;
                    }
                    digits += 1;
                }
                let sign = if n < 0 { "-" } else { "" };
                let s = format!("{:0>width$}", n.abs(), width = digits + 1);
                let (int, frac) = s.split_at(s.len() - digits);
                write!(f, "{sign}{int}.{frac}")
            }
            Value::Number(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

pub(crate) fn parse_rational(s: &str) -> Option<Ratio<i64>> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let r = if let Some((n, d)) = body.split_once('/') {
        if !is_digits(n) || !is_digits(d) {
            return None;
        }
        let d: i64 = d.parse().ok()?;
        if d == 0 {
            return None;
        }
        Ratio::new(n.parse().ok()?, d)
    } else {
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !(int.is_empty() || is_digits(int)) || !(frac.is_empty() || is_digits(frac)) {
            return None;
        }
        let scale = 10i64.checked_pow(frac.len() as u32)?;
        let int: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
        let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        Ratio::new(int.checked_mul(scale)?.checked_add(frac)?, scale)
    };
    Some(if neg { -r } else { r })
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Ordered, duplicate-free list of values a node can take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    values: Vec<Value>,
}

impl Domain {
    pub fn new(values: Vec<Value>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DomainMismatch("empty domain".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::DomainMismatch(format!("duplicate value `{v}`")));
            }
        }
        Ok(Domain { values })
    }

    pub fn ints(values: &[i64]) -> Self {
        Domain::new(values.iter().map(|&v| Value::int(v)).collect()).expect("distinct integers")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.values.iter().position(|x| x == v)
    }

    /// Position of the value whose written form is `s`.
    pub fn index_of_str(&self, s: &str) -> Option<usize> {
        self.index_of(&Value::parse(s))
    }

    pub fn numeric(&self) -> Option<Vec<f64>> {
        self.values.iter().map(Value::as_f64).collect()
    }
}

/// Conditional distribution of one node. Rows are indexed by the parent
/// assignment in mixed radix, first parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub owner: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A graph plus a domain for every node and a table for every non-decision
/// node.
#[derive(Debug, Clone, PartialEq)]
pub struct CidModel {
    graph: CidGraph,
    domains: Vec<Domain>,
    cpts: Vec<Option<Cpt>>,
}

pub(crate) fn parent_assignment_label(model: &CidModel, node: usize, row: usize) -> String {
    let g = &model.graph;
    let mut idx = decode_row(model, node, row);
    idx.reverse();
    let vals: Vec<String> = g
        .parents(node)
        .iter()
        .map(|&p| model.domains[p].values()[idx.pop().unwrap()].to_string())
        .collect();
    vals.join(" ")
}

fn decode_row(model: &CidModel, node: usize, mut row: usize) -> Vec<usize> {
    let parents = model.graph.parents(node);
    let mut out = vec![0; parents.len()];
    for (k, &p) in parents.iter().enumerate().rev() {
        let size = model.domains[p].len();
        out[k] = row % size;
        row /= size;
    }
    out
}

impl CidModel {
    /// Builds and checks a model. `tables[i]` must be `None` exactly for
    /// decision nodes.
    pub fn new(graph: CidGraph, domains: Vec<Domain>, tables: Vec<Option<Vec<Vec<f64>>>>) -> Result<Self> {
        graph.topological_order()?;
        let n = graph.len();
        if domains.len() != n || tables.len() != n {
            return Err(Error::DomainMismatch(format!(
                "expected {n} domains and tables, got {} and {}",
                domains.len(),
                tables.len()
            )));
        }
        let mut cpts = Vec::with_capacity(n);
        for (i, table) in tables.into_iter().enumerate() {
            let id = graph.id(i).to_string();
            let kind = graph.kind(i);
            if kind == NodeKind::Utility && domains[i].numeric().is_none() {
                return Err(Error::NonNumericUtilityDomain(id));
            }
            match (kind, table) {
                (NodeKind::Decision, None) => cpts.push(None),
                (NodeKind::Decision, Some(_)) => {
                    return Err(Error::DomainMismatch(format!(
                        "decision node `{id}` takes no table"
                    )))
                }
                (_, None) => return Err(Error::MissingCpt(id)),
                (_, Some(rows)) => {
                    let parents = graph.parents(i);
                    let expected: usize = parents.iter().map(|&p| domains[p].len()).product();
                    if rows.len() != expected {
                        return Err(Error::DomainMismatch(format!(
                            "table for `{id}` has {} rows, expected {expected}",
                            rows.len()
                        )));
                    }
                    for row in &rows {
                        if row.len() != domains[i].len() {
                            return Err(Error::DomainMismatch(format!(
                                "row of `{id}` has {} entries, domain has {}",
                                row.len(),
                                domains[i].len()
                            )));
                        }
                        if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                            return Err(Error::DomainMismatch(format!(
                                "probability outside [0, 1] in table for `{id}`"
                            )));
                        }
                    }
                    cpts.push(Some(Cpt {
                        owner: id,
                        parents: parents.iter().map(|&p| graph.id(p).to_string()).collect(),
                        rows,
                    }));
                }
            }
        }
        let model = CidModel {
            graph,
            domains,
            cpts,
        };
        for i in 0..n {
            if let Some(cpt) = &model.cpts[i] {
                for (r, row) in cpt.rows.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_TOLERANCE {
                        return Err(Error::RowNotNormalized {
                            node: cpt.owner.clone(),
                            row: parent_assignment_label(&model, i, r),
                            sum,
                        });
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn graph(&self) -> &CidGraph {
        &self.graph
    }

    pub fn domain(&self, ix: usize) -> &Domain {
        &self.domains[ix]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain_of(&self, id: &str) -> Result<&Domain> {
        Ok(&self.domains[self.graph.require(id)?])
    }

    pub fn cpt(&self, ix: usize) -> Option<&Cpt> {
        self.cpts[ix].as_ref()
    }

    pub fn cpt_of(&self, id: &str) -> Result<Option<&Cpt>> {
        Ok(self.cpts[self.graph.require(id)?].as_ref())
    }

    /// Same parameters on a graph that differs from this one only in edges
    /// into decision nodes.
    pub fn with_decision_links(&self, graph: CidGraph) -> Result<CidModel> {
        let g = &self.graph;
        let same_nodes = graph.len() == g.len()
            && (0..g.len()).all(|i| graph.node(i) == g.node(i));
        let same_edges = same_nodes
            && (0..g.len())
                .filter(|&i| g.kind(i) != NodeKind::Decision)
                .all(|i| graph.parents(i) == g.parents(i));
        if !same_edges {
            return Err(Error::DomainMismatch(
                "graphs differ outside the decision contexts".into(),
            ));
        }
        graph.topological_order()?;
        Ok(CidModel {
            graph,
            domains: self.domains.clone(),
            cpts: self.cpts.clone(),
        })
    }

    /// Applies `u -> a * u + b` to every utility domain.
    pub fn map_utilities(&self, a: Ratio<i64>, b: Ratio<i64>) -> Result<CidModel> {
        let mut out = self.clone();
        for i in self.graph.utilities() {
            let vals = self.domains[i]
                .values()
                .iter()
                .map(|v| match v {
                    Value::Number(r) => Value::Number(a * r + b),
                    other => other.clone(),
                })
                .collect();
            out.domains[i] = Domain::new(vals)?;
        }
        Ok(out)
    }
}

fn domain_token_value(tok: &Token) -> Result<Value> {
    if tok.text.contains(':') || tok.text.contains('"') {
        return Err(Error::Syntax {
            line: 0,
            column: tok.column,
            reason: format!("bad domain value `{}`", tok.text),
        });
    }
    Ok(Value::parse(&tok.text))
}

fn parse_prob(tok: &Token, line: usize) -> Result<f64> {
    let bad = || syntax(line, tok.column, format!("bad probability `{}`", tok.text));
    let p = if tok.text.contains('/') {
        let r = parse_rational(&tok.text).ok_or_else(bad)?;
        *r.numer() as f64 / *r.denom() as f64
    } else {
        tok.text.parse::<f64>().map_err(|_| bad())?
    };
    if p.is_finite() {
        Ok(p)
    } else {
        Err(bad())
    }
}

/// Parses `.cidm` text with the default domain-size cap.
pub fn parse_model(text: &str) -> Result<CidModel> {
    parse_model_with_cap(text, DEFAULT_MAX_DOMAIN)
}

/// Parses `.cidm` text, rejecting domains with more than `max_domain` values.
pub fn parse_model_with_cap(text: &str, max_domain: usize) -> Result<CidModel> {
    let doc = parse_document(text)?;
    let g = doc.graph;
    let n = g.len();
    let mut domains: Vec<Option<Domain>> = vec![None; n];
    for decl in &doc.domains {
        let ix = g.require(&decl.node.text)?;
        if domains[ix].is_some() {
            return Err(syntax(decl.line, decl.node.column, "duplicate domain declaration"));
        }
        let values = decl
            .values
            .iter()
            .map(|t| {
                domain_token_value(t).map_err(|_| syntax(decl.line, t.column, "bad domain value"))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() > max_domain {
            return Err(Error::DomainMismatch(format!(
                "domain of `{}` has {} values, cap is {max_domain}",
                decl.node.text,
                values.len()
            )));
        }
        let dom = Domain::new(values).map_err(|e| match e {
            Error::DomainMismatch(m) => {
                Error::DomainMismatch(format!("domain of `{}`: {m}", decl.node.text))
            }
            e => e,
        })?;
        if g.kind(ix) == NodeKind::Utility && dom.numeric().is_none() {
            return Err(Error::NonNumericUtilityDomain(decl.node.text.clone()));
        }
        domains[ix] = Some(dom);
    }
    let domains: Vec<Domain> = domains
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| Error::MissingDomain(g.id(i).to_string())))
        .collect::<Result<_>>()?;

    let mut tables: Vec<Option<Vec<Vec<f64>>>> = vec![None; n];
    for decl in &doc.cpts {
        let ix = g.require(&decl.node.text)?;
        if tables[ix].is_some() {
            return Err(syntax(decl.line, decl.node.column, "duplicate table"));
        }
        if g.kind(ix) == NodeKind::Decision {
            return Err(syntax(
                decl.line,
                decl.node.column,
                "decision nodes take no table",
            ));
        }
        let parents = g.parents(ix);
        let rows_needed: usize = parents.iter().map(|&p| domains[p].len()).product();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; rows_needed];
        for row in &decl.rows {
            if row.parent_values.len() != parents.len() {
                return Err(syntax(
                    row.line,
                    1,
                    format!(
                        "expected {} parent values for `{}`",
                        parents.len(),
                        decl.node.text
                    ),
                ));
            }
            let mut index = 0;
            for (tok, &p) in row.parent_values.iter().zip(parents) {
                let k = domains[p].index_of_str(&tok.text).ok_or_else(|| {
                    Error::DomainMismatch(format!(
                        "line {}: `{}` is not in the domain of `{}`",
                        row.line,
                        tok.text,
                        g.id(p)
                    ))
                })?;
                index = index * domains[p].len() + k;
            }
            if row.probs.len() != domains[ix].len() {
                return Err(Error::DomainMismatch(format!(
                    "line {}: {} probabilities for a domain of {}",
                    row.line,
                    row.probs.len(),
                    domains[ix].len()
                )));
            }
            let probs = row
                .probs
                .iter()
                .map(|t| parse_prob(t, row.line))
                .collect::<Result<Vec<_>>>()?;
            if rows[index].is_some() {
                return Err(syntax(row.line, 1, "duplicate table row"));
            }
            rows[index] = Some(probs);
        }
        let complete: Option<Vec<Vec<f64>>> = rows.into_iter().collect();
        tables[ix] = Some(complete.ok_or_else(|| {
            Error::DomainMismatch(format!("table for `{}` is missing rows", decl.node.text))
        })?);
    }
    CidModel::new(g, domains, tables)
}

/// Canonical `.cidm` text. Probabilities are written in shortest round-trip
/// decimal form.
pub fn serialize_model(model: &CidModel) -> String {
    let g = model.graph();
    let mut out = String::new();
    write_graph(&mut out, g);
    for i in 0..g.len() {
        let vals: Vec<String> = model.domains[i].values().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "domain {} {}", g.id(i), vals.join(" "));
    }
    for i in 0..g.len() {
        let Some(cpt) = &model.cpts[i] else { continue };
        let _ = writeln!(out, "cpt {}", g.id(i));
        for (r, row) in cpt.rows.iter().enumerate() {
            let probs: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            let left = parent_assignment_label(model, i, r);
            let sep = if left.is_empty() { "" } else { " " };
            let _ = writeln!(out, "  {left}{sep}: {}", probs.join(" "));
        }
    }
    out
}
