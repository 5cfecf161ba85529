//! The line-oriented `.cid` text format, shared with the `.cidm` model format.
//!
//! ```text
//! # comment
//! cid fitness
//! node PhysAct chance label="Physical activity"
//! node D decision
//! edge PhysAct -> D
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{is_valid_id, CidGraph, NodeKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub text: String,
    pub column: usize,
}

pub(crate) fn syntax(line: usize, column: usize, reason: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        reason: reason.into(),
    }
}

/// Splits a line on whitespace. Double-quoted runs (with `\"`, `\\` and `\n`
/// escapes) stay inside their token verbatim.
pub(crate) fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let mut text = String::new();
        while i < chars.len() && !chars[i].is_whitespace() {
            if chars[i] == '"' {
                text.push('"');
                i += 1;
                let mut closed = false;
                while i < chars.len() {
                    match chars[i] {
                        '\\' if i + 1 < chars.len() => {
                            text.push('\\');
                            text.push(chars[i + 1]);
                            i += 2;
                        }
                        '"' => {
                            text.push('"');
                            i += 1;
                            closed = true;
                            break;
                        }
                        c => {
                            text.push(c);
                            i += 1;
                        }
                    }
                }
                if !closed {
                    return Err(syntax(lineno, start + 1, "unterminated string"));
                }
            } else {
                text.push(chars[i]);
                i += 1;
            }
        }
        out.push(Token {
            text,
            column: start + 1,
        });
    }
    Ok(out)
}

fn unquote(tok: &Token, lineno: usize) -> Result<String> {
    let body = tok
        .text
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|_| tok.text.len() >= 2)
        .ok_or_else(|| syntax(lineno, tok.column, "expected a quoted string"))?;
    let mut out = String::new();
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                _ => return Err(syntax(lineno, tok.column, "bad escape in string")),
            }
        } else if c == '"' {
            return Err(syntax(lineno, tok.column, "unescaped quote in string"));
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A `domain` declaration as written.
#[derive(Debug, Clone)]
pub(crate) struct DomainDecl {
    pub line: usize,
    pub node: Token,
    pub values: Vec<Token>,
}

#[derive(Debug, Clone)]
pub(crate) struct RowDecl {
    pub line: usize,
    pub parent_values: Vec<Token>,
    pub probs: Vec<Token>,
}

#[derive(Debug, Clone)]
pub(crate) struct CptDecl {
    pub line: usize,
    pub node: Token,
    pub rows: Vec<RowDecl>,
}

#[derive(Debug, Clone)]
pub(crate) struct Document {
    pub graph: CidGraph,
    pub domains: Vec<DomainDecl>,
    pub cpts: Vec<CptDecl>,
}

fn check_id(tok: &Token, lineno: usize) -> Result<()> {
    if is_valid_id(&tok.text) {
        Ok(())
    } else {
        Err(syntax(
            lineno,
            tok.column,
            format!("invalid node id `{}`", tok.text),
        ))
    }
}

pub(crate) fn parse_document(text: &str) -> Result<Document> {
    let mut name: Option<String> = None;
    let mut graph = CidGraph::new("");
    let mut pending_edges: Vec<(usize, Token, Token)> = Vec::new();
    let mut domains = Vec::new();
    let mut cpts: Vec<CptDecl> = Vec::new();
    let mut in_cpt = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        if indented && in_cpt {
            let cpt = cpts.last_mut().expect("in_cpt implies a cpt block");
            let colon = raw
                .find(':')
                .ok_or_else(|| syntax(lineno, 1, "table row needs `:`"))?;
            let left = tokenize(&raw[..colon], lineno)?;
            let mut right = tokenize(&raw[colon + 1..], lineno)?;
            for t in &mut right {
                t.column += colon + 1;
            }
            cpt.rows.push(RowDecl {
                line: lineno,
                parent_values: left,
                probs: right,
            });
            continue;
        }
        in_cpt = false;
        let toks = tokenize(raw, lineno)?;
        let head = &toks[0];
        if name.is_none() {
            if head.text != "cid" {
                return Err(syntax(lineno, head.column, "expected `cid <name>` header"));
            }
            if toks.len() != 2 {
                return Err(syntax(lineno, head.column, "expected `cid <name>`"));
            }
            name = Some(toks[1].text.clone());
            continue;
        }
        match head.text.as_str() {
            "cid" => return Err(syntax(lineno, head.column, "duplicate `cid` header")),
            "node" => {
                if toks.len() < 3 || toks.len() > 4 {
                    return Err(syntax(
                        lineno,
                        head.column,
                        "expected `node <id> <kind> [label=\"...\"]`",
                    ));
                }
                check_id(&toks[1], lineno)?;
                let kind = NodeKind::parse(&toks[2].text).ok_or_else(|| {
                    syntax(
                        lineno,
                        toks[2].column,
                        format!("unknown node kind `{}`", toks[2].text),
                    )
                })?;
                let label = match toks.get(3) {
                    None => None,
                    Some(t) => {
                        let rest = t.text.strip_prefix("label=").ok_or_else(|| {
                            syntax(lineno, t.column, "expected `label=\"...\"`")
                        })?;
                        let q = Token {
                            text: rest.to_string(),
                            column: t.column + 6,
                        };
                        Some(unquote(&q, lineno)?)
                    }
                };
                graph.add_node(toks[1].text.clone(), kind, label)?;
            }
            "edge" => {
                // The arrow is optional: `edge A -> B` and `edge A B` both parse.
                let (src, dst) = match toks.len() {
                    4 if toks[2].text == "->" => (&toks[1], &toks[3]),
                    3 => (&toks[1], &toks[2]),
                    _ => {
                        return Err(syntax(lineno, head.column, "expected `edge <id> -> <id>`"))
                    }
                };
                check_id(src, lineno)?;
                check_id(dst, lineno)?;
                pending_edges.push((lineno, src.clone(), dst.clone()));
            }
            "domain" => {
                if toks.len() < 3 {
                    return Err(syntax(
                        lineno,
                        head.column,
                        "expected `domain <id> <value>+`",
                    ));
                }
                check_id(&toks[1], lineno)?;
                domains.push(DomainDecl {
                    line: lineno,
                    node: toks[1].clone(),
                    values: toks[2..].to_vec(),
                });
            }
            "cpt" => {
                if toks.len() != 2 {
                    return Err(syntax(lineno, head.column, "expected `cpt <id>`"));
                }
                check_id(&toks[1], lineno)?;
                cpts.push(CptDecl {
                    line: lineno,
                    node: toks[1].clone(),
                    rows: Vec::new(),
                });
                in_cpt = true;
            }
            other => {
                return Err(syntax(
                    lineno,
                    head.column,
                    format!("unknown declaration `{other}`"),
                ))
            }
        }
    }

    let name = name.ok_or_else(|| syntax(1, 1, "missing `cid <name>` header"))?;
    graph.set_name(name);
    for (_, src, dst) in &pending_edges {
        graph.add_edge(&src.text, &dst.text)?;
    }
    graph.topological_order()?;
    Ok(Document {
        graph,
        domains,
        cpts,
    })
}

/// Parses `.cid` text. `domain` and `cpt` declarations are accepted and
/// ignored, so model files can be analyzed structurally.
pub fn parse_cid(text: &str) -> Result<CidGraph> {
    parse_document(text).map(|d| d.graph)
}

/// Canonical text: header, nodes in declaration order, then edges sorted by
/// `(src, dst)` id.
pub fn serialize_cid(graph: &CidGraph) -> String {
    let mut out = String::new();
    write_graph(&mut out, graph);
    out
}

pub(crate) fn write_graph(out: &mut String, graph: &CidGraph) {
    let _ = writeln!(out, "cid {}", graph.name());
    for node in graph.nodes() {
        let _ = write!(out, "node {} {}", node.id, node.kind);
        if let Some(label) = &node.label {
            let _ = write!(out, " label={}", quote(label));
        }
        out.push('\n');
    }
    for (s, d) in graph.edge_set() {
        let _ = writeln!(out, "edge {s} -> {d}");
    }
}
