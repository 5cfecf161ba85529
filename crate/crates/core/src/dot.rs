//! Graphviz export.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};
use crate::report::{IncentiveReport, InterventionVerdict, Verdict};

fn shape(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Chance => "ellipse",
        NodeKind::Decision => "box",
        NodeKind::Utility => "doubleoctagon",
    }
}

fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
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

fn check_report(g: &CidGraph, r: &IncentiveReport) -> Result<()> {
    if r.graph != g.name() {
        return Err(Error::ReportGraphMismatch(format!(
            "report is for `{}`, graph is `{}`",
            r.graph,
            g.name()
        )));
    }
    if r.nodes.len() != g.len() {
        return Err(Error::ReportGraphMismatch(format!(
            "report covers {} nodes, graph has {}",
            r.nodes.len(),
            g.len()
        )));
    }
    for (id, _) in &r.nodes {
        if g.index_of(id).is_none() {
            return Err(Error::ReportGraphMismatch(format!("unknown node `{id}`")));
        }
    }
    Ok(())
}

/// Renders `g` as a DOT digraph, optionally styled by an incentive report.
pub fn serialize_dot(g: &CidGraph, report: Option<&IncentiveReport>) -> Result<String> {
    if let Some(r) = report {
        check_report(g, r)?;
    }
    let mut out = String::new();
    writeln!(out, "digraph {} {{", dot_string(g.name())).unwrap();
    for node in g.nodes() {
        let mut attrs = vec![format!("shape={}", shape(node.kind))];
        if let Some(inc) = report.and_then(|r| r.get(&node.id)) {
            if inc.observation == Verdict::Yes {
                attrs.push("color=blue".into());
                attrs.push("penwidth=2".into());
            }
            let fill = match inc.intervention {
                InterventionVerdict::Direct => Some("orange"),
                InterventionVerdict::Indirect => Some("lightblue"),
                InterventionVerdict::Both => Some("orchid"),
                _ => None,
            };
            if let Some(f) = fill {
                attrs.push(format!("fillcolor={f}"));
                attrs.push("style=filled".into());
            }
        }
        if let Some(label) = &node.label {
            attrs.push(format!("label={}", dot_string(label)));
        }
        writeln!(out, "  {} [{}];", node.id, attrs.join(", ")).unwrap();
    }
    for (s, d) in g.edge_set() {
        let info = g.kind(g.require(&d)?) == NodeKind::Decision;
        if info {
            writeln!(out, "  {s} -> {d} [style=dashed];").unwrap();
        } else {
            writeln!(out, "  {s} -> {d};").unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::builtin_graph;
    use crate::criteria::analyze;

    #[test]
    fn fitness_annotations() {
        let g = builtin_graph("fitness-obs").unwrap();
        let r = analyze(&g).unwrap();
        let dot = serialize_dot(&g, Some(&r)).unwrap();
        assert!(dot.contains("StepCount [shape=ellipse, color=blue"));
        assert!(dot.contains("EstWalk [shape=ellipse]"));
        assert!(dot.contains("EstWalk -> D [style=dashed];"));
        assert!(dot.contains("PhysAct -> Fitness;"));
    }

    #[test]
    fn plain_render_has_no_styling() {
        let g = builtin_graph("qa-standard").unwrap();
        let dot = serialize_dot(&g, None).unwrap();
        assert!(!dot.contains("fillcolor"));
        assert!(dot.contains("Answer [shape=box]"));
        assert!(dot.contains("Reward [shape=doubleoctagon]"));
        let r = analyze(&g).unwrap();
        let dot = serialize_dot(&g, Some(&r)).unwrap();
        assert!(dot.contains("WorldState [shape=ellipse, fillcolor=orange, style=filled"));
    }

    #[test]
    fn mismatched_report() {
        let g = builtin_graph("qa-standard").unwrap();
        let r = analyze(&builtin_graph("qa-read").unwrap()).unwrap();
        assert!(matches!(
            serialize_dot(&g, Some(&r)),
            Err(Error::ReportGraphMismatch(_))
        ));
    }
}
