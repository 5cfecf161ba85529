//! Causal influence diagram graphs: node kinds, structure, validation and
//! reachability queries.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Chance,
    Decision,
    Utility,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Chance => "chance",
            NodeKind::Decision => "decision",
            NodeKind::Utility => "utility",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "chance" => Some(NodeKind::Chance),
            "decision" => Some(NodeKind::Decision),
            "utility" => Some(NodeKind::Utility),
            _ => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: Option<String>,
}

/// Direction for [`CidGraph::relatives`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ancestors,
    Descendants,
}

/// Returns true when `id` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_valid_id(id: &str) -> bool {
    let mut chars = id.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A directed graph over chance, decision and utility nodes.
///
/// Node ids are unique and edges are free of self-loops and duplicates; both
/// are enforced on insertion. Acyclicity is checked by [`CidGraph::validate`]
/// and by every analysis entry point, so that cyclic inputs can still be
/// represented and reported on. Edges into a decision node are its
/// information links.
#[derive(Debug, Clone)]
pub struct CidGraph {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl PartialEq for CidGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.nodes == other.nodes && self.edge_set() == other.edge_set()
    }
}

impl Eq for CidGraph {}

impl CidGraph {
    pub fn new(name: impl Into<String>) -> Self {
        CidGraph {
            name: name.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
            parents: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn add_node(
        &mut self,
        id: impl Into<String>,
        kind: NodeKind,
        label: Option<String>,
    ) -> Result<usize> {
        let id = id.into();
        if !is_valid_id(&id) {
            return Err(Error::InvalidNodeId(id));
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateNode(id));
        }
        let ix = self.nodes.len();
        self.index.insert(id.clone(), ix);
        self.nodes.push(Node { id, kind, label });
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        Ok(ix)
    }

    pub fn add_edge(&mut self, src: &str, dst: &str) -> Result<()> {
        let s = self
            .index_of(src)
            .ok_or_else(|| Error::UnknownNodeInEdge(src.to_string()))?;
        let d = self
            .index_of(dst)
            .ok_or_else(|| Error::UnknownNodeInEdge(dst.to_string()))?;
        self.add_edge_ix(s, d)
    }

    pub fn add_edge_ix(&mut self, s: usize, d: usize) -> Result<()> {
        if s == d {
            return Err(Error::SelfLoop(self.nodes[s].id.clone()));
        }
        if self.children[s].contains(&d) {
            return Err(Error::DuplicateEdge(
                self.nodes[s].id.clone(),
                self.nodes[d].id.clone(),
            ));
        }
        self.edges.push((s, d));
        self.children[s].push(d);
        self.parents[d].push(s);
        self.parents[d].sort_unstable();
        self.children[s].sort_unstable();
        Ok(())
    }

    /// Removes the edge `s -> d` if present; returns whether it existed.
    pub fn remove_edge_ix(&mut self, s: usize, d: usize) -> bool {
        let Some(pos) = self.edges.iter().position(|&e| e == (s, d)) else {
            return false;
        };
        self.edges.remove(pos);
        self.children[s].retain(|&c| c != d);
        self.parents[d].retain(|&p| p != s);
        true
    }

    pub fn set_kind(&mut self, id: &str, kind: NodeKind) -> Result<()> {
        let ix = self.require(id)?;
        self.nodes[ix].kind = kind;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, ix: usize) -> &Node {
        &self.nodes[ix]
    }

    pub fn id(&self, ix: usize) -> &str {
        &self.nodes[ix].id
    }

    pub fn kind(&self, ix: usize) -> NodeKind {
        self.nodes[ix].kind
    }

    /// Edges in insertion order, as node indices.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(s, d)| (self.nodes[s].id.clone(), self.nodes[d].id.clone()))
            .collect()
    }

    pub fn has_edge(&self, s: usize, d: usize) -> bool {
        self.children[s].contains(&d)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Parents sorted by declaration index.
    pub fn parents(&self, ix: usize) -> &[usize] {
        &self.parents[ix]
    }

    /// Children sorted by declaration index.
    pub fn children(&self, ix: usize) -> &[usize] {
        &self.children[ix]
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.nodes[i].kind == kind).collect()
    }

    pub fn decisions(&self) -> Vec<usize> {
        self.nodes_of_kind(NodeKind::Decision)
    }

    pub fn utilities(&self) -> Vec<usize> {
        self.nodes_of_kind(NodeKind::Utility)
    }

    /// Edges whose destination is a decision node.
    pub fn information_links(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(_, d)| self.nodes[d].kind == NodeKind::Decision)
            .collect()
    }

    /// The unique decision node of an acyclic single-decision graph.
    pub fn single_decision(&self) -> Result<usize> {
        let ds = self.decisions();
        if ds.len() != 1 {
            return Err(Error::NotSingleDecision(ds.len()));
        }
        self.topological_order()?;
        Ok(ds[0])
    }

    /// Reachability mask along directed edges, excluding the start nodes
    /// unless they are reachable through a path of length at least one.
    pub fn descendants_mask(&self, ix: usize) -> Vec<bool> {
        self.reach(&[ix], |g, v| g.children(v))
    }

    pub fn ancestors_mask(&self, ix: usize) -> Vec<bool> {
        self.reach(&[ix], |g, v| g.parents(v))
    }

    /// Mask of the seeds together with all their ancestors.
    pub fn ancestral_closure(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = self.reach(seeds, |g, v| g.parents(v));
        for &s in seeds {
            mask[s] = true;
        }
        mask
    }

    fn reach<'a, F>(&'a self, seeds: &[usize], next: F) -> Vec<bool>
    where
        F: Fn(&'a Self, usize) -> &'a [usize],
    {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for &w in next(self, v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Strict ancestors or descendants of `id` (directed paths of length >= 1).
    pub fn relatives(&self, id: &str, relation: Relation) -> Result<BTreeSet<String>> {
        let ix = self.require(id)?;
        let mask = match relation {
            Relation::Ancestors => self.ancestors_mask(ix),
            Relation::Descendants => self.descendants_mask(ix),
        };
        Ok(mask
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m)
            .map(|(i, _)| self.nodes[i].id.clone())
            .collect())
    }

    /// Kahn's algorithm; ties resolved by declaration order.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(Error::CycleDetected(self.find_cycle()))
        }
    }

    fn find_cycle(&self) -> Vec<String> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let n = self.len();
        let mut state = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(g: &CidGraph, v: usize, state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            for &c in g.children(v) {
                if state[c] == 1 {
                    let start = stack.iter().position(|&s| s == c).unwrap();
                    let mut cyc = stack[start..].to_vec();
                    cyc.push(c);
                    return Some(cyc);
                }
                if state[c] == 0 {
                    if let Some(cyc) = dfs(g, c, state, stack) {
                        return Some(cyc);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        for v in 0..n {
            if state[v] == 0 {
                if let Some(cyc) = dfs(self, v, &mut state, &mut stack) {
                    return cyc.into_iter().map(|i| self.nodes[i].id.clone()).collect();
                }
            }
        }
        Vec::new()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if let Err(e) = self.topological_order() {
            report.errors.push(Issue::from_error(&e, None));
        }
        if self.utilities().is_empty() {
            report.errors.push(Issue {
                code: "NoUtility".into(),
                message: "graph has no utility node".into(),
                subject: None,
            });
        }
        let decisions = self.decisions();
        if decisions.len() != 1 {
            let (code, message) = if decisions.is_empty() {
                ("NoDecision", "graph has no decision node; incentive analysis needs exactly one".to_string())
            } else {
                (
                    "MultiDecision",
                    format!(
                        "graph has {} decision nodes; incentive analysis needs exactly one",
                        decisions.len()
                    ),
                )
            };
            report.warnings.push(Issue {
                code: code.into(),
                message,
                subject: None,
            });
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub code: String,
    pub message: String,
    /// Node id or `src->dst` edge reference, when the issue has one.
    pub subject: Option<String>,
}

impl Issue {
    pub fn from_error(e: &Error, subject: Option<String>) -> Self {
        Issue {
            code: e.code().to_string(),
            message: e.to_string(),
            subject,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}
