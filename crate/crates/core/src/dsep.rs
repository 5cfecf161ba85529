//! d-separation (Bayes-ball reachability) and explicit active-path search.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};

/// Orientation of one edge of an undirected path, relative to travel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// The edge points from the current node to the next one.
    Forward,
    /// The edge points from the next node back to the current one.
    Backward,
}

/// A simple path through the skeleton of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedPath {
    pub nodes: Vec<String>,
    /// `steps[i]` orients the edge between `nodes[i]` and `nodes[i + 1]`.
    pub steps: Vec<Orientation>,
}

impl UndirectedPath {
    pub(crate) fn from_ix(g: &CidGraph, path: &[usize]) -> Self {
        let steps = path
            .windows(2)
            .map(|w| {
                if g.has_edge(w[0], w[1]) {
                    Orientation::Forward
                } else {
                    Orientation::Backward
                }
            })
            .collect();
        UndirectedPath {
            nodes: path.iter().map(|&i| g.id(i).to_string()).collect(),
            steps,
        }
    }

    /// Edge count.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.steps.iter().all(|&o| o == Orientation::Forward)
    }

    pub fn first(&self) -> &str {
        &self.nodes[0]
    }

    pub fn last(&self) -> &str {
        self.nodes.last().expect("paths hold at least one node")
    }
}

/// A directed path from the decision to a utility node together with an
/// active path from the observed node to the same utility node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportingPair {
    pub frontdoor: UndirectedPath,
    pub backdoor: UndirectedPath,
    /// First node of the backdoor path that also lies on the frontdoor path.
    pub merge_node: String,
}

/// Index form of [`SupportingPair`], used by the model constructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PairIx {
    pub front: Vec<usize>,
    pub back: Vec<usize>,
    pub merge: usize,
}

pub(crate) fn mask_of(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in set {
        m[i] = true;
    }
    m
}

/// Nodes reachable from `sources` along paths that are active given `z`.
///
/// Runs over `(node, direction)` states in time linear in the number of
/// edges. Endpoints count as reached whatever their conditioning status; the
/// sources themselves are only marked when some active path leads back.
pub(crate) fn reachable(g: &CidGraph, sources: &[usize], z: &[bool]) -> Vec<bool> {
    let n = g.len();
    let zs: Vec<usize> = (0..n).filter(|&i| z[i]).collect();
    let anc = g.ancestral_closure(&zs);
    // up = arrived from a child, down = arrived from a parent
    let mut seen_up = vec![false; n];
    let mut seen_down = vec![false; n];
    let mut reached = vec![false; n];
    let mut queue: VecDeque<(usize, bool)> = VecDeque::new();
    for &s in sources {
        for &p in g.parents(s) {
            queue.push_back((p, true));
        }
        for &c in g.children(s) {
            queue.push_back((c, false));
        }
    }
    while let Some((v, up)) = queue.pop_front() {
        let seen = if up { &mut seen_up } else { &mut seen_down };
        if seen[v] {
            continue;
        }
        seen[v] = true;
        reached[v] = true;
        if up {
            if !z[v] {
                queue.extend(g.parents(v).iter().map(|&p| (p, true)));
                queue.extend(g.children(v).iter().map(|&c| (c, false)));
            }
        } else {
            if !z[v] {
                queue.extend(g.children(v).iter().map(|&c| (c, false)));
            }
            if anc[v] {
                queue.extend(g.parents(v).iter().map(|&p| (p, true)));
            }
        }
    }
    reached
}

fn resolve(g: &CidGraph, ids: &[&str]) -> Result<Vec<usize>> {
    ids.iter().map(|id| g.require(id)).collect()
}

/// True iff every path between a node of `xs` and a node of `ys` is blocked
/// by `zs`. Paths of length 0 and 1 are always active.
pub fn d_separated(g: &CidGraph, xs: &[&str], ys: &[&str], zs: &[&str]) -> Result<bool> {
    let x = resolve(g, xs)?;
    let y = resolve(g, ys)?;
    let z = resolve(g, zs)?;
    if let Some(&common) = x.iter().find(|i| y.contains(i)) {
        return Err(Error::OverlappingSets(g.id(common).to_string()));
    }
    g.topological_order()?;
    let reached = reachable(g, &x, &mask_of(g.len(), &z));
    Ok(!y.iter().any(|&i| reached[i]))
}

/// Whether the middle node of `a - b - c` lets an active path through.
pub(crate) fn triple_active(g: &CidGraph, a: usize, b: usize, c: usize, z: &[bool], anc: &[bool]) -> bool {
    if g.has_edge(a, b) && g.has_edge(c, b) {
        anc[b]
    } else {
        !z[b]
    }
}

/// Checks that `path` is simple, follows graph edges, and is active given `z`.
pub(crate) fn path_is_active(g: &CidGraph, path: &[usize], z: &[bool]) -> bool {
    let zs: Vec<usize> = (0..g.len()).filter(|&i| z[i]).collect();
    let anc = g.ancestral_closure(&zs);
    let distinct: BTreeSet<usize> = path.iter().copied().collect();
    distinct.len() == path.len()
        && path
            .windows(2)
            .all(|w| g.has_edge(w[0], w[1]) || g.has_edge(w[1], w[0]))
        && path
            .windows(3)
            .all(|w| triple_active(g, w[0], w[1], w[2], z, &anc))
}

fn sorted_by_id(g: &CidGraph, mut v: Vec<usize>) -> Vec<usize> {
    v.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
    v
}

fn neighbours_by_id(g: &CidGraph, v: usize) -> Vec<usize> {
    let all: Vec<usize> = g.parents(v).iter().chain(g.children(v)).copied().collect();
    sorted_by_id(g, all)
}

/// Shortest simple path from `start` to any `target`, active given `z`,
/// never entering `forbidden`. Ties go to the lexicographically smallest id
/// sequence.
pub(crate) fn shortest_active_path(
    g: &CidGraph,
    start: usize,
    target: &[bool],
    z: &[bool],
    forbidden: &[bool],
) -> Option<Vec<usize>> {
    let zs: Vec<usize> = (0..g.len()).filter(|&i| z[i]).collect();
    let anc = g.ancestral_closure(&zs);
    if target[start] {
        return Some(vec![start]);
    }
    let mut queue: VecDeque<Vec<usize>> = VecDeque::from([vec![start]]);
    while let Some(path) = queue.pop_front() {
        let v = *path.last().unwrap();
        for w in neighbours_by_id(g, v) {
            if forbidden[w] || path.contains(&w) {
                continue;
            }
            if path.len() >= 2 && !triple_active(g, path[path.len() - 2], v, w, z, &anc) {
                continue;
            }
            let mut next = path.clone();
            next.push(w);
            if target[w] {
                return Some(next);
            }
            queue.push_back(next);
        }
    }
    None
}

/// Shortest directed path from `start` to `goal` (length 0 when equal),
/// with ties broken by id sequence. Interior nodes must satisfy `allow`.
pub(crate) fn shortest_directed_path(
    g: &CidGraph,
    start: usize,
    goal: usize,
    allow: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    if start == goal {
        return Some(vec![start]);
    }
    let mut prev: Vec<Option<usize>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for c in sorted_by_id(g, g.children(v).to_vec()) {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            prev[c] = Some(v);
            if c == goal {
                let mut path = vec![c];
                let mut cur = c;
                while let Some(p) = prev[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            if allow(c) {
                queue.push_back(c);
            }
        }
    }
    None
}

/// Depth-first search for a simple active path from `start` to a target that
/// is not directed (contains at least one backward edge). Nodes in
/// `forbidden` are never entered.
pub(crate) fn exists_undirected_active_path(
    g: &CidGraph,
    start: usize,
    target: &[bool],
    z: &[bool],
    forbidden: &[bool],
) -> bool {
    let zs: Vec<usize> = (0..g.len()).filter(|&i| z[i]).collect();
    let anc = g.ancestral_closure(&zs);
    let mut on_path = vec![false; g.len()];
    on_path[start] = true;
    let mut path = vec![start];

    fn go(
        g: &CidGraph,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        backward: bool,
        ctx: (&[bool], &[bool], &[bool], &[bool]),
    ) -> bool {
        let (target, z, anc, forbidden) = ctx;
        let v = *path.last().unwrap();
        let prev = path.len().checked_sub(2).map(|i| path[i]);
        for &w in g.parents(v).iter().chain(g.children(v)) {
            if on_path[w] || forbidden[w] {
                continue;
            }
            if let Some(p) = prev {
                if !triple_active(g, p, v, w, z, anc) {
                    continue;
                }
            }
            let back = backward || g.has_edge(w, v);
            if target[w] && back {
                return true;
            }
            path.push(w);
            on_path[w] = true;
            let found = go(g, path, on_path, back, ctx);
            on_path[w] = false;
            path.pop();
            if found {
                return true;
            }
        }
        false
    }

    go(g, &mut path, &mut on_path, false, (target, z, &anc, forbidden))
}

/// Conditioning set `{D} ∪ Pa_D \ {x}` as a mask.
pub(crate) fn decision_context_mask(g: &CidGraph, d: usize, x: Option<usize>) -> Vec<bool> {
    let mut z = mask_of(g.len(), g.parents(d));
    z[d] = true;
    if let Some(x) = x {
        z[x] = false;
    }
    z
}

/// Utility nodes reachable from `d` by a directed path of length >= 1.
pub(crate) fn influenceable_utilities(g: &CidGraph, d: usize) -> Vec<bool> {
    let desc = g.descendants_mask(d);
    (0..g.len())
        .map(|i| desc[i] && g.kind(i) == NodeKind::Utility)
        .collect()
}

pub(crate) fn supporting_pair_ix(g: &CidGraph, x: usize) -> Result<PairIx> {
    let d = g.single_decision()?;
    let desc = g.descendants_mask(d);
    if x == d || desc[x] {
        return Err(Error::NodeDescendsFromDecision(g.id(x).to_string()));
    }
    let z = decision_context_mask(g, d, Some(x));
    let targets = influenceable_utilities(g, d);
    let forbidden = mask_of(g.len(), &[d]);
    let back = shortest_active_path(g, x, &targets, &z, &forbidden)
        .ok_or_else(|| Error::NoIncentive(g.id(x).to_string()))?;
    if !path_is_active(g, &back, &z) {
        return Err(Error::Invariant("backdoor path is not active".into()));
    }

    // The backdoor path always ends in a directed run into the utility; the
    // merge node is the first node on that run that descends from D.
    let mut run_start = back.len() - 1;
    while run_start > 0 && g.has_edge(back[run_start - 1], back[run_start]) {
        run_start -= 1;
    }
    let merge_pos = (run_start..back.len())
        .find(|&i| desc[back[i]])
        .ok_or_else(|| Error::Invariant("backdoor path never meets a descendant of D".into()))?;
    let merge = back[merge_pos];
    let is_util = |v: usize| g.kind(v) != NodeKind::Utility;
    let head = shortest_directed_path(g, d, merge, is_util)
        .or_else(|| shortest_directed_path(g, d, merge, |_| true))
        .ok_or_else(|| Error::Invariant("merge node not reachable from D".into()))?;
    let mut front = head;
    front.extend_from_slice(&back[merge_pos + 1..]);
    if !front.windows(2).all(|w| g.has_edge(w[0], w[1])) {
        return Err(Error::Invariant("frontdoor path is not directed".into()));
    }
    Ok(PairIx { front, back, merge })
}

/// Finds a supporting pair for `x`: the backdoor path is the shortest active
/// path from `x` to an influenceable utility given `{D} ∪ Pa_D \ {x}` (ties by
/// id sequence), and the frontdoor path is a shortest directed path from the
/// decision to the merge node followed by the backdoor's tail.
pub fn find_supporting_pair(g: &CidGraph, x: &str) -> Result<SupportingPair> {
    let xi = g.require(x)?;
    let pair = supporting_pair_ix(g, xi)?;
    Ok(SupportingPair {
        frontdoor: UndirectedPath::from_ix(g, &pair.front),
        backdoor: UndirectedPath::from_ix(g, &pair.back),
        merge_node: g.id(pair.merge).to_string(),
    })
}
