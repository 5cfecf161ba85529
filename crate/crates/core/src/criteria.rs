//! Graphical incentive criteria for single-decision graphs.

use crate::dsep::{
    decision_context_mask, exists_undirected_active_path, influenceable_utilities, mask_of,
    reachable,
};
use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};
use crate::report::{IncentiveClass, IncentiveReport, NodeIncentives, Verdict};

pub(crate) fn observation_ix(g: &CidGraph, d: usize, x: usize) -> bool {
    let targets = influenceable_utilities(g, d);
    let z = decision_context_mask(g, d, Some(x));
    let reached = reachable(g, &[x], &z);
    (0..g.len()).any(|i| targets[i] && reached[i])
}

/// Requisite parents of `d` as a mask.
pub(crate) fn requisite_mask(g: &CidGraph, d: usize) -> Vec<bool> {
    let mut m = vec![false; g.len()];
    for &p in g.parents(d) {
        m[p] = observation_ix(g, d, p);
    }
    m
}

pub(crate) fn reduce(g: &CidGraph, d: usize) -> CidGraph {
    let req = requisite_mask(g, d);
    let mut out = g.clone();
    for &p in g.parents(d) {
        if !req[p] {
            out.remove_edge_ix(p, d);
        }
    }
    out
}

fn descendants_or_self(g: &CidGraph, x: usize) -> Vec<bool> {
    let mut m = g.descendants_mask(x);
    m[x] = true;
    m
}

/// Nodes reachable from `x` by directed paths that never enter `avoid`.
fn directed_reach_avoiding(g: &CidGraph, x: usize, avoid: usize) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    seen[x] = true;
    let mut stack = vec![x];
    while let Some(v) = stack.pop() {
        for &c in g.children(v) {
            if c != avoid && !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    seen
}

/// Intervention class of `x` in the reduced graph `gs`.
pub(crate) fn intervention_ix(gs: &CidGraph, d: usize, x: usize) -> Result<IncentiveClass> {
    let n = gs.len();
    let is_util: Vec<bool> = (0..n).map(|i| gs.kind(i) == NodeKind::Utility).collect();
    let reach = descendants_or_self(gs, x);
    if !(0..n).any(|i| reach[i] && is_util[i]) {
        return Ok(IncentiveClass::None);
    }
    let avoiding = directed_reach_avoiding(gs, x, d);
    let direct = (0..n).any(|i| avoiding[i] && is_util[i]);

    let targets = influenceable_utilities(gs, d);
    let through_d = reach[d] && targets.iter().any(|&t| t);
    let indirect = through_d && {
        let z = decision_context_mask(gs, d, None);
        let no_d = mask_of(n, &[d]);
        let blocked = mask_of(n, &[d, x]);
        exists_undirected_active_path(gs, x, &targets, &z, &no_d)
            || gs.parents(d).iter().any(|&o| {
                o != x
                    && reach[o]
                    && exists_undirected_active_path(gs, o, &targets, &z, &blocked)
            })
    };
    if !direct && !indirect {
        return Err(Error::Invariant(format!(
            "directed path from `{}` to a utility is neither direct nor indirect",
            gs.id(x)
        )));
    }
    Ok(IncentiveClass::from_flags(direct, indirect))
}

/// True iff `x` is d-connected to some utility node that descends from the
/// decision, given the decision and its other parents.
pub fn observation_incentive(g: &CidGraph, x: &str) -> Result<bool> {
    let d = g.single_decision()?;
    let xi = g.require(x)?;
    if xi == d || g.descendants_mask(d)[xi] {
        return Err(Error::NodeDescendsFromDecision(x.to_string()));
    }
    Ok(observation_ix(g, d, xi))
}

/// Parents of the decision that satisfy the observation criterion, in
/// declaration order.
pub fn requisite_observations(g: &CidGraph) -> Result<Vec<String>> {
    let d = g.single_decision()?;
    let req = requisite_mask(g, d);
    Ok((0..g.len())
        .filter(|&i| req[i])
        .map(|i| g.id(i).to_string())
        .collect())
}

/// Copy of `g` without its nonrequisite information links.
pub fn reduced_graph(g: &CidGraph) -> Result<CidGraph> {
    let d = g.single_decision()?;
    Ok(reduce(g, d))
}

/// Classifies the intervention incentive on `x`. A directed path to a utility
/// in the reduced graph gives an incentive; it is direct if such a path
/// avoids the decision and indirect if one passes the decision while an
/// active non-directed path to an influenceable utility also exists, either
/// from `x` or from a requisite observation downstream of `x`.
pub fn intervention_incentive(g: &CidGraph, x: &str) -> Result<IncentiveClass> {
    let d = g.single_decision()?;
    let xi = g.require(x)?;
    if xi == d {
        return Err(Error::IsDecisionNode(x.to_string()));
    }
    intervention_ix(&reduce(g, d), d, xi)
}

/// Classifies every node of a single-decision graph.
pub fn analyze(g: &CidGraph) -> Result<IncentiveReport> {
    let d = g.single_decision()?;
    let desc = g.descendants_mask(d);
    let req = requisite_mask(g, d);
    let gs = reduce(g, d);
    let mut nodes = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let observation = if i == d || desc[i] {
            Verdict::NotApplicable
        } else {
            Verdict::from_bool(observation_ix(g, d, i))
        };
        let requisite = if g.has_edge(i, d) {
            Verdict::from_bool(req[i])
        } else {
            Verdict::NotApplicable
        };
        let intervention = if i == d {
            crate::report::InterventionVerdict::NotApplicable
        } else {
            intervention_ix(&gs, d, i)?.into()
        };
        nodes.push((
            g.id(i).to_string(),
            NodeIncentives {
                observation,
                requisite,
                intervention,
            },
        ));
    }
    Ok(IncentiveReport {
        graph: g.name().to_string(),
        nodes,
    })
}
