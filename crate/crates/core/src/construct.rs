//! Explicit parameterizations witnessing incentives.
//!
//! Node values are tuples of integer components. Most components live in
//! `{-1, 1}`: forks are uniform, chain nodes copy their predecessor on the
//! path, colliders multiply their two path neighbours. Extra components carry
//! collider values down to an observed parent of the decision. Nodes that
//! play no part get the single value `0`.

use std::collections::{BTreeSet, VecDeque};

use crate::criteria::{intervention_ix, reduce, requisite_mask};
use crate::dsep::supporting_pair_ix;
use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};
use crate::model::{CidModel, Domain, Value};

type Src = (usize, usize);

#[derive(Debug, Clone)]
enum Def {
    Decision,
    Uniform,
    Const { value: i64, set: Vec<i64> },
    Copy(Src),
    Product(Vec<Src>),
    /// Source value times a fresh uniform sign.
    GatedUniform(Src),
}

struct Builder<'a> {
    g: &'a CidGraph,
    comps: Vec<Vec<Def>>,
    /// Multiplier for single-component utility nodes.
    scale: Vec<i64>,
}

impl<'a> Builder<'a> {
    fn new(g: &'a CidGraph) -> Self {
        Builder {
            g,
            comps: vec![Vec::new(); g.len()],
            scale: vec![1; g.len()],
        }
    }

    fn push(&mut self, node: usize, def: Def) -> usize {
        self.comps[node].push(def);
        self.comps[node].len() - 1
    }

    fn finish(self) -> Result<CidModel> {
        let g = self.g;
        let n = g.len();
        let order = g.topological_order()?;
        let mut sets: Vec<Vec<Vec<i64>>> = vec![Vec::new(); n];
        let mut tuples: Vec<Vec<Vec<i64>>> = vec![Vec::new(); n];
        for &v in &order {
            let mut vs = Vec::new();
            for def in &self.comps[v] {
                let set: BTreeSet<i64> = match def {
                    Def::Decision | Def::Uniform => [-1, 1].into(),
                    Def::Const { set, .. } => set.iter().copied().collect(),
                    Def::Copy((p, c)) => sets[*p][*c].iter().copied().collect(),
                    Def::Product(srcs) => srcs.iter().fold(BTreeSet::from([1]), |acc, (p, c)| {
                        acc.iter()
                            .flat_map(|a| sets[*p][*c].iter().map(move |b| a * b))
                            .collect()
                    }),
                    Def::GatedUniform((p, c)) => sets[*p][*c]
                        .iter()
                        .flat_map(|a| [-a, *a])
                        .collect(),
                };
                vs.push(set.into_iter().collect::<Vec<_>>());
            }
            tuples[v] = cartesian(&vs);
            sets[v] = vs;
        }

        let mut domains = Vec::with_capacity(n);
        for (v, tup) in tuples.iter().enumerate() {
            let utility = g.kind(v) == NodeKind::Utility;
            let values = tup
                .iter()
                .map(|t| match (t.len(), utility) {
                    (0, _) => Value::int(0),
                    (1, true) => Value::int(self.scale[v] * t[0]),
                    (1, false) => Value::int(t[0]),
                    (_, true) => Value::int(
                        t.iter()
                            .enumerate()
                            .map(|(j, &c)| c * 3i64.pow(j as u32))
                            .sum(),
                    ),
                    (_, false) => {
                        let parts: Vec<String> = t.iter().map(|c| c.to_string()).collect();
                        Value::Label(format!("({})", parts.join(",")))
                    }
                })
                .collect();
            domains.push(Domain::new(values)?);
        }

        let mut tables = Vec::with_capacity(n);
        for v in 0..n {
            if g.kind(v) == NodeKind::Decision {
                tables.push(None);
                continue;
            }
            let parents = g.parents(v);
            let sizes: Vec<usize> = parents.iter().map(|&p| tuples[p].len()).collect();
            let rows: usize = sizes.iter().product();
            let mut table = Vec::with_capacity(rows);
            for r in 0..rows {
                let mut idx = vec![0; parents.len()];
                let mut rest = r;
                for k in (0..parents.len()).rev() {
                    idx[k] = rest % sizes[k];
                    rest /= sizes[k];
                }
                let lookup = |(p, c): Src| -> i64 {
                    let k = parents
                        .iter()
                        .position(|&q| q == p)
                        .expect("component sources are graph parents");
                    tuples[p][idx[k]][c]
                };
                // independent distribution per component
                let dists: Vec<Vec<(i64, f64)>> = self.comps[v]
                    .iter()
                    .map(|def| match def {
                        Def::Decision => unreachable!("decisions have no table"),
                        Def::Uniform => vec![(-1, 0.5), (1, 0.5)],
                        Def::Const { value, .. } => vec![(*value, 1.0)],
                        Def::Copy(s) => vec![(lookup(*s), 1.0)],
                        Def::Product(srcs) => {
                            vec![(srcs.iter().map(|&s| lookup(s)).product(), 1.0)]
                        }
                        Def::GatedUniform(s) => {
                            let a = lookup(*s);
                            if a == 0 {
                                vec![(0, 1.0)]
                            } else {
                                vec![(-a, 0.5), (a, 0.5)]
                            }
                        }
                    })
                    .collect();
                let mut row = vec![0.0; tuples[v].len()];
                let mut combo: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
                for dist in &dists {
                    combo = combo
                        .iter()
                        .flat_map(|(t, p)| {
                            dist.iter().map(move |&(x, q)| {
                                let mut t = t.clone();
                                t.push(x);
                                (t, p * q)
                            })
                        })
                        .collect();
                }
                for (t, p) in combo {
                    let pos = tuples[v]
                        .iter()
                        .position(|u| *u == t)
                        .ok_or_else(|| Error::Invariant(format!("value {t:?} outside the domain of `{}`", g.id(v))))?;
                    row[pos] += p;
                }
                table.push(row);
            }
            tables.push(Some(table));
        }
        CidModel::new(g.clone(), domains, tables)
    }
}

fn cartesian(sets: &[Vec<i64>]) -> Vec<Vec<i64>> {
    sets.iter().fold(vec![Vec::new()], |acc, set| {
        acc.iter()
            .flat_map(|t| {
                set.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect()
    })
}

/// Shortest directed path from `start` into `target`, never entering
/// `forbidden`; ties by id sequence.
fn directed_path_to(g: &CidGraph, start: usize, target: &[bool], forbidden: &[bool]) -> Option<Vec<usize>> {
    if target[start] {
        return Some(vec![start]);
    }
    let mut prev: Vec<Option<usize>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let mut kids = g.children(v).to_vec();
        kids.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
        for c in kids {
            if seen[c] || forbidden[c] {
                continue;
            }
            seen[c] = true;
            prev[c] = Some(v);
            if target[c] {
                let mut path = vec![c];
                while let Some(p) = prev[*path.last().unwrap()] {
                    path.push(p);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(c);
        }
    }
    None
}

/// Where the main component of the observed node comes from.
enum ObservedRole {
    /// First node of the backdoor path is a fork.
    Fork,
    /// Copies its parent on the backdoor path.
    CopyOf(usize),
}

struct Scaffold<'a> {
    b: Builder<'a>,
    observed: usize,
    role: ObservedRole,
}

/// Builds the completeness construction for observed node `x`. Every node on
/// the scaffold keeps its path value in component 0.
fn scaffold(g: &CidGraph, x: usize) -> Result<Scaffold<'_>> {
    let d = g.single_decision()?;
    let pair = supporting_pair_ix(g, x)?;
    let back = &pair.back;
    let front = &pair.front;
    let mut b = Builder::new(g);
    b.push(d, Def::Decision);

    let merge_pos = back.iter().position(|&v| v == pair.merge).expect("merge lies on backdoor");
    let head_len = front.iter().position(|&v| v == pair.merge).expect("merge lies on frontdoor");
    for i in 1..head_len {
        b.push(front[i], Def::Copy((front[i - 1], 0)));
    }
    let k = front[1..head_len]
        .iter()
        .filter(|&&v| g.kind(v) == NodeKind::Utility)
        .count() as i64;

    let m = back.len() - 1;
    let mut role = ObservedRole::Fork;
    let mut colliders = Vec::new();
    for i in 0..=m {
        let v = back[i];
        let fwd_in = i > 0 && g.has_edge(back[i - 1], v);
        let back_in = i < m && g.has_edge(back[i + 1], v);
        let def = if i == merge_pos {
            Def::Product(vec![(front[head_len - 1], 0), (back[i - 1], 0)])
        } else if i > merge_pos || (fwd_in && !back_in) {
            Def::Copy((back[i - 1], 0))
        } else if fwd_in && back_in {
            colliders.push(v);
            Def::Product(vec![(back[i - 1], 0), (back[i + 1], 0)])
        } else if back_in {
            if i == 0 {
                role = ObservedRole::CopyOf(back[1]);
            }
            Def::Copy((back[i + 1], 0))
        } else {
            Def::Uniform
        };
        b.push(v, def);
    }
    b.scale[back[m]] = k + 1;

    // carry each collider's value to an observed parent of D other than x
    let mut target = vec![false; g.len()];
    for &p in g.parents(d) {
        target[p] = p != x;
    }
    let mut forbidden = g.descendants_mask(d);
    forbidden[d] = true;
    for c in colliders {
        let wire = directed_path_to(g, c, &target, &forbidden).ok_or_else(|| {
            Error::Invariant(format!(
                "collider `{}` does not reach an observation of the decision",
                g.id(c)
            ))
        })?;
        let mut src = (c, 0);
        for &w in &wire[1..] {
            let comp = b.push(w, Def::Copy(src));
            src = (w, comp);
        }
    }
    Ok(Scaffold { b, observed: x, role })
}

/// Model on `g` in which observing `x` is worth exactly one unit of utility:
/// with the link `x -> D` the optimal policy earns 1 more than without it.
pub fn completeness_construction(g: &CidGraph, x: &str) -> Result<CidModel> {
    let xi = g.require(x)?;
    scaffold(g, xi)?.b.finish()
}

fn copy_chain(g: &CidGraph, path: &[usize]) -> Result<CidModel> {
    let mut b = Builder::new(g);
    b.push(
        path[0],
        Def::Const {
            value: 0,
            set: vec![0, 1],
        },
    );
    for w in path.windows(2) {
        b.push(w[1], Def::Copy((w[0], 0)));
    }
    b.finish()
}

/// Model on `g` in which intervening on `x` is worth at least one unit of
/// utility. Requires an intervention incentive on `x`.
pub fn control_construction(g: &CidGraph, x: &str) -> Result<CidModel> {
    let d = g.single_decision()?;
    let xi = g.require(x)?;
    if xi == d {
        return Err(Error::IsDecisionNode(x.to_string()));
    }
    let gs = reduce(g, d);
    if !intervention_ix(&gs, d, xi)?.is_some() {
        return Err(Error::NoIncentive(x.to_string()));
    }

    // a directed path to a utility that avoids D: clamp x to 0 and copy it on
    let utils: Vec<bool> = (0..g.len()).map(|i| g.kind(i) == NodeKind::Utility).collect();
    let no_d: Vec<bool> = (0..g.len()).map(|i| i == d).collect();
    if let Some(path) = directed_path_to(&gs, xi, &utils, &no_d) {
        return copy_chain(g, &path);
    }

    let req = requisite_mask(g, d);
    if req[xi] {
        // x observed: hide its value behind a clamp the intervention can lift
        let mut s = scaffold(g, xi)?;
        s.b.comps[xi][0] = Def::Const {
            value: 0,
            set: vec![-1, 0, 1],
        };
        return s.b.finish();
    }

    // x feeds a requisite observation o: gate o's value on a flag set at x
    let mut parent_of_d = vec![false; g.len()];
    for &p in gs.parents(d) {
        parent_of_d[p] = true;
    }
    let path = directed_path_to(&gs, xi, &parent_of_d, &no_d)
        .ok_or_else(|| Error::Invariant(format!("`{x}` has no route to the decision")))?;
    let o = *path.last().unwrap();
    let mut s = scaffold(g, o)?;
    let mut gate = (
        xi,
        s.b.push(
            xi,
            Def::Const {
                value: 0,
                set: vec![0, 1],
            },
        ),
    );
    for &w in &path[1..path.len() - 1] {
        let c = s.b.push(w, Def::Copy(gate));
        gate = (w, c);
    }
    debug_assert_eq!(s.observed, o);
    s.b.comps[o][0] = match s.role {
        ObservedRole::Fork => Def::GatedUniform(gate),
        ObservedRole::CopyOf(p) => Def::Product(vec![gate, (p, 0)]),
    };
    s.b.finish()
}
