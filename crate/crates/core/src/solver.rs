//! Exact expected-utility computations by enumeration of the joint state space.
//!
//! Values are linear in each row of the decision rule and of an intervened
//! node's table, so deterministic rules attain every optimum and optima can
//! be found one context at a time.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};
use crate::model::{CidModel, Value};

/// Tolerance for equality and tie-breaking between policy values.
pub const EPS: f64 = 1e-9;
/// Largest joint state space (product of domain sizes) that is enumerated.
pub const MAX_STATES: u128 = 1_000_000;
/// Budget for `candidates x states` when searching interventions.
const MAX_WORK: u128 = 4_000_000_000;

/// Deterministic decision rule: one action index per context assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub decision: String,
    /// Observed nodes in declaration order.
    pub context: Vec<String>,
    /// Indexed like table rows: first context node most significant.
    pub rule: Vec<usize>,
}

/// Deterministic replacement of one node's table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intervention {
    pub target: String,
    pub rule: Vec<usize>,
}

fn context_sizes(model: &CidModel, g: &CidGraph, node: usize) -> Vec<usize> {
    g.parents(node).iter().map(|&p| model.domain(p).len()).collect()
}

fn decode(sizes: &[usize], mut row: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        out[k] = row % sizes[k];
        row /= sizes[k];
    }
    out
}

fn build_rule(
    model: &CidModel,
    g: &CidGraph,
    node: usize,
    f: impl Fn(&[usize]) -> usize,
) -> Result<Vec<usize>> {
    let sizes = context_sizes(model, g, node);
    let rows: usize = sizes.iter().product();
    let size = model.domain(node).len();
    (0..rows)
        .map(|r| {
            let a = f(&decode(&sizes, r));
            if a < size {
                Ok(a)
            } else {
                Err(Error::DomainMismatch(format!(
                    "value index {a} outside the domain of `{}`",
                    g.id(node)
                )))
            }
        })
        .collect()
}

impl Policy {
    /// Policy on the model's own decision context. `f` maps parent value
    /// indices to an action index.
    pub fn from_fn(model: &CidModel, f: impl Fn(&[usize]) -> usize) -> Result<Policy> {
        let g = model.graph();
        let d = g.single_decision()?;
        Ok(Policy {
            decision: g.id(d).to_string(),
            context: g.parents(d).iter().map(|&p| g.id(p).to_string()).collect(),
            rule: build_rule(model, g, d, f)?,
        })
    }

    pub fn constant(model: &CidModel, action: usize) -> Result<Policy> {
        Policy::from_fn(model, |_| action)
    }

    /// Action index chosen for the given context value indices.
    pub fn action(&self, sizes: &[usize], ctx: &[usize]) -> usize {
        let row = ctx.iter().zip(sizes).fold(0, |acc, (&v, &s)| acc * s + v);
        self.rule[row]
    }

    /// Human-readable rule, one line per context.
    pub fn describe(&self, model: &CidModel) -> Result<String> {
        let g = model.graph();
        let d = g.require(&self.decision)?;
        let ctx: Vec<usize> = self
            .context
            .iter()
            .map(|c| g.require(c))
            .collect::<Result<_>>()?;
        let sizes: Vec<usize> = ctx.iter().map(|&c| model.domain(c).len()).collect();
        let mut out = String::new();
        for (r, &a) in self.rule.iter().enumerate() {
            let vals = decode(&sizes, r);
            let lhs: Vec<String> = ctx
                .iter()
                .zip(&vals)
                .map(|(&c, &v)| format!("{}={}", g.id(c), model.domain(c).values()[v]))
                .collect();
            let lhs = if lhs.is_empty() {
                "(always)".to_string()
            } else {
                lhs.join(", ")
            };
            out.push_str(&format!(
                "{lhs} -> {}={}\n",
                self.decision,
                model.domain(d).values()[a]
            ));
        }
        Ok(out)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) = {:?}", self.decision, self.context.join(", "), self.rule)
    }
}

impl Intervention {
    pub fn from_fn(model: &CidModel, target: &str, f: impl Fn(&[usize]) -> usize) -> Result<Intervention> {
        let g = model.graph();
        let t = g.require(target)?;
        if g.kind(t) == NodeKind::Decision {
            return Err(Error::IsDecisionNode(target.to_string()));
        }
        Ok(Intervention {
            target: target.to_string(),
            rule: build_rule(model, g, t, f)?,
        })
    }
}

/// How the enumerator treats one node.
#[derive(Clone, Copy)]
enum Mode<'a> {
    Table(&'a [Vec<f64>]),
    /// Every value with weight one; the caller applies its own factor.
    Free,
}

struct Enumerator<'a> {
    model: &'a CidModel,
    graph: &'a CidGraph,
    order: Vec<usize>,
    modes: Vec<Mode<'a>>,
    utils: Vec<(usize, Vec<f64>)>,
}

fn state_count(model: &CidModel) -> u128 {
    model
        .domains()
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
}

fn check_state_space(model: &CidModel) -> Result<()> {
    let n = state_count(model);
    if n > MAX_STATES {
        Err(Error::StateSpaceTooLarge(n))
    } else {
        Ok(())
    }
}

fn indicator_rows(rule: &[usize], size: usize) -> Vec<Vec<f64>> {
    rule.iter()
        .map(|&a| (0..size).map(|v| if v == a { 1.0 } else { 0.0 }).collect())
        .collect()
}

impl<'a> Enumerator<'a> {
    fn new(model: &'a CidModel, graph: &'a CidGraph) -> Result<Self> {
        check_state_space(model)?;
        let order = graph.topological_order()?;
        let modes = (0..graph.len())
            .map(|i| match model.cpt(i) {
                Some(c) => Mode::Table(&c.rows),
                None => Mode::Free,
            })
            .collect();
        let utils = graph
            .utilities()
            .into_iter()
            .map(|u| (u, model.domain(u).numeric().expect("checked at construction")))
            .collect();
        Ok(Enumerator {
            model,
            graph,
            order,
            modes,
            utils,
        })
    }

    fn row_of(&self, node: usize, assign: &[usize]) -> usize {
        self.graph
            .parents(node)
            .iter()
            .fold(0, |acc, &p| acc * self.model.domain(p).len() + assign[p])
    }

    /// Calls `f(assign, weight, utility)` for every joint state of positive
    /// weight.
    fn run(&self, mut f: impl FnMut(&[usize], f64, f64)) {
        let mut assign = vec![0; self.graph.len()];
        self.go(0, &mut assign, 1.0, &mut f);
    }

    fn go(&self, pos: usize, assign: &mut [usize], w: f64, f: &mut impl FnMut(&[usize], f64, f64)) {
        if pos == self.order.len() {
            let u: f64 = self.utils.iter().map(|(i, vals)| vals[assign[*i]]).sum();
            f(assign, w, u);
            return;
        }
        let v = self.order[pos];
        match self.modes[v] {
            Mode::Free => {
                for val in 0..self.model.domain(v).len() {
                    assign[v] = val;
                    self.go(pos + 1, assign, w, f);
                }
            }
            Mode::Table(rows) => {
                let row = &rows[self.row_of(v, assign)];
                for (val, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        assign[v] = val;
                        self.go(pos + 1, assign, w * p, f);
                    }
                }
            }
        }
    }
}

fn check_policy(model: &CidModel, policy: &Policy) -> Result<usize> {
    let g = model.graph();
    let d = g.single_decision()?;
    let ctx: Vec<&str> = g.parents(d).iter().map(|&p| g.id(p)).collect();
    if policy.decision != g.id(d) || policy.context != ctx {
        return Err(Error::DomainMismatch(format!(
            "policy is for {}({}), model decision is {}({})",
            policy.decision,
            policy.context.join(", "),
            g.id(d),
            ctx.join(", ")
        )));
    }
    let rows: usize = context_sizes(model, g, d).iter().product();
    let size = model.domain(d).len();
    if policy.rule.len() != rows || policy.rule.iter().any(|&a| a >= size) {
        return Err(Error::DomainMismatch("policy rule does not cover the decision context".into()));
    }
    Ok(d)
}

fn check_intervention(model: &CidModel, c: &Intervention) -> Result<usize> {
    let g = model.graph();
    let t = g.require(&c.target)?;
    if g.kind(t) == NodeKind::Decision {
        return Err(Error::IsDecisionNode(c.target.clone()));
    }
    let rows: usize = context_sizes(model, g, t).iter().product();
    let size = model.domain(t).len();
    if c.rule.len() != rows || c.rule.iter().any(|&a| a >= size) {
        return Err(Error::DomainMismatch(format!(
            "intervention rule does not cover the parents of `{}`",
            c.target
        )));
    }
    Ok(t)
}

/// Runs `f` over the joint distribution induced by `policy` and the optional
/// intervention.
fn with_fixed(
    model: &CidModel,
    policy: &Policy,
    intervention: Option<&Intervention>,
    f: impl FnMut(&[usize], f64, f64),
) -> Result<()> {
    let d = check_policy(model, policy)?;
    let g = model.graph();
    let mut e = Enumerator::new(model, g)?;
    let d_rows = indicator_rows(&policy.rule, model.domain(d).len());
    e.modes[d] = Mode::Table(&d_rows);
    let c_rows;
    if let Some(c) = intervention {
        let t = check_intervention(model, c)?;
        c_rows = indicator_rows(&c.rule, model.domain(t).len());
        e.modes[t] = Mode::Table(&c_rows);
    }
    e.run(f);
    Ok(())
}

/// Probability of a partial assignment.
pub fn joint_query(
    model: &CidModel,
    policy: &Policy,
    intervention: Option<&Intervention>,
    event: &[(&str, Value)],
) -> Result<f64> {
    let mut wanted = Vec::with_capacity(event.len());
    for (id, v) in event {
        let i = model.graph().require(id)?;
        let k = model.domain(i).index_of(v).ok_or_else(|| {
            Error::DomainMismatch(format!("`{v}` is not in the domain of `{id}`"))
        })?;
        wanted.push((i, k));
    }
    let mut p = 0.0;
    with_fixed(model, policy, intervention, |a, w, _| {
        if wanted.iter().all(|&(i, k)| a[i] == k) {
            p += w;
        }
    })?;
    Ok(p)
}

/// Expected total utility.
pub fn policy_value(model: &CidModel, policy: &Policy, intervention: Option<&Intervention>) -> Result<f64> {
    let mut v = 0.0;
    with_fixed(model, policy, intervention, |_, w, u| v += w * u)?;
    Ok(v)
}

/// Expected utility of a stochastic decision rule, given as one probability
/// row per context of the model's decision.
pub fn stochastic_policy_value(model: &CidModel, rows: &[Vec<f64>]) -> Result<f64> {
    let g = model.graph();
    let d = g.single_decision()?;
    let expected: usize = context_sizes(model, g, d).iter().product();
    if rows.len() != expected || rows.iter().any(|r| r.len() != model.domain(d).len()) {
        return Err(Error::DomainMismatch("stochastic rule has the wrong shape".into()));
    }
    let mut e = Enumerator::new(model, g)?;
    e.modes[d] = Mode::Table(rows);
    let mut v = 0.0;
    e.run(|_, w, u| v += w * u);
    Ok(v)
}

fn edited_graph(g: &CidGraph, d: usize, add: Option<&str>, drop: Option<&str>) -> Result<CidGraph> {
    let mut out = g.clone();
    if let Some(x) = add {
        let xi = g.require(x)?;
        if xi == d || g.descendants_mask(d)[xi] {
            return Err(Error::EditCreatesCycle(x.to_string(), g.id(d).to_string()));
        }
        if !out.has_edge(xi, d) {
            out.add_edge_ix(xi, d)?;
        }
    }
    if let Some(x) = drop {
        let xi = g.require(x)?;
        out.remove_edge_ix(xi, d);
    }
    Ok(out)
}

/// Best value per decision context: `Σ_ctx max_d Q(ctx, d)`. Ties go to the
/// first action in domain order.
fn best_per_context(q: &[f64], size: usize) -> (f64, Vec<usize>) {
    let mut total = 0.0;
    let mut rule = Vec::with_capacity(q.len() / size.max(1));
    for row in q.chunks(size) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let a = row.iter().position(|&v| v >= max - EPS).unwrap_or(0);
        total += max;
        rule.push(a);
    }
    (total, rule)
}

/// Maximum expected utility over deterministic policies, after optionally
/// adding and then dropping an information link into the decision.
pub fn optimal_value(model: &CidModel, add_info_link: Option<&str>, drop_info_link: Option<&str>) -> Result<(f64, Policy)> {
    let g0 = model.graph();
    let d = g0.single_decision()?;
    let g = edited_graph(g0, d, add_info_link, drop_info_link)?;
    let e = Enumerator::new(model, &g)?;
    let size = model.domain(d).len();
    let rows: usize = context_sizes(model, &g, d).iter().product();
    let mut q = vec![0.0; rows * size];
    e.run(|a, w, u| q[e.row_of(d, a) * size + a[d]] += w * u);
    let (value, rule) = best_per_context(&q, size);
    let policy = Policy {
        decision: g.id(d).to_string(),
        context: g.parents(d).iter().map(|&p| g.id(p).to_string()).collect(),
        rule,
    };
    Ok((value, policy))
}

fn nonnegative(diff: f64, what: &str) -> Result<f64> {
    if diff < -EPS {
        Err(Error::Invariant(format!("{what} came out negative: {diff}")))
    } else {
        Ok(diff.max(0.0))
    }
}

/// Optimal value with the link `x -> D` minus optimal value without it.
pub fn value_of_information(model: &CidModel, x: &str) -> Result<f64> {
    let g = model.graph();
    let d = g.single_decision()?;
    let xi = g.require(x)?;
    if xi == d || g.descendants_mask(d)[xi] {
        return Err(Error::NodeDescendsFromDecision(x.to_string()));
    }
    let (with, _) = optimal_value(model, Some(x), None)?;
    let (without, _) = optimal_value(model, None, Some(x))?;
    nonnegative(with - without, "value of information")
}

struct FreeState {
    d_row: usize,
    d: usize,
    x_row: usize,
    x: usize,
    wu: f64,
}

/// Odometer over assignments of `k` slots with `base` choices each.
fn next_assignment(slots: &mut [usize], base: usize) -> bool {
    for s in slots.iter_mut() {
        *s += 1;
        if *s < base {
            return true;
        }
        *s = 0;
    }
    false
}

/// Best value over deterministic (policy, intervention on `x`) pairs minus
/// the best value over policies alone.
pub fn value_of_control(model: &CidModel, x: &str) -> Result<f64> {
    let g = model.graph();
    let d = g.single_decision()?;
    let xi = g.require(x)?;
    if xi == d {
        return Err(Error::IsDecisionNode(x.to_string()));
    }
    let (baseline, _) = optimal_value(model, None, None)?;

    let mut e = Enumerator::new(model, g)?;
    e.modes[xi] = Mode::Free;
    let mut states = Vec::new();
    e.run(|a, w, u| {
        states.push(FreeState {
            d_row: e.row_of(d, a),
            d: a[d],
            x_row: e.row_of(xi, a),
            x: a[xi],
            wu: w * u,
        })
    });
    let d_size = model.domain(d).len();
    let x_size = model.domain(xi).len();
    let d_rows: usize = context_sizes(model, g, d).iter().product();
    let x_rows: usize = context_sizes(model, g, xi).iter().product();

    // contexts that occur under some choice of policy and intervention
    let mut d_seen = vec![false; d_rows];
    let mut x_seen = vec![false; x_rows];
    for s in &states {
        d_seen[s.d_row] = true;
        x_seen[s.x_row] = true;
    }
    let d_live: Vec<usize> = (0..d_rows).filter(|&r| d_seen[r]).collect();
    let x_live: Vec<usize> = (0..x_rows).filter(|&r| x_seen[r]).collect();
    let count = |base: usize, k: usize| (base as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    let n_pol = count(d_size, d_live.len());
    let n_int = count(x_size, x_live.len());
    let work = n_pol.min(n_int).saturating_mul(states.len().max(1) as u128);
    if work > MAX_WORK {
        return Err(Error::StateSpaceTooLarge(work));
    }

    let mut best = f64::NEG_INFINITY;
    if n_int <= n_pol {
        let mut slots = vec![0; x_live.len()];
        let mut choice = vec![0; x_rows];
        let mut q = vec![0.0; d_rows * d_size];
        loop {
            for (k, &r) in x_live.iter().enumerate() {
                choice[r] = slots[k];
            }
            q.iter_mut().for_each(|v| *v = 0.0);
            for s in &states {
                if choice[s.x_row] == s.x {
                    q[s.d_row * d_size + s.d] += s.wu;
                }
            }
            best = best.max(best_per_context(&q, d_size).0);
            if !next_assignment(&mut slots, x_size) {
                break;
            }
        }
    } else {
        let mut slots = vec![0; d_live.len()];
        let mut choice = vec![0; d_rows];
        let mut w = vec![0.0; x_rows * x_size];
        loop {
            for (k, &r) in d_live.iter().enumerate() {
                choice[r] = slots[k];
            }
            w.iter_mut().for_each(|v| *v = 0.0);
            for s in &states {
                if choice[s.d_row] == s.d {
                    w[s.x_row * x_size + s.x] += s.wu;
                }
            }
            best = best.max(best_per_context(&w, x_size).0);
            if !next_assignment(&mut slots, d_size) {
                break;
            }
        }
    }
    nonnegative(best - baseline, "value of control")
}
