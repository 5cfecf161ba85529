//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's d-separation or solver code.
#![allow(dead_code)]

use cidkit::{CidGraph, CidModel, NodeKind};

/// All simple paths between `x` and `y` in the skeleton.
pub fn simple_paths(g: &CidGraph, x: usize, y: usize) -> Vec<Vec<usize>> {
    fn go(g: &CidGraph, y: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == y {
            out.push(path.clone());
            return;
        }
        let nbrs: Vec<usize> = g.parents(v).iter().chain(g.children(v)).copied().collect();
        for w in nbrs {
            if !path.contains(&w) {
                path.push(w);
                go(g, y, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, y, &mut vec![x], &mut out);
    out
}

fn is_descendant_or_self(g: &CidGraph, a: usize, b: usize) -> bool {
    // is b reachable from a (length >= 0)
    let mut stack = vec![a];
    let mut seen = vec![false; g.len()];
    while let Some(v) = stack.pop() {
        if v == b {
            return true;
        }
        if !seen[v] {
            seen[v] = true;
            stack.extend(g.children(v).iter().copied());
        }
    }
    false
}

/// Chain/fork/collider rules applied to one explicit path.
pub fn path_active(g: &CidGraph, path: &[usize], z: &[usize]) -> bool {
    path.windows(3).all(|w| {
        let (a, b, c) = (w[0], w[1], w[2]);
        let collider = g.has_edge(a, b) && g.has_edge(c, b);
        if collider {
            z.iter().any(|&zz| is_descendant_or_self(g, b, zz))
        } else {
            !z.contains(&b)
        }
    })
}

pub fn brute_d_separated(g: &CidGraph, x: usize, y: usize, z: &[usize]) -> bool {
    !simple_paths(g, x, y).iter().any(|p| path_active(g, p, z))
}

/// Full joint table over all assignments, with the decision following
/// `policy(context values) -> action` on the given context nodes.
pub fn joint_table(
    m: &CidModel,
    ctx: &[usize],
    policy: &dyn Fn(&[usize]) -> usize,
) -> Vec<(Vec<usize>, f64)> {
    let g = m.graph();
    let n = g.len();
    let sizes: Vec<usize> = (0..n).map(|i| m.domain(i).len()).collect();
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut a = vec![0; n];
        let mut rest = code;
        for i in 0..n {
            a[i] = rest % sizes[i];
            rest /= sizes[i];
        }
        let mut p = 1.0;
        for i in 0..n {
            if g.kind(i) == NodeKind::Decision {
                let cv: Vec<usize> = ctx.iter().map(|&c| a[c]).collect();
                if policy(&cv) != a[i] {
                    p = 0.0;
                }
            } else {
                let row = g
                    .parents(i)
                    .iter()
                    .fold(0, |acc, &q| acc * sizes[q] + a[q]);
                p *= m.cpt(i).unwrap().rows[row][a[i]];
            }
            if p == 0.0 {
                break;
            }
        }
        if p > 0.0 {
            out.push((a, p));
        }
    }
    out
}

pub fn utility_sum(m: &CidModel, a: &[usize]) -> f64 {
    m.graph()
        .utilities()
        .into_iter()
        .map(|u| m.domain(u).values()[a[u]].as_f64().unwrap())
        .sum()
}

/// Expected utility of a policy on the given context, by full enumeration.
pub fn brute_value(m: &CidModel, ctx: &[usize], policy: &dyn Fn(&[usize]) -> usize) -> f64 {
    joint_table(m, ctx, policy)
        .iter()
        .map(|(a, p)| p * utility_sum(m, a))
        .sum()
}

/// Best value over every deterministic policy on `ctx`.
pub fn brute_optimal(m: &CidModel, ctx: &[usize]) -> f64 {
    let g = m.graph();
    let d = g.decisions()[0];
    let dsize = m.domain(d).len();
    let csizes: Vec<usize> = ctx.iter().map(|&c| m.domain(c).len()).collect();
    let rows: usize = csizes.iter().product();
    let count = dsize.pow(rows as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..count {
        let mut rule = vec![0; rows];
        let mut rest = code;
        for r in rule.iter_mut() {
            *r = rest % dsize;
            rest /= dsize;
        }
        let f = |cv: &[usize]| {
            let row = cv.iter().zip(&csizes).fold(0, |acc, (&v, &s)| acc * s + v);
            rule[row]
        };
        best = best.max(brute_value(m, ctx, &f));
    }
    best
}
