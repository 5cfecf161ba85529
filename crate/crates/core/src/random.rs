//! Seeded random graphs and models for differential testing.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64`, whose output
//! stream is fixed across platforms and releases.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CidGraph, NodeKind};
use crate::model::{CidModel, Domain};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random single-decision graph on nodes `V0..V{n-1}`. Edges follow a random
/// topological order, each present with probability `p`. The decision is
/// drawn among nodes with children and the utility among its descendants.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<CidGraph> {
    if !(2..=10).contains(&n) {
        return Err(Error::BadParams(format!("node count must be in 2..=10, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParams(format!("edge probability must be in [0, 1], got {p}")));
    }
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    let mut g = CidGraph::new(format!("random-{seed}"));
    for i in 0..n {
        g.add_node(format!("V{i}"), NodeKind::Chance, None)?;
    }
    for &(s, d) in &edges {
        g.add_edge_ix(s, d)?;
    }
    let sources: Vec<usize> = (0..n).filter(|&i| !g.children(i).is_empty()).collect();
    let (d, u) = if sources.is_empty() {
        let d = r.gen_range(0..n);
        let others: Vec<usize> = (0..n).filter(|&i| i != d).collect();
        (d, *others.choose(&mut r).expect("n >= 2"))
    } else {
        let d = *sources.choose(&mut r).unwrap();
        let desc = g.descendants_mask(d);
        let below: Vec<usize> = (0..n).filter(|&i| desc[i]).collect();
        (d, *below.choose(&mut r).expect("d has a child"))
    };
    g.set_kind(&format!("V{d}"), NodeKind::Decision)?;
    g.set_kind(&format!("V{u}"), NodeKind::Utility)?;
    Ok(g)
}

/// Random parameterization with `k` values per node. Utilities take values
/// `0..k`; table rows are positive and normalized.
pub fn random_model(g: &CidGraph, k: usize, seed: u64) -> Result<CidModel> {
    if !(2..=4).contains(&k) {
        return Err(Error::BadParams(format!("domain size must be in 2..=4, got {k}")));
    }
    let mut r = rng(seed);
    let values: Vec<i64> = (0..k as i64).collect();
    let domains = vec![Domain::ints(&values); g.len()];
    let tables = (0..g.len())
        .map(|i| {
            if g.kind(i) == NodeKind::Decision {
                return None;
            }
            let rows = k.pow(g.parents(i).len() as u32);
            Some(
                (0..rows)
                    .map(|_| {
                        let raw: Vec<f64> = (0..k).map(|_| r.gen_range(0.05..1.0)).collect();
                        let total: f64 = raw.iter().sum();
                        raw.iter().map(|x| x / total).collect()
                    })
                    .collect(),
            )
        })
        .collect();
    CidModel::new(g.clone(), domains, tables)
}
