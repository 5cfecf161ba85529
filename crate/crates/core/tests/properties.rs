mod common;

use cidkit::{
    analyze, completeness_construction, d_separated, joint_query, optimal_value, parse_cid,
    parse_model_with_cap, policy_value, random_graph, random_model, reduced_graph,
    requisite_observations, serialize_cid, serialize_model, stochastic_policy_value,
    value_of_control, value_of_information, CidGraph, Error, Policy, Relation, Verdict,
};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = CidGraph> {
    (2..=max_nodes, 0.0..=1.0f64, any::<u64>())
        .prop_map(|(n, p, seed)| random_graph(n, p, seed).unwrap())
}

fn model_strategy(max_nodes: usize) -> impl Strategy<Value = (CidGraph, cidkit::CidModel)> {
    (graph_strategy(max_nodes), 2..=3usize, any::<u64>()).prop_map(|(g, k, seed)| {
        let m = random_model(&g, k, seed).unwrap();
        (g, m)
    })
}

fn non_decision_ids(g: &CidGraph) -> Vec<String> {
    let d = g.decisions()[0];
    (0..g.len()).filter(|&i| i != d).map(|i| g.id(i).to_string()).collect()
}

fn eligible_ids(g: &CidGraph) -> Vec<String> {
    let d = g.decisions()[0];
    let desc = g.descendants_mask(d);
    (0..g.len())
        .filter(|&i| i != d && !desc[i])
        .map(|i| g.id(i).to_string())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn graph_text_round_trips(g in graph_strategy(10)) {
        let back = parse_cid(&serialize_cid(&g)).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn model_text_round_trips((_g, m) in model_strategy(6)) {
        let text = serialize_model(&m);
        let back = parse_model_with_cap(&text, 3).unwrap();
        prop_assert_eq!(serialize_model(&back), text);
        let a = optimal_value(&m, None, None).unwrap().0;
        let b = optimal_value(&back, None, None).unwrap().0;
        prop_assert!((a - b).abs() <= TOL);
    }

    #[test]
    fn ancestors_and_descendants_mirror(g in graph_strategy(9)) {
        for i in 0..g.len() {
            let x = g.id(i);
            for y in g.relatives(x, Relation::Ancestors).unwrap() {
                prop_assert!(g.relatives(&y, Relation::Descendants).unwrap().contains(x));
            }
            for y in g.relatives(x, Relation::Descendants).unwrap() {
                prop_assert!(g.relatives(&y, Relation::Ancestors).unwrap().contains(x));
            }
        }
    }

    #[test]
    fn back_edges_are_rejected(g in graph_strategy(8), pick in any::<prop::sample::Index>()) {
        let pairs: Vec<(usize, usize)> = (0..g.len())
            .flat_map(|a| {
                let desc = g.descendants_mask(a);
                (0..g.len()).filter(move |&b| desc[b]).map(move |b| (a, b))
            })
            .collect();
        prop_assume!(!pairs.is_empty());
        let (anc, desc) = pairs[pick.index(pairs.len())];
        let mut h = g.clone();
        if h.add_edge_ix(desc, anc).is_ok() {
            prop_assert!(matches!(h.topological_order(), Err(Error::CycleDetected(_))));
            prop_assert!(!h.validate().ok());
            let text = serialize_cid(&h);
            prop_assert!(matches!(parse_cid(&text), Err(Error::CycleDetected(_))));
        }
    }

    #[test]
    fn d_separation_is_symmetric_and_matches_paths(g in graph_strategy(7), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.len();
        for _ in 0..10 {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            if x == y {
                continue;
            }
            let z: Vec<usize> = (0..n).filter(|&v| v != x && v != y && rng.gen_bool(0.3)).collect();
            let zs: Vec<&str> = z.iter().map(|&v| g.id(v)).collect();
            let xy = d_separated(&g, &[g.id(x)], &[g.id(y)], &zs).unwrap();
            let yx = d_separated(&g, &[g.id(y)], &[g.id(x)], &zs).unwrap();
            prop_assert_eq!(xy, yx);
            prop_assert_eq!(xy, common::brute_d_separated(&g, x, y, &z));
        }
    }

    #[test]
    fn values_are_nonnegative((g, m) in model_strategy(6)) {
        let (base, _) = optimal_value(&m, None, None).unwrap();
        for x in eligible_ids(&g) {
            let (with, _) = optimal_value(&m, Some(&x), None).unwrap();
            let (without, _) = optimal_value(&m, None, Some(&x)).unwrap();
            prop_assert!(with >= without - TOL);
            prop_assert!(value_of_information(&m, &x).unwrap() >= 0.0);
        }
        for x in non_decision_ids(&g) {
            match value_of_control(&m, &x) {
                Ok(v) => prop_assert!(v >= 0.0),
                Err(Error::StateSpaceTooLarge(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        prop_assert!(base.is_finite());
    }

    #[test]
    fn optimal_matches_policy_enumeration((g, m) in model_strategy(5)) {
        let d = g.decisions()[0];
        let ctx = g.parents(d).to_vec();
        let rows: usize = ctx.iter().map(|&c| m.domain(c).len()).product();
        prop_assume!(m.domain(d).len().pow(rows as u32) <= 4096);
        let (fast, policy) = optimal_value(&m, None, None).unwrap();
        let slow = common::brute_optimal(&m, &ctx);
        prop_assert!((fast - slow).abs() <= TOL, "{} vs {}", fast, slow);
        let achieved = policy_value(&m, &policy, None).unwrap();
        prop_assert!((achieved - fast).abs() <= TOL);
    }

    #[test]
    fn affine_utility_maps_scale_values(
        (g, m) in model_strategy(5),
        a in 1i64..5,
        b in -3i64..4,
    ) {
        let mapped = m.map_utilities(Ratio::from_integer(a), Ratio::from_integer(b)).unwrap();
        let nu = g.utilities().len() as f64;
        let v0 = optimal_value(&m, None, None).unwrap().0;
        let v1 = optimal_value(&mapped, None, None).unwrap().0;
        prop_assert!((v1 - (a as f64 * v0 + b as f64 * nu)).abs() <= 1e-7);
        for x in eligible_ids(&g) {
            let i0 = value_of_information(&m, &x).unwrap();
            let i1 = value_of_information(&mapped, &x).unwrap();
            prop_assert!((i1 - a as f64 * i0).abs() <= 1e-7);
        }
    }

    #[test]
    fn stochastic_rules_never_beat_optimum((g, m) in model_strategy(6), seed in any::<u64>()) {
        let d = g.decisions()[0];
        let rows: usize = g.parents(d).iter().map(|&c| m.domain(c).len()).product();
        let k = m.domain(d).len();
        let best = optimal_value(&m, None, None).unwrap().0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let table: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
                    let s: f64 = raw.iter().sum();
                    raw.iter().map(|v| v / s).collect()
                })
                .collect();
            prop_assert!(stochastic_policy_value(&m, &table).unwrap() <= best + TOL);
        }
    }

    #[test]
    fn marginals_sum_to_one((g, m) in model_strategy(6), action in 0usize..3) {
        let d = g.decisions()[0];
        let policy = Policy::constant(&m, action % m.domain(d).len()).unwrap();
        for i in 0..g.len() {
            let total: f64 = m
                .domain(i)
                .values()
                .iter()
                .map(|v| joint_query(&m, &policy, None, &[(g.id(i), v.clone())]).unwrap())
                .sum();
            prop_assert!((total - 1.0).abs() <= TOL);
        }
    }

    #[test]
    fn link_edits_are_idempotent((g, m) in model_strategy(6)) {
        let d = g.decisions()[0];
        let base = optimal_value(&m, None, None).unwrap().0;
        for x in eligible_ids(&g) {
            let xi = g.index_of(&x).unwrap();
            let added = optimal_value(&m, Some(&x), None).unwrap().0;
            let dropped = optimal_value(&m, None, Some(&x)).unwrap().0;
            if g.has_edge(xi, d) {
                prop_assert!((added - base).abs() <= TOL);
            } else {
                prop_assert!((dropped - base).abs() <= TOL);
            }
            let twice = m
                .with_decision_links({
                    let mut h = g.clone();
                    if !h.has_edge(xi, d) {
                        h.add_edge_ix(xi, d).unwrap();
                    }
                    h
                })
                .unwrap();
            let again = optimal_value(&twice, Some(&x), None).unwrap().0;
            prop_assert!((again - added).abs() <= TOL);
        }
    }

    #[test]
    fn requisite_set_is_stable_under_reduction(g in graph_strategy(9)) {
        let reduced = reduced_graph(&g).unwrap();
        prop_assert_eq!(requisite_observations(&reduced).unwrap(), requisite_observations(&g).unwrap());
        prop_assert_eq!(reduced_graph(&reduced).unwrap(), reduced);
    }

    #[test]
    fn observation_blind_policies_are_all_equal(g in graph_strategy(6), seed in any::<u64>()) {
        let report = analyze(&g).unwrap();
        let d = g.decisions()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (x, inc) in &report.nodes {
            if inc.observation != Verdict::Yes {
                continue;
            }
            let m = completeness_construction(&g, x).unwrap();
            let xi = g.index_of(x).unwrap();
            let mut blind = m.graph().clone();
            blind.remove_edge_ix(xi, d);
            let blind = m.with_decision_links(blind).unwrap();
            let target = optimal_value(&blind, None, None).unwrap().0;
            let k = blind.domain(d).len();
            for _ in 0..5 {
                let table: Vec<usize> = (0..4096).map(|_| rng.gen_range(0..k)).collect();
                let policy = Policy::from_fn(&blind, |ctx| {
                    table[ctx.iter().fold(7usize, |h, &v| (h * 31 + v) % 4096)]
                })
                .unwrap();
                let v = policy_value(&blind, &policy, None).unwrap();
                prop_assert!((v - target).abs() <= TOL, "{} {}: {} vs {}", g.name(), x, v, target);
            }
        }
    }
}
