//! Built-in example graphs.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::CidGraph;
use crate::text::parse_cid;

pub const EXAMPLE_NAMES: [&str; 10] = [
    "fitness-obs",
    "fitness-int",
    "obs-vs-int",
    "method-graph",
    "fair-unbiased",
    "fair-biased",
    "qa-standard",
    "qa-read",
    "qa-reward",
    "mdp-theta",
];

pub const DEFAULT_HORIZON: usize = 2;
pub const MAX_HORIZON: usize = 12;

const FITNESS_NODES: &str = "\
node PhysAct chance
node StepCount chance
node EstWalk chance
node D decision label=\"Exercise advice\"
node Fitness utility
";

const FITNESS_EDGES: &str = "\
edge PhysAct -> Fitness
edge PhysAct -> StepCount
edge D -> Fitness
edge StepCount -> EstWalk
edge StepCount -> D
edge EstWalk -> D
";

const METHOD_GRAPH: &str = "\
cid method-graph
node X chance
node Y_1 chance
node Y_2 chance
node Z_1 chance
node Z_2 chance
node D decision
node U utility
edge D -> U
edge X -> U
edge X -> Y_2
edge Y_1 -> Y_2
edge Z_1 -> Z_2
edge Z_2 -> U
edge Y_2 -> D
edge Z_2 -> D
";

const FAIR_UNBIASED: &str = "\
cid fair-unbiased
node Gender chance
node DeptChoice chance label=\"Department choice\"
node Admit decision
node StudentPerformance utility label=\"Student performance\"
node RightNumber utility label=\"Right number admitted\"
edge Gender -> DeptChoice
edge DeptChoice -> Admit
edge Admit -> StudentPerformance
edge Admit -> RightNumber
edge DeptChoice -> RightNumber
";

const FAIR_BIASED: &str = "\
cid fair-biased
node Gender chance
node DeptChoice chance label=\"Department choice\"
node Admit decision
node StudentPerformance utility label=\"Student performance\"
node PercentMen utility label=\"Percentage of men\"
edge Gender -> DeptChoice
edge DeptChoice -> Admit
edge Admit -> StudentPerformance
edge Admit -> PercentMen
edge Gender -> PercentMen
";

const QA_NODES: &str = "\
node Query chance
node Answer decision
node WorldState chance label=\"World state\"
node Reward utility
edge Query -> Answer
";

fn fitness(name: &str, extra_nodes: &str, extra_edges: &str) -> String {
    format!("cid {name}\n{FITNESS_NODES}{extra_nodes}{FITNESS_EDGES}{extra_edges}")
}

fn qa(name: &str, edges: &str) -> String {
    format!("cid {name}\n{QA_NODES}{edges}")
}

/// MDP with an unknown transition parameter. Decision `D_t` observes every
/// earlier state, reward and decision. With `keep` set, every other decision
/// becomes a chance node so single-decision analysis applies.
pub fn mdp_theta(horizon: usize, keep: Option<usize>) -> Result<String> {
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(Error::BadParams(format!(
            "horizon must be in 1..={MAX_HORIZON}, got {horizon}"
        )));
    }
    if let Some(k) = keep {
        if k == 0 || k > horizon {
            return Err(Error::BadParams(format!(
                "kept decision D_{k} is outside 1..={horizon}"
            )));
        }
    }
    let mut s = String::from("cid mdp-theta\n");
    s.push_str("node Theta chance label=\"Unknown transition parameter\"\n");
    for t in 1..=horizon + 1 {
        writeln!(s, "node S_{t} chance").unwrap();
        writeln!(s, "node R_{t} utility").unwrap();
        if t <= horizon {
            let kind = match keep {
                Some(k) if k != t => "chance",
                _ => "decision",
            };
            writeln!(s, "node D_{t} {kind}").unwrap();
        }
    }
    for t in 1..=horizon + 1 {
        writeln!(s, "edge Theta -> S_{t}").unwrap();
        writeln!(s, "edge S_{t} -> R_{t}").unwrap();
        if t <= horizon {
            writeln!(s, "edge S_{t} -> S_{}", t + 1).unwrap();
            writeln!(s, "edge D_{t} -> S_{}", t + 1).unwrap();
            writeln!(s, "edge D_{t} -> R_{}", t + 1).unwrap();
            for i in 1..=t {
                writeln!(s, "edge S_{i} -> D_{t}").unwrap();
                writeln!(s, "edge R_{i} -> D_{t}").unwrap();
                if i < t {
                    writeln!(s, "edge D_{i} -> D_{t}").unwrap();
                }
            }
        }
    }
    Ok(s)
}

/// Text of a built-in example. `horizon` only affects `mdp-theta`.
pub fn builtin_example(name: &str, horizon: Option<usize>) -> Result<String> {
    Ok(match name {
        "fitness-obs" => fitness(name, "", ""),
        "fitness-int" => fitness(
            name,
            "node TrackerFirmware chance label=\"Tracker firmware\"\n\
             node EstimationFormula chance label=\"Estimation formula\"\n",
            "edge TrackerFirmware -> StepCount\nedge EstimationFormula -> EstWalk\n",
        ),
        "obs-vs-int" => fitness(
            name,
            "node TrackerFirmware chance label=\"Tracker firmware\"\n\
             node EstimationFormula chance label=\"Estimation formula\"\n\
             node TrackerDesigner chance label=\"Tracker designer\"\n\
             node DirtyGymClothes chance label=\"Dirty gym clothes\"\n",
            "edge TrackerFirmware -> StepCount\n\
             edge EstimationFormula -> EstWalk\n\
             edge TrackerDesigner -> TrackerFirmware\n\
             edge TrackerFirmware -> D\n\
             edge PhysAct -> DirtyGymClothes\n",
        ),
        "method-graph" => METHOD_GRAPH.to_string(),
        "fair-unbiased" => FAIR_UNBIASED.to_string(),
        "fair-biased" => FAIR_BIASED.to_string(),
        "qa-standard" => qa(
            name,
            "edge Answer -> WorldState\nedge Answer -> Reward\n\
             edge WorldState -> Reward\nedge Query -> Reward\n",
        ),
        "qa-read" => qa(name, "edge Answer -> WorldState\n"),
        "qa-reward" => qa(
            name,
            "edge Answer -> Reward\nedge WorldState -> Reward\nedge Query -> Reward\n",
        ),
        "mdp-theta" => mdp_theta(horizon.unwrap_or(DEFAULT_HORIZON), None)?,
        _ => return Err(Error::UnknownExample(name.to_string())),
    })
}

/// Parsed form of [`builtin_example`] with the default horizon.
pub fn builtin_graph(name: &str) -> Result<CidGraph> {
    parse_cid(&builtin_example(name, None)?)
}
