//! Per-node incentive classification and its JSON shape.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "yes")]
    Yes,
    #[serde(rename = "no")]
    No,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::NotApplicable => "n/a",
        }
    }
}

/// Result of the intervention criterion for one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IncentiveClass {
    None,
    Direct,
    Indirect,
    Both,
}

impl IncentiveClass {
    pub fn from_flags(direct: bool, indirect: bool) -> Self {
        match (direct, indirect) {
            (false, false) => IncentiveClass::None,
            (true, false) => IncentiveClass::Direct,
            (false, true) => IncentiveClass::Indirect,
            (true, true) => IncentiveClass::Both,
        }
    }

    pub fn is_some(self) -> bool {
        self != IncentiveClass::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterventionVerdict {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "indirect")]
    Indirect,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl From<IncentiveClass> for InterventionVerdict {
    fn from(c: IncentiveClass) -> Self {
        match c {
            IncentiveClass::None => InterventionVerdict::None,
            IncentiveClass::Direct => InterventionVerdict::Direct,
            IncentiveClass::Indirect => InterventionVerdict::Indirect,
            IncentiveClass::Both => InterventionVerdict::Both,
        }
    }
}

impl InterventionVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            InterventionVerdict::None => "none",
            InterventionVerdict::Direct => "direct",
            InterventionVerdict::Indirect => "indirect",
            InterventionVerdict::Both => "both",
            InterventionVerdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeIncentives {
    pub observation: Verdict,
    pub requisite: Verdict,
    pub intervention: InterventionVerdict,
}

/// Incentive classification of every node in a graph, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncentiveReport {
    pub graph: String,
    pub nodes: Vec<(String, NodeIncentives)>,
}

impl IncentiveReport {
    pub fn get(&self, id: &str) -> Option<&NodeIncentives> {
        self.nodes.iter().find(|(n, _)| n == id).map(|(_, r)| r)
    }

    /// Ids whose observation verdict is `yes`.
    pub fn observation_incentives(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|(_, r)| r.observation == Verdict::Yes)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

struct NodeMap<'a>(&'a [(String, NodeIncentives)]);

impl Serialize for NodeMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (id, r) in self.0 {
            map.serialize_entry(id, r)?;
        }
        map.end()
    }
}

impl Serialize for IncentiveReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("graph", &self.graph)?;
        map.serialize_entry("nodes", &NodeMap(&self.nodes))?;
        map.end()
    }
}

struct OrderedNodes(Vec<(String, NodeIncentives)>);

impl<'de> Deserialize<'de> for OrderedNodes {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedNodes;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from node id to incentives")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<OrderedNodes, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, NodeIncentives>()? {
                    out.push((k, v));
                }
                Ok(OrderedNodes(out))
            }
        }
        d.deserialize_map(V)
    }
}

impl<'de> Deserialize<'de> for IncentiveReport {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            graph: String,
            nodes: OrderedNodes,
        }
        let raw = Raw::deserialize(d)?;
        Ok(IncentiveReport {
            graph: raw.graph,
            nodes: raw.nodes.0,
        })
    }
}
