use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("invalid node id `{0}`")]
    InvalidNodeId(String),
    #[error("edge references unknown node `{0}`")]
    UnknownNodeInEdge(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("directed cycle through {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("incentive analysis requires exactly one decision node, found {0}")]
    NotSingleDecision(usize),
    #[error("graph has no utility node")]
    NoUtility,
    #[error("node `{0}` descends from the decision; observation incentives are undefined for it")]
    NodeDescendsFromDecision(String),
    #[error("node `{0}` is the decision node")]
    IsDecisionNode(String),
    #[error("node `{0}` has no incentive under the graphical criterion")]
    NoIncentive(String),
    #[error("report does not match graph: {0}")]
    ReportGraphMismatch(String),
    #[error("missing domain for node `{0}`")]
    MissingDomain(String),
    #[error("missing conditional probability table for node `{0}`")]
    MissingCpt(String),
    #[error("row {row} of the table for `{node}` sums to {sum}, not 1")]
    RowNotNormalized { node: String, row: String, sum: f64 },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("utility node `{0}` needs a numeric domain")]
    NonNumericUtilityDomain(String),
    #[error("joint state space of {0} states exceeds the enumeration cap")]
    StateSpaceTooLarge(u128),
    #[error("adding information link {0} -> {1} would create a cycle")]
    EditCreatesCycle(String, String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Stable machine-readable code, used by validation reports and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::DuplicateNode(_) => "DuplicateNode",
            Error::InvalidNodeId(_) => "InvalidNodeId",
            Error::UnknownNodeInEdge(_) => "UnknownNodeInEdge",
            Error::SelfLoop(_) => "SelfLoop",
            Error::DuplicateEdge(..) => "DuplicateEdge",
            Error::CycleDetected(_) => "CycleDetected",
            Error::UnknownNode(_) => "UnknownNode",
            Error::OverlappingSets(_) => "OverlappingSets",
            Error::NotSingleDecision(_) => "NotSingleDecision",
            Error::NoUtility => "NoUtility",
            Error::NodeDescendsFromDecision(_) => "NodeDescendsFromDecision",
            Error::IsDecisionNode(_) => "IsDecisionNode",
            Error::NoIncentive(_) => "NoIncentive",
            Error::ReportGraphMismatch(_) => "ReportGraphMismatch",
            Error::MissingDomain(_) => "MissingDomain",
            Error::MissingCpt(_) => "MissingCpt",
            Error::RowNotNormalized { .. } => "RowNotNormalized",
            Error::DomainMismatch(_) => "DomainMismatch",
            Error::NonNumericUtilityDomain(_) => "NonNumericUtilityDomain",
            Error::StateSpaceTooLarge(_) => "StateSpaceTooLarge",
            Error::EditCreatesCycle(..) => "EditCreatesCycle",
            Error::BadParams(_) => "BadParams",
            Error::UnknownExample(_) => "UnknownExample",
            Error::Invariant(_) => "Invariant",
        }
    }
}
