use crate::model::AgentId;
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("economy has no agents")]
    NoAgents,
    #[error("duplicate agent id {0}")]
    DuplicateAgent(AgentId),
    #[error("agent {0} has negative endowment {1}")]
    NegativeEndowment(AgentId, Rational),
    #[error("agent {0} has negative peak {1}")]
    NegativePeak(AgentId, Rational),
    #[error("preference weights must be positive (left={left}, right={right})")]
    NonPositiveWeight { left: Rational, right: Rational },
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("allocation is infeasible: {0}")]
    Infeasible(String),
    #[error("rule {rule} is undefined here: agent {agent} has zero endowment")]
    ZeroEndowment { rule: String, agent: AgentId },
    #[error("unsupported rule {rule}: {reason}")]
    UnsupportedRule { rule: String, reason: String },
    #[error("inapplicable variant: {0}")]
    InapplicableVariant(String),
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("invalid battery: {0}")]
    InvalidBattery(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stale witness: {0}")]
    StaleWitness(String),
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}
