//! Exact reallocation rules for economies with single-peaked preferences,
//! together with iterative traces, axiom audits and manipulation searches.

pub mod audit;
pub mod axioms;
pub mod econgen;
pub mod error;
pub mod format;
pub mod interval;
pub mod iterative;
pub mod manipulation;
pub mod model;
mod pwl;
pub mod rational;
pub mod reference_cases;
pub mod rules;
pub mod shrink;
pub mod witness;

pub use axioms::{Deviation, Verdict};
pub use error::{Error, Result};
pub use interval::{Bound, Interval};
pub use model::{Agent, AgentId, Allocation, Comparison, Economy, Preference, Side};
pub use rational::{int, rat, ParseRationalError, Rational};
pub use rules::{Order, RuleId};
pub use witness::{Witness, WitnessKind};
