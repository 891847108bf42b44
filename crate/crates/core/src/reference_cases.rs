//! Five built-in worked examples with stored expected outputs.
//!
//! Each case recomputes its outputs from scratch and compares the printed
//! form against the stored string, so a match is bit-exact.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::iterative::{derive_trace, uniform_lambda_trace, NetTrades};
use crate::manipulation::{find_splitting, find_withdrawal, find_withdrawal_pair, Mode};
use crate::model::{AgentId, Allocation, Economy, Preference};
use crate::rational::{int, rat, Rational};
use crate::rules::{phi_star, priority, uniform_realloc, Order, RuleId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Example {
    One,
    Two,
    Three,
    Four,
    B1,
}

impl Example {
    pub const ALL: [Example; 5] = [Example::One, Example::Two, Example::Three, Example::Four, Example::B1];

    /// The economy the case starts from.
    pub fn economy(&self) -> Economy {
        match self {
            Example::One => peaks_and_endowments(&[
                (1, int(0), int(9)),
                (2, int(2), int(1)),
                (3, rat(7, 2), int(0)),
                (4, int(10), int(2)),
            ]),
            Example::Two => peaks_and_endowments(&[(1, int(4), int(2)), (2, int(0), int(2)), (3, int(2), int(1))]),
            Example::Three => peaks_and_endowments(&[(1, int(0), int(4)), (3, int(6), int(2)), (4, int(6), int(2))]),
            Example::Four => peaks_and_endowments(&[
                (1, int(1), int(3)),
                (2, int(4), int(1)),
                (3, int(3), int(1)),
                (4, int(1), int(3)),
            ]),
            Example::B1 => b1(Preference::symmetric(int(1))),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::One => "1",
            Example::Two => "2",
            Example::Three => "3",
            Example::Four => "4",
            Example::B1 => "B1",
        })
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|ex| ex.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown example {s:?}; expected 1, 2, 3, 4 or B1")))
    }
}

fn peaks_and_endowments(rows: &[(u32, Rational, Rational)]) -> Economy {
    Economy::new(
        rows.iter()
            .map(|(id, p, w)| (AgentId(*id), Preference::symmetric(*p), *w)),
    )
    .expect("built-in economy is valid")
}

/// Agent 1 has peak 1 and the given weights; agents 2 and 3 are fixed.
fn b1(agent1: Preference) -> Economy {
    Economy::new([
        (AgentId(1), agent1, int(9)),
        (AgentId(2), Preference::symmetric(int(7)), int(1)),
        (AgentId(3), Preference::symmetric(int(9)), int(4)),
    ])
    .expect("built-in economy is valid")
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub label: String,
    pub expected: String,
    pub actual: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseReport {
    pub example: Example,
    pub checks: Vec<Check>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

fn check(label: &str, expected: &str, actual: impl fmt::Display) -> Check {
    Check {
        label: label.into(),
        expected: expected.into(),
        actual: actual.to_string(),
    }
}

fn tuple(q: &NetTrades) -> String {
    let parts: Vec<String> = q.values().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn sum_of(agents: &[AgentId], x: &Allocation) -> Rational {
    agents.iter().map(|id| x.get(*id)).sum()
}

/// `combined P_host before` when the host strictly gains from a split.
fn gain(e: &Economy, agents: &[AgentId], before: &Allocation, after: &Allocation) -> String {
    let host = agents[0];
    let (combined, old) = (sum_of(agents, after), before.get(host));
    if e.preference(host).strictly_prefers(combined, old) {
        format!("{combined} P_{host} {old}")
    } else {
        format!("{combined} does not beat {old}")
    }
}

/// Recomputes every stored quantity of `example`.
pub fn run_example(example: Example) -> Result<CaseReport> {
    let e = example.economy();
    let mut checks = Vec::new();
    match example {
        Example::One => {
            checks.push(check("uniform", "(0, 2, 7/2, 13/2)", uniform_realloc(&e)));
            let lambda = uniform_lambda_trace(&e);
            for (t, expected) in [(1, "(-9, 3, 3, 3)"), (2, "(-9, 1, 4, 4)"), (3, "(-9, 1, 7/2, 9/2)")] {
                let actual = lambda
                    .steps
                    .get(t)
                    .map_or_else(|| "missing".to_string(), |s| tuple(&s.net_trades));
                checks.push(check(&format!("q^{t}"), expected, actual));
            }
            let lambdas: Vec<String> = lambda
                .steps
                .iter()
                .skip(1)
                .take(3)
                .map(|s| s.lambda.map_or("-".into(), |l| l.to_string()))
                .collect();
            checks.push(check("lambda^1..3", "3, 4, 9/2", lambdas.join(", ")));
            let derived = derive_trace(&RuleId::UniformRealloc, &e)?;
            checks.push(check(
                "derived final",
                "(-9, 1, 7/2, 9/2)",
                tuple(derived.final_net_trades()),
            ));
        }
        Example::Two => {
            checks.push(check("uniform", "(3, 0, 2)", uniform_realloc(&e)));
            let w = find_splitting(&RuleId::UniformRealloc, &e, &[int(4)], &[int(1)])?
                .ok_or_else(|| Error::StaleWitness("no splitting witness".into()))?;
            let after = w.after.clone().expect("splitting has a variant");
            checks.push(check("split", "(5/3, 0, 5/3, 5/3)", &after));
            checks.push(check("host+guest", "10/3", sum_of(&w.agents, &after)));
            checks.push(check("host before", "3", w.before.get(w.agents[0])));
            checks.push(check(
                "comparison",
                "10/3 P_1 3",
                gain(&e, &w.agents, &w.before, &after),
            ));
        }
        Example::Three => {
            let order = Order::natural();
            checks.push(check("priority", "(0, 6, 2)", priority(&order, &e)));
            let rule = RuleId::Priority(order);
            let w = find_splitting(&rule, &e, &[int(4)], &[int(1)])?
                .ok_or_else(|| Error::StaleWitness("no splitting witness".into()))?;
            let after = w.after.clone().expect("splitting has a variant");
            checks.push(check("split", "(0, 4, 3, 1)", &after));
            checks.push(check("host+guest", "5", sum_of(&w.agents, &after)));
            checks.push(check("host before", "2", w.before.get(AgentId(4))));
            checks.push(check("comparison", "5 P_4 2", gain(&e, &w.agents, &w.before, &after)));
        }
        Example::Four => {
            checks.push(check("uniform", "(1, 3, 3, 1)", uniform_realloc(&e)));
            let without = e.without(AgentId(4))?;
            checks.push(check("uniform without 4", "(1, 2, 2)", uniform_realloc(&without)));
            let strict = find_withdrawal(&RuleId::UniformRealloc, &e, Mode::Strict)?;
            checks.push(check(
                "strict",
                "none",
                strict.map_or("none".into(), |w| format!("{:?}", w.agents)),
            ));
            let weak = find_withdrawal_pair(&RuleId::UniformRealloc, &e, AgentId(2), AgentId(4), Mode::Weak)?;
            let transfer = weak
                .and_then(|w| w.transfer)
                .map_or("none".into(), |(a, b)| format!("x_2={a} x_4={b} T={}", a + b));
            checks.push(check("weak (2,4)", "x_2=4 x_4=1 T=5", transfer));
        }
        Example::B1 => {
            checks.push(check("phi-star", "(1, 4, 9)", phi_star(&e)));
            let flipped = b1(Preference::new(int(1), int(14), int(1))?);
            checks.push(check("phi-star flipped", "(1, 5, 8)", phi_star(&flipped)));
            let misreport = e.with_preference(AgentId(2), Preference::symmetric(rat(11, 2)))?;
            checks.push(check("misreport payoff", "11/2", phi_star(&misreport).get(AgentId(2))));
        }
    }
    Ok(CaseReport { example, checks })
}
