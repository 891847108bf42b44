//! Step-by-step net-trade traces.
//!
//! A trace starts at zero net trades and moves towards the rule's outcome,
//! freezing agents at their peaks once their holdings reach them. Two
//! constructions are provided: [`derive_trace`] re-runs a catalog rule on the
//! economy whose endowments are the current holdings, and
//! [`uniform_lambda_trace`] runs the explicit water-level recursion of the
//! uniform reallocation rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AgentId, Allocation, Economy, Side};
use crate::rational::Rational;
use crate::rules::{self, RuleId};

pub type NetTrades = BTreeMap<AgentId, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub t: usize,
    pub net_trades: NetTrades,
    /// Endowments of the economy the step was computed from.
    pub staged_endowments: BTreeMap<AgentId, Rational>,
    /// Agents pinned at their peak net trade at this step.
    pub frozen: BTreeSet<AgentId>,
    pub lambda: Option<Rational>,
}

/// How a trace was produced; decides how it is extended past its end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceSource {
    Rule(RuleId),
    UniformLambda,
    /// Supplied by hand; cannot be extended.
    Manual,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub economy: Economy,
    pub source: TraceSource,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// A trace from explicit net-trade vectors `q^0, q^1, ...`.
    pub fn manual(economy: Economy, net_trades: Vec<NetTrades>) -> Trace {
        let mut steps = Vec::with_capacity(net_trades.len());
        let mut previous = zero(&economy);
        for (t, q) in net_trades.into_iter().enumerate() {
            let staged = holdings(&economy, &previous);
            let frozen = if t == 0 {
                BTreeSet::new()
            } else {
                frozen_at(&economy, &previous)
            };
            steps.push(TraceStep {
                t,
                net_trades: q.clone(),
                staged_endowments: staged,
                frozen,
                lambda: None,
            });
            previous = q;
        }
        Trace {
            economy,
            source: TraceSource::Manual,
            steps,
        }
    }

    pub fn final_net_trades(&self) -> &NetTrades {
        &self.steps.last().expect("traces have at least one step").net_trades
    }

    /// Final holdings `omega + q^{|N|-1}`.
    pub fn final_holdings(&self) -> BTreeMap<AgentId, Rational> {
        holdings(&self.economy, self.final_net_trades())
    }

    /// The step after the last stored one, or `None` for manual traces.
    pub fn extend(&self) -> Result<Option<TraceStep>> {
        let last = self.steps.last().expect("traces have at least one step");
        match &self.source {
            TraceSource::Rule(rule) => rule_step(rule, &self.economy, last).map(Some),
            TraceSource::UniformLambda => Ok(Some(lambda_step(&self.economy, last, &self.frozen_so_far()))),
            TraceSource::Manual => Ok(None),
        }
    }

    fn frozen_so_far(&self) -> BTreeSet<AgentId> {
        self.steps.iter().flat_map(|s| s.frozen.iter().copied()).collect()
    }
}

fn zero(e: &Economy) -> NetTrades {
    e.ids().map(|id| (id, Rational::ZERO)).collect()
}

fn holdings(e: &Economy, q: &NetTrades) -> BTreeMap<AgentId, Rational> {
    e.ids()
        .map(|id| (id, e.endowment(id) + q.get(&id).copied().unwrap_or(Rational::ZERO)))
        .collect()
}

/// Whether agent `id` holding `omega + q` has reached or passed its peak in
/// the direction the economy trades.
fn reached_peak(e: &Economy, id: AgentId, q: Rational) -> bool {
    let held = e.endowment(id) + q;
    match e.side() {
        Side::ExcessDemand => e.peak(id) <= held,
        Side::ExcessSupply => e.peak(id) >= held,
    }
}

fn frozen_at(e: &Economy, q: &NetTrades) -> BTreeSet<AgentId> {
    e.ids()
        .filter(|id| reached_peak(e, *id, q.get(id).copied().unwrap_or(Rational::ZERO)))
        .collect()
}

/// The rule applied to a staged economy. Staged holdings may be zero, where
/// the proportional formulas are evaluated as written.
fn apply_staged(rule: &RuleId, staged: &Economy) -> Result<Allocation> {
    match rule {
        RuleId::Proportional => Ok(rules::proportional_unchecked(staged)),
        other => other.apply(staged),
    }
}

fn rule_step(rule: &RuleId, e: &Economy, previous: &TraceStep) -> Result<TraceStep> {
    let staged_endowments = holdings(e, &previous.net_trades);
    let staged = e.with_endowments(&staged_endowments)?;
    let outcome = apply_staged(rule, &staged)?;
    Ok(TraceStep {
        t: previous.t + 1,
        net_trades: outcome.iter().map(|(id, x)| (id, x - e.endowment(id))).collect(),
        staged_endowments,
        frozen: frozen_at(e, &previous.net_trades),
        lambda: None,
    })
}

/// The trace induced by `rule`: step `t` applies the rule to the economy
/// endowed with the holdings after step `t - 1`.
pub fn derive_trace(rule: &RuleId, e: &Economy) -> Result<Trace> {
    if matches!(rule, RuleId::SprumontUniform) {
        return Err(Error::UnsupportedRule {
            rule: rule.to_string(),
            reason: "violates the endowments lower bound, so it induces no iterative trace".into(),
        });
    }
    if matches!(rule, RuleId::Proportional) {
        rules::proportional(e)?;
    }
    let mut steps = vec![TraceStep {
        t: 0,
        net_trades: zero(e),
        staged_endowments: e.endowments(),
        frozen: BTreeSet::new(),
        lambda: None,
    }];
    for _ in 1..e.len() {
        let next = rule_step(rule, e, steps.last().unwrap())?;
        steps.push(next);
    }
    Ok(Trace {
        economy: e.clone(),
        source: TraceSource::Rule(rule.clone()),
        steps,
    })
}

fn lambda_step(e: &Economy, previous: &TraceStep, frozen_before: &BTreeSet<AgentId>) -> TraceStep {
    let lambda_prev = previous.lambda.unwrap_or(Rational::ZERO);
    let frozen = frozen_at(e, &previous.net_trades);
    let unfrozen = e.len() - frozen.len();
    let demand = e.side() == Side::ExcessDemand;
    let lambda = if unfrozen == 0 {
        lambda_prev
    } else {
        let released: Rational = frozen
            .difference(frozen_before)
            .map(|id| {
                let gap = e.endowment(*id) - e.peak(*id);
                if demand {
                    gap + lambda_prev
                } else {
                    lambda_prev - gap
                }
            })
            .sum();
        lambda_prev + released / Rational::from(unfrozen)
    };
    let net_trades = e
        .ids()
        .map(|id| {
            let q = if frozen.contains(&id) {
                e.peak(id) - e.endowment(id)
            } else if demand {
                lambda
            } else {
                -lambda
            };
            (id, q)
        })
        .collect();
    TraceStep {
        t: previous.t + 1,
        net_trades,
        staged_endowments: holdings(e, &previous.net_trades),
        frozen,
        lambda: Some(lambda),
    }
}

/// The water-level recursion of the uniform reallocation rule: frozen agents
/// sit at their peaks, everyone else trades the common amount `lambda^t`,
/// raised at each step by what newly frozen agents release.
pub fn uniform_lambda_trace(e: &Economy) -> Trace {
    let mut steps = vec![TraceStep {
        t: 0,
        net_trades: zero(e),
        staged_endowments: e.endowments(),
        frozen: BTreeSet::new(),
        lambda: Some(Rational::ZERO),
    }];
    let mut frozen_before = BTreeSet::new();
    for _ in 1..e.len() {
        let next = lambda_step(e, steps.last().unwrap(), &frozen_before);
        frozen_before.extend(next.frozen.iter().copied());
        steps.push(next);
    }
    Trace {
        economy: e.clone(),
        source: TraceSource::UniformLambda,
        steps,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepCondition {
    /// Net trades sum to zero and keep holdings nonnegative.
    Membership,
    /// Agents at or past their peak are pinned there.
    Freezing,
    /// Agents short of their peak never move away from it.
    Monotonicity,
    /// One step per agent.
    Length,
    /// Continuing past the last step changes nothing.
    Stationarity,
}

impl fmt::Display for StepCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StepCondition::Membership => "membership",
            StepCondition::Freezing => "freezing",
            StepCondition::Monotonicity => "monotonicity",
            StepCondition::Length => "length",
            StepCondition::Stationarity => "stationarity",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepViolation {
    pub condition: StepCondition,
    pub step: usize,
    pub agent: Option<AgentId>,
    pub detail: String,
}

impl fmt::Display for StepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.condition)?;
        if let Some(agent) = self.agent {
            write!(f, " (agent {agent})")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub violations: Vec<StepViolation>,
    /// False when the trace could not be extended (manual traces).
    pub stationarity_checked: bool,
}

impl StepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, condition: StepCondition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Checks the per-step conditions of an iterative trace.
pub fn check_step_conditions(trace: &Trace) -> StepReport {
    let e = &trace.economy;
    let mut report = StepReport::default();
    let mut push = |condition, step, agent, detail: String| {
        report.violations.push(StepViolation {
            condition,
            step,
            agent,
            detail,
        })
    };

    if trace.steps.len() != e.len() {
        push(
            StepCondition::Length,
            trace.steps.len(),
            None,
            format!("{} steps for {} agents", trace.steps.len(), e.len()),
        );
    }
    for (t, step) in trace.steps.iter().enumerate() {
        let q = &step.net_trades;
        if q.len() != e.len() || !e.ids().all(|id| q.contains_key(&id)) {
            push(
                StepCondition::Membership,
                t,
                None,
                "agent set differs from the economy".into(),
            );
            continue;
        }
        if t == 0 && q.values().any(|x| !x.is_zero()) {
            push(
                StepCondition::Membership,
                t,
                None,
                "initial net trades are not zero".into(),
            );
        }
        let sum: Rational = q.values().sum();
        if !sum.is_zero() {
            push(StepCondition::Membership, t, None, format!("net trades sum to {sum}"));
        }
        for (id, x) in q {
            if (e.endowment(*id) + *x).is_negative() {
                push(
                    StepCondition::Membership,
                    t,
                    Some(*id),
                    format!("holding {} is negative", e.endowment(*id) + *x),
                );
            }
        }
    }

    let demand = e.side() == Side::ExcessDemand;
    for pair in trace.steps.windows(2) {
        let (prev, cur) = (&pair[0].net_trades, &pair[1].net_trades);
        let t = pair[1].t;
        for id in e.ids() {
            let (Some(&before), Some(&after)) = (prev.get(&id), cur.get(&id)) else {
                continue;
            };
            let at_peak = e.peak(id) - e.endowment(id);
            if reached_peak(e, id, before) {
                if after != at_peak {
                    push(
                        StepCondition::Freezing,
                        t,
                        Some(id),
                        format!("q = {after}, expected the peak net trade {at_peak}"),
                    );
                }
            } else if (demand && after < before) || (!demand && after > before) {
                push(
                    StepCondition::Monotonicity,
                    t,
                    Some(id),
                    format!("q moved from {before} to {after}, away from the peak"),
                );
            }
        }
    }

    match trace.extend() {
        Ok(Some(next)) => {
            report.stationarity_checked = true;
            if &next.net_trades != trace.final_net_trades() {
                report.violations.push(StepViolation {
                    condition: StepCondition::Stationarity,
                    step: next.t,
                    agent: None,
                    detail: "the trace keeps moving after its last step".into(),
                });
            }
        }
        Ok(None) => {}
        Err(err) => report.violations.push(StepViolation {
            condition: StepCondition::Stationarity,
            step: trace.steps.len(),
            agent: None,
            detail: format!("cannot extend the trace: {err}"),
        }),
    }
    report
}

/// A second economy to compare final net trades against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossVariant {
    /// Same agents and preferences, weakly larger endowments.
    Endowments(BTreeMap<AgentId, Rational>),
    /// The economy restricted to a subset of its agents.
    Subset(BTreeSet<AgentId>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossViolation {
    pub agents: Vec<AgentId>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossReport {
    pub variant: Economy,
    pub base_net_trades: NetTrades,
    pub variant_net_trades: NetTrades,
    pub violations: Vec<CrossViolation>,
}

impl CrossReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares the final steps of the traces of `e` and of a variant economy:
/// larger endowments must not leave anyone with less, and on a subeconomy
/// on the same side every pair of agents must move in the same direction.
pub fn check_cross_conditions(rule: &RuleId, e: &Economy, variant: &CrossVariant) -> Result<CrossReport> {
    let other = match variant {
        CrossVariant::Endowments(larger) => {
            let other = e.with_endowments(larger)?;
            if let Some(id) = e.ids().find(|id| other.endowment(*id) < e.endowment(*id)) {
                return Err(Error::InapplicableVariant(format!("agent {id}'s endowment decreases")));
            }
            if e.excess().is_positive() && other.excess().is_negative() {
                return Err(Error::InapplicableVariant(
                    "the increase turns excess demand into excess supply".into(),
                ));
            }
            other
        }
        CrossVariant::Subset(subset) => {
            let other = e.restrict(subset)?;
            let (z, zs) = (e.excess(), other.excess());
            let same_side = (!z.is_negative() && !zs.is_negative()) || (!z.is_positive() && !zs.is_positive());
            if !same_side {
                return Err(Error::InapplicableVariant(format!(
                    "excess {z} and {zs} lie on opposite sides of zero"
                )));
            }
            other
        }
    };
    let base = derive_trace(rule, e)?;
    let varied = derive_trace(rule, &other)?;
    let q = base.final_net_trades().clone();
    let q_tilde = varied.final_net_trades().clone();
    let mut violations = Vec::new();
    match variant {
        CrossVariant::Endowments(_) => {
            let before = base.final_holdings();
            let after = varied.final_holdings();
            for id in e.ids() {
                if after[&id] < before[&id] {
                    violations.push(CrossViolation {
                        agents: vec![id],
                        detail: format!("holding falls from {} to {}", before[&id], after[&id]),
                    });
                }
            }
        }
        CrossVariant::Subset(_) => {
            let ids: Vec<AgentId> = other.ids().collect();
            for (k, i) in ids.iter().enumerate() {
                for j in &ids[k + 1..] {
                    let di = q_tilde[i] - q[i];
                    let dj = q_tilde[j] - q[j];
                    if (di * dj).is_negative() {
                        violations.push(CrossViolation {
                            agents: vec![*i, *j],
                            detail: format!("agent {i} moves by {di} while agent {j} moves by {dj}"),
                        });
                    }
                }
            }
        }
    }
    Ok(CrossReport {
        variant: other,
        base_net_trades: q,
        variant_net_trades: q_tilde,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::rules::Order;

    fn econ(pairs: &[(Rational, Rational)]) -> Economy {
        Economy::from_peaks_and_endowments(pairs.iter().copied()).unwrap()
    }

    fn ints(xs: &[i128]) -> Vec<Rational> {
        xs.iter().map(|x| int(*x)).collect()
    }

    fn values(q: &NetTrades) -> Vec<Rational> {
        q.values().copied().collect()
    }

    fn example1() -> Economy {
        econ(&[
            (int(0), int(9)),
            (int(2), int(1)),
            (rat(7, 2), int(0)),
            (int(10), int(2)),
        ])
    }

    #[test]
    fn lambda_recursion_on_example_one() {
        let trace = uniform_lambda_trace(&example1());
        let s = &trace.steps;
        assert_eq!(s.len(), 4);
        assert_eq!(s[1].frozen, [AgentId(1)].into());
        assert_eq!(s[1].lambda, Some(int(3)));
        assert_eq!(values(&s[1].net_trades), ints(&[-9, 3, 3, 3]));
        assert_eq!(s[2].frozen, [AgentId(1), AgentId(2)].into());
        assert_eq!(s[2].lambda, Some(int(4)));
        assert_eq!(values(&s[2].net_trades), ints(&[-9, 1, 4, 4]));
        assert_eq!(s[3].frozen, [AgentId(1), AgentId(2), AgentId(3)].into());
        assert_eq!(s[3].lambda, Some(rat(9, 2)));
        assert_eq!(values(&s[3].net_trades), vec![int(-9), int(1), rat(7, 2), rat(9, 2)]);
        assert!(check_step_conditions(&trace).passed());
    }

    #[test]
    fn lambda_recursion_balanced_and_example_four() {
        let at_peaks = econ(&[(int(2), int(2)), (int(1), int(1)), (int(0), int(0))]);
        let trace = uniform_lambda_trace(&at_peaks);
        assert_eq!(trace.steps[1].frozen, at_peaks.id_set());
        assert!(trace.steps.iter().all(|s| s.net_trades.values().all(|x| x.is_zero())));

        let zero_excess = econ(&[(int(2), int(1)), (int(0), int(1))]);
        let trace = uniform_lambda_trace(&zero_excess);
        assert_eq!(values(trace.final_net_trades()), ints(&[1, -1]));

        let four = econ(&[(int(1), int(3)), (int(4), int(1)), (int(3), int(1)), (int(1), int(3))]);
        let trace = uniform_lambda_trace(&four);
        assert_eq!(values(trace.final_net_trades()), ints(&[-2, 2, 2, -2]));
    }

    #[test]
    fn lambda_recursion_excess_supply_matches_uniform() {
        let e = econ(&[(int(0), int(6)), (int(2), int(4)), (int(3), int(1))]);
        let trace = uniform_lambda_trace(&e);
        let expected = rules::uniform_realloc(&e).net_trades(&e);
        assert_eq!(trace.final_net_trades(), &expected);
        assert!(check_step_conditions(&trace).passed());
    }

    #[test]
    fn derived_trace_reaches_the_rule_outcome() {
        let e = example1();
        let trace = derive_trace(&RuleId::UniformRealloc, &e).unwrap();
        let expected = vec![int(-9), int(1), rat(7, 2), rat(9, 2)];
        assert_eq!(values(&trace.steps[1].net_trades), expected);
        assert_eq!(values(trace.final_net_trades()), expected);
        assert!(check_step_conditions(&trace).passed());

        let p = econ(&[(int(4), int(2)), (int(0), int(2)), (int(2), int(1))]);
        let trace = derive_trace(&RuleId::Proportional, &p).unwrap();
        assert_eq!(values(trace.final_net_trades()), vec![rat(4, 3), int(-2), rat(2, 3)]);
        assert!(check_step_conditions(&trace).passed());
    }

    #[test]
    fn derived_trace_at_peaks_is_zero() {
        let e = econ(&[(int(3), int(3)), (int(1), int(1))]);
        let trace = derive_trace(&RuleId::UniformRealloc, &e).unwrap();
        assert!(trace.steps.iter().all(|s| s.net_trades.values().all(|x| x.is_zero())));
    }

    #[test]
    fn sprumont_has_no_trace() {
        assert!(matches!(
            derive_trace(&RuleId::SprumontUniform, &example1()),
            Err(Error::UnsupportedRule { .. })
        ));
    }

    #[test]
    fn priority_trace_on_example_three() {
        let e = Economy::new([
            (AgentId(1), crate::model::Preference::symmetric(int(0)), int(4)),
            (AgentId(3), crate::model::Preference::symmetric(int(6)), int(2)),
            (AgentId(4), crate::model::Preference::symmetric(int(6)), int(2)),
        ])
        .unwrap();
        let trace = derive_trace(&RuleId::Priority(Order::natural()), &e).unwrap();
        assert!(check_step_conditions(&trace).passed());
    }

    #[test]
    fn hand_built_decrease_is_flagged() {
        let e = example1();
        let q = |xs: [Rational; 4]| -> NetTrades { e.ids().zip(xs).collect() };
        let trace = Trace::manual(
            e.clone(),
            vec![
                q([int(0); 4]),
                q([int(-9), int(3), int(3), int(3)]),
                q([int(-9), int(1), int(2), int(6)]),
                q([int(-9), int(1), rat(7, 2), rat(9, 2)]),
            ],
        );
        let report = check_step_conditions(&trace);
        assert!(report.has(StepCondition::Monotonicity));
        assert!(!report.stationarity_checked);
    }

    #[test]
    fn cross_conditions() {
        let four = econ(&[(int(1), int(3)), (int(4), int(1)), (int(3), int(1)), (int(1), int(3))]);
        let sub = CrossVariant::Subset([AgentId(1), AgentId(2), AgentId(3)].into());
        let report = check_cross_conditions(&RuleId::UniformRealloc, &four, &sub).unwrap();
        assert_eq!(values(&report.variant_net_trades), ints(&[-2, 1, 1]));
        assert!(report.passed());

        let same = CrossVariant::Subset(four.id_set());
        assert!(check_cross_conditions(&RuleId::UniformRealloc, &four, &same)
            .unwrap()
            .passed());

        let bar = econ(&[(int(5), int(1)), (int(5), int(1)), (int(0), int(3)), (int(0), int(3))]);
        let report = check_cross_conditions(&RuleId::PhiBar(Order::natural()), &bar, &sub).unwrap();
        assert!(!report.passed());
        assert!(report
            .violations
            .iter()
            .any(|v| v.agents == vec![AgentId(1), AgentId(2)]));
    }

    #[test]
    fn cross_preconditions() {
        let e = econ(&[(int(2), int(1)), (int(0), int(0))]);
        let flip = CrossVariant::Endowments([(AgentId(2), int(5))].into());
        assert!(matches!(
            check_cross_conditions(&RuleId::UniformRealloc, &e, &flip),
            Err(Error::InapplicableVariant(_))
        ));
        let less = CrossVariant::Endowments([(AgentId(1), int(0))].into());
        assert!(matches!(
            check_cross_conditions(&RuleId::UniformRealloc, &e, &less),
            Err(Error::InapplicableVariant(_))
        ));
        let more = CrossVariant::Endowments([(AgentId(2), rat(1, 2))].into());
        assert!(check_cross_conditions(&RuleId::UniformRealloc, &e, &more)
            .unwrap()
            .passed());
    }
}
