//! Per-economy deciders for the axioms a reallocation rule may satisfy.
//!
//! Efficiency, the endowments lower bound, satiation, envy-free net trades
//! and population monotonicity are decided exhaustively for the economy at
//! hand. The axioms that quantify over preferences or endowments are checked
//! against an explicit list of perturbations, so a pass only means that no
//! violation was found among them.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{AgentId, Allocation, Economy, Preference};
use crate::rational::Rational;
use crate::rules::RuleId;
use crate::witness::{Witness, WitnessKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No violation among `checked` cases.
    Pass {
        checked: usize,
    },
    Violation(Box<Witness>),
    /// The axiom's hypothesis does not hold for this input.
    Inapplicable {
        reason: String,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, Verdict::Violation(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Violation(w) => Some(w),
            _ => None,
        }
    }

    pub fn into_witness(self) -> Option<Witness> {
        match self {
            Verdict::Violation(w) => Some(*w),
            _ => None,
        }
    }
}

/// One agent reporting a different preference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Deviation {
    pub agent: AgentId,
    pub preference: Preference,
}

impl Deviation {
    pub fn new(agent: AgentId, preference: Preference) -> Self {
        Deviation { agent, preference }
    }

    fn apply(&self, e: &Economy) -> Result<Economy> {
        e.with_preference(self.agent, self.preference)
    }
}

pub(crate) struct Draft<'a> {
    pub kind: WitnessKind,
    pub rule: &'a RuleId,
    pub economy: &'a Economy,
    pub variant: Option<Economy>,
    pub agents: Vec<AgentId>,
    pub before: Allocation,
    pub after: Option<Allocation>,
    pub transfer: Option<(Rational, Rational)>,
}

impl Draft<'_> {
    /// Seals the witness, filling the comparison from an independent replay.
    pub(crate) fn seal(self) -> Witness {
        let mut w = Witness {
            kind: self.kind,
            rule: self.rule.clone(),
            economy: self.economy.clone(),
            variant: self.variant,
            agents: self.agents,
            before: self.before,
            after: self.after,
            transfer: self.transfer,
            comparison: String::new(),
        };
        w.comparison = w
            .replay()
            .unwrap_or_else(|err| panic!("checker built a witness that does not replay: {err}"));
        w
    }

    pub(crate) fn verdict(self) -> Verdict {
        Verdict::Violation(Box::new(self.seal()))
    }
}

fn simple<'a>(kind: WitnessKind, rule: &'a RuleId, e: &'a Economy, agents: Vec<AgentId>, x: Allocation) -> Draft<'a> {
    Draft {
        kind,
        rule,
        economy: e,
        variant: None,
        agents,
        before: x,
        after: None,
        transfer: None,
    }
}

fn paired<'a>(
    kind: WitnessKind,
    rule: &'a RuleId,
    e: &'a Economy,
    agents: Vec<AgentId>,
    x: Allocation,
    variant: Economy,
    y: Allocation,
) -> Draft<'a> {
    Draft {
        kind,
        rule,
        economy: e,
        variant: Some(variant),
        agents,
        before: x,
        after: Some(y),
        transfer: None,
    }
}

/// Same-sidedness: nobody beyond their peak under excess demand, nobody
/// short of it under excess supply.
pub fn check_efficiency(rule: &RuleId, e: &Economy) -> Result<Verdict> {
    let x = rule.apply(e)?;
    let z = e.excess();
    let bad = e.ids().find(|id| {
        let (xi, p) = (x.get(*id), e.peak(*id));
        (!z.is_negative() && xi > p) || (!z.is_positive() && xi < p)
    });
    Ok(match bad {
        Some(i) => simple(WitnessKind::Efficiency, rule, e, vec![i], x).verdict(),
        None => Verdict::Pass { checked: e.len() },
    })
}

/// Everyone weakly prefers their allocation to their endowment.
pub fn check_elb(rule: &RuleId, e: &Economy) -> Result<Verdict> {
    let x = rule.apply(e)?;
    let bad = e
        .ids()
        .find(|id| e.preference(*id).strictly_prefers(e.endowment(*id), x.get(*id)));
    Ok(match bad {
        Some(i) => simple(WitnessKind::EndowmentsLowerBound, rule, e, vec![i], x).verdict(),
        None => Verdict::Pass { checked: e.len() },
    })
}

/// A weight change that keeps an agent's peak leaves that agent's own
/// amount unchanged.
pub fn check_own_peak_only(rule: &RuleId, e: &Economy, deviations: &[Deviation]) -> Result<Verdict> {
    let x = rule.apply(e)?;
    for d in deviations {
        if d.preference.peak() != e.peak(d.agent) {
            return Err(Error::InvalidPerturbation(format!(
                "deviation moves agent {}'s peak",
                d.agent
            )));
        }
    }
    for d in deviations {
        let v = d.apply(e)?;
        let y = rule.apply(&v)?;
        if y.get(d.agent) != x.get(d.agent) {
            return Ok(paired(WitnessKind::OwnPeakOnly, rule, e, vec![d.agent], x, v, y).verdict());
        }
    }
    Ok(Verdict::Pass {
        checked: deviations.len(),
    })
}

/// Peak-preserving changes of any group of agents leave the whole
/// allocation unchanged.
pub fn check_peak_only(rule: &RuleId, e: &Economy, profiles: &[Vec<Deviation>]) -> Result<Verdict> {
    let x = rule.apply(e)?;
    for profile in profiles {
        let mut v = e.clone();
        for d in profile {
            if d.preference.peak() != e.peak(d.agent) {
                return Err(Error::InvalidPerturbation(format!(
                    "deviation moves agent {}'s peak",
                    d.agent
                )));
            }
            v = d.apply(&v)?;
        }
        let y = rule.apply(&v)?;
        if y != x {
            let agents = profile.iter().map(|d| d.agent).collect();
            return Ok(paired(WitnessKind::PeakOnly, rule, e, agents, x, v, y).verdict());
        }
    }
    Ok(Verdict::Pass {
        checked: profiles.len(),
    })
}

/// No misreport makes the deviator strictly better off under the true
/// preference.
pub fn check_strategy_proofness(rule: &RuleId, e: &Economy, misreports: &[Deviation]) -> Result<Verdict> {
    let x = rule.apply(e)?;
    for d in misreports {
        let v = d.apply(e)?;
        let y = rule.apply(&v)?;
        let i = d.agent;
        if e.preference(i).strictly_prefers(y.get(i), x.get(i)) {
            return Ok(paired(WitnessKind::StrategyProofness, rule, e, vec![i], x, v, y).verdict());
        }
    }
    Ok(Verdict::Pass {
        checked: misreports.len(),
    })
}

/// A change that leaves the deviator's own amount fixed changes nobody's.
pub fn check_non_bossiness(rule: &RuleId, e: &Economy, deviations: &[Deviation]) -> Result<Verdict> {
    let x = rule.apply(e)?;
    for d in deviations {
        let v = d.apply(e)?;
        let y = rule.apply(&v)?;
        if y.get(d.agent) == x.get(d.agent) && y != x {
            return Ok(paired(WitnessKind::NonBossiness, rule, e, vec![d.agent], x, v, y).verdict());
        }
    }
    Ok(Verdict::Pass {
        checked: deviations.len(),
    })
}

/// More endowment for some agents: with excess demand after the increase
/// nobody may lose; with excess supply before it nobody may gain.
pub fn check_os_endow_mono(rule: &RuleId, e: &Economy, increased: &BTreeMap<AgentId, Rational>) -> Result<Verdict> {
    let v = e.with_endowments(increased)?;
    if let Some(id) = e.ids().find(|id| v.endowment(*id) < e.endowment(*id)) {
        return Err(Error::InvalidPerturbation(format!("agent {id}'s endowment decreases")));
    }
    let (z, z_new) = (e.excess(), v.excess());
    let demand_clause = !z_new.is_negative();
    let supply_clause = !z.is_positive();
    if !demand_clause && !supply_clause {
        return Ok(Verdict::Inapplicable {
            reason: format!("z={z} > 0 > z'={z_new}"),
        });
    }
    let x = rule.apply(e)?;
    let y = rule.apply(&v)?;
    let bad = e.ids().find(|id| {
        let pref = e.preference(*id);
        (demand_clause && pref.strictly_prefers(x.get(*id), y.get(*id)))
            || (supply_clause && pref.strictly_prefers(y.get(*id), x.get(*id)))
    });
    Ok(match bad {
        Some(i) => paired(WitnessKind::EndowmentsMonotonicity, rule, e, vec![i], x, v, y).verdict(),
        None => Verdict::Pass { checked: e.len() },
    })
}

/// Every nonempty proper subset of the agents.
pub fn proper_subsets(e: &Economy) -> Vec<BTreeSet<AgentId>> {
    let ids: Vec<AgentId> = e.ids().collect();
    let n = ids.len();
    assert!(n < 24, "too many agents to enumerate subsets");
    (1..(1u32 << n) - 1)
        .map(|mask| {
            ids.iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, id)| *id)
                .collect()
        })
        .collect()
}

/// On every subeconomy on the same side of zero excess, the common agents'
/// welfare moves in one direction. Subsets on the other side are skipped.
pub fn check_os_pop_mono(rule: &RuleId, e: &Economy, subsets: &[BTreeSet<AgentId>]) -> Result<Verdict> {
    let x = rule.apply(e)?;
    let z = e.excess();
    let mut checked = 0;
    for subset in subsets {
        if subset.len() >= e.len() {
            return Err(Error::InvalidSubset("subset is not proper".into()));
        }
        let v = e.restrict(subset)?;
        if (z * v.excess()).is_negative() {
            continue;
        }
        checked += 1;
        let y = rule.apply(&v)?;
        let gainer = subset
            .iter()
            .find(|id| e.preference(**id).strictly_prefers(y.get(**id), x.get(**id)));
        let loser = subset
            .iter()
            .find(|id| e.preference(**id).strictly_prefers(x.get(**id), y.get(**id)));
        if let (Some(&i), Some(&j)) = (gainer, loser) {
            return Ok(paired(WitnessKind::PopulationMonotonicity, rule, e, vec![i, j], x, v, y).verdict());
        }
    }
    Ok(Verdict::Pass { checked })
}

/// Agents on the long side of the market are fully satiated.
pub fn check_lemma2_satiation(rule: &RuleId, e: &Economy) -> Result<Verdict> {
    let x = rule.apply(e)?;
    let z = e.excess();
    let bad = e.ids().find(|id| {
        let (p, w) = (e.peak(*id), e.endowment(*id));
        let covered = (!z.is_negative() && p <= w) || (!z.is_positive() && p >= w);
        covered && x.get(*id) != p
    });
    Ok(match bad {
        Some(i) => simple(WitnessKind::Satiation, rule, e, vec![i], x).verdict(),
        None => Verdict::Pass { checked: e.len() },
    })
}

/// No agent strictly prefers its own endowment plus another agent's net
/// trade (when nonnegative) to its allocation under `rule`.
pub fn check_envy_free_net_trades_for(rule: &RuleId, e: &Economy) -> Result<Verdict> {
    let x = rule.apply(e)?;
    let trades = x.net_trades(e);
    let mut checked = 0;
    for i in e.ids() {
        for j in e.ids().filter(|j| *j != i) {
            let copied = e.endowment(i) + trades[&j];
            if copied.is_negative() {
                continue;
            }
            checked += 1;
            if e.preference(i).strictly_prefers(copied, x.get(i)) {
                return Ok(simple(WitnessKind::EnvyFreeNetTrades, rule, e, vec![i, j], x).verdict());
            }
        }
    }
    Ok(Verdict::Pass { checked })
}

/// Envy-free net trades under the uniform reallocation rule.
pub fn check_envy_free_net_trades(e: &Economy) -> Result<Verdict> {
    check_envy_free_net_trades_for(&RuleId::UniformRealloc, e)
}
