//! Replayable records of axiom and manipulation violations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AgentId, Allocation, Economy};
use crate::rational::Rational;
use crate::rules::RuleId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WitnessKind {
    Efficiency,
    EndowmentsLowerBound,
    OwnPeakOnly,
    PeakOnly,
    StrategyProofness,
    NonBossiness,
    EndowmentsMonotonicity,
    PopulationMonotonicity,
    Satiation,
    EnvyFreeNetTrades,
    Withdrawal,
    WeakWithdrawal,
    Merging,
    Splitting,
    Predelivery,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 15] = [
        WitnessKind::Efficiency,
        WitnessKind::EndowmentsLowerBound,
        WitnessKind::OwnPeakOnly,
        WitnessKind::PeakOnly,
        WitnessKind::StrategyProofness,
        WitnessKind::NonBossiness,
        WitnessKind::EndowmentsMonotonicity,
        WitnessKind::PopulationMonotonicity,
        WitnessKind::Satiation,
        WitnessKind::EnvyFreeNetTrades,
        WitnessKind::Withdrawal,
        WitnessKind::WeakWithdrawal,
        WitnessKind::Merging,
        WitnessKind::Splitting,
        WitnessKind::Predelivery,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            WitnessKind::Efficiency => "efficiency",
            WitnessKind::EndowmentsLowerBound => "elb",
            WitnessKind::OwnPeakOnly => "own-peak-only",
            WitnessKind::PeakOnly => "peak-only",
            WitnessKind::StrategyProofness => "strategy-proofness",
            WitnessKind::NonBossiness => "non-bossiness",
            WitnessKind::EndowmentsMonotonicity => "os-endow-mono",
            WitnessKind::PopulationMonotonicity => "os-pop-mono",
            WitnessKind::Satiation => "lemma2",
            WitnessKind::EnvyFreeNetTrades => "envy-free",
            WitnessKind::Withdrawal => "withdrawal",
            WitnessKind::WeakWithdrawal => "weak-withdrawal",
            WitnessKind::Merging => "merging",
            WitnessKind::Splitting => "splitting",
            WitnessKind::Predelivery => "predelivery",
        }
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WitnessKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::UnknownAxiom(s.to_string()))
    }
}

/// A concrete violation: the economies involved, the agents that matter,
/// the rule's allocations on each economy and, for manipulations that
/// redistribute a joint amount, the split `(x_i, x_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub rule: RuleId,
    pub economy: Economy,
    pub variant: Option<Economy>,
    pub agents: Vec<AgentId>,
    pub before: Allocation,
    pub after: Option<Allocation>,
    pub transfer: Option<(Rational, Rational)>,
    pub comparison: String,
}

fn stale(msg: impl Into<String>) -> Error {
    Error::StaleWitness(msg.into())
}

impl Witness {
    /// Recomputes every allocation and comparison from the stored economies
    /// and returns the comparison text if the violation is genuine.
    pub fn replay(&self) -> Result<String> {
        let e = &self.economy;
        let before = self.rule.apply(e)?;
        if before != self.before {
            return Err(stale(format!("stored allocation {} != {}", self.before, before)));
        }
        let after = match &self.variant {
            Some(v) => Some(self.rule.apply(v)?),
            None => None,
        };
        if after != self.after {
            return Err(stale("stored variant allocation differs from the rule's"));
        }
        for id in &self.agents {
            let in_some = e.contains(*id) || self.variant.as_ref().is_some_and(|v| v.contains(*id));
            if !in_some {
                return Err(stale(format!("agent {id} appears in neither economy")));
            }
        }
        let comparison = match self.kind {
            WitnessKind::Efficiency => self.replay_efficiency(&before)?,
            WitnessKind::EndowmentsLowerBound => self.replay_elb(&before)?,
            WitnessKind::OwnPeakOnly => self.replay_own_peak_only(&before, self.after_ref(&after)?)?,
            WitnessKind::PeakOnly => self.replay_peak_only(&before, self.after_ref(&after)?)?,
            WitnessKind::StrategyProofness => self.replay_strategy(&before, self.after_ref(&after)?)?,
            WitnessKind::NonBossiness => self.replay_non_bossiness(&before, self.after_ref(&after)?)?,
            WitnessKind::EndowmentsMonotonicity => self.replay_endow_mono(&before, self.after_ref(&after)?)?,
            WitnessKind::PopulationMonotonicity => self.replay_pop_mono(&before, self.after_ref(&after)?)?,
            WitnessKind::Satiation => self.replay_satiation(&before)?,
            WitnessKind::EnvyFreeNetTrades => self.replay_envy(&before)?,
            WitnessKind::Withdrawal | WitnessKind::WeakWithdrawal => {
                self.replay_withdrawal(&before, self.after_ref(&after)?)?
            }
            WitnessKind::Merging => self.replay_merging(&before, self.after_ref(&after)?)?,
            WitnessKind::Splitting => self.replay_splitting(&before, self.after_ref(&after)?)?,
            WitnessKind::Predelivery => self.replay_predelivery(&before, self.after_ref(&after)?)?,
        };
        Ok(comparison)
    }

    /// Whether [`Witness::replay`] confirms the violation.
    pub fn replays(&self) -> bool {
        self.replay().is_ok()
    }

    fn after_ref<'a>(&self, after: &'a Option<Allocation>) -> Result<&'a Allocation> {
        after
            .as_ref()
            .ok_or_else(|| stale(format!("{} witness needs a variant economy", self.kind)))
    }

    fn variant(&self) -> Result<&Economy> {
        self.variant
            .as_ref()
            .ok_or_else(|| stale(format!("{} witness needs a variant economy", self.kind)))
    }

    fn agent(&self, k: usize) -> Result<AgentId> {
        self.agents
            .get(k)
            .copied()
            .ok_or_else(|| stale(format!("{} witness names too few agents", self.kind)))
    }

    fn require(&self, cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(stale(msg()))
        }
    }

    fn replay_efficiency(&self, x: &Allocation) -> Result<String> {
        let e = &self.economy;
        let i = self.agent(0)?;
        let (p, xi, z) = (e.peak(i), x.get(i), e.excess());
        if !z.is_negative() && xi > p {
            return Ok(format!("z={z} >= 0 but agent {i} gets {xi} > peak {p}"));
        }
        if !z.is_positive() && xi < p {
            return Ok(format!("z={z} <= 0 but agent {i} gets {xi} < peak {p}"));
        }
        Err(stale(format!(
            "agent {i}'s amount {xi} is on the efficient side of {p}"
        )))
    }

    fn replay_elb(&self, x: &Allocation) -> Result<String> {
        let e = &self.economy;
        let i = self.agent(0)?;
        let (w, xi) = (e.endowment(i), x.get(i));
        self.require(e.preference(i).strictly_prefers(w, xi), || {
            format!("agent {i} does not prefer {w} to {xi}")
        })?;
        Ok(format!("agent {i}: endowment {w} P {xi}"))
    }

    /// `variant` must equal the economy with only `agent`'s preference
    /// changed; `same_peak` additionally pins that agent's peak.
    fn check_unilateral(&self, agent: AgentId, same_peak: bool) -> Result<()> {
        let e = &self.economy;
        let v = self.variant()?;
        self.require(v.id_set() == e.id_set(), || "variant has different agents".into())?;
        for (id, a) in e.agents() {
            let b = v.agent(id)?;
            self.require(a.endowment == b.endowment, || format!("agent {id}'s endowment changed"))?;
            if id != agent {
                self.require(a.preference == b.preference, || {
                    format!("agent {id} is not the deviator but its preference changed")
                })?;
            } else if same_peak {
                self.require(a.preference.peak() == b.preference.peak(), || {
                    format!("agent {id}'s peak changed")
                })?;
            }
        }
        Ok(())
    }

    fn replay_own_peak_only(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let i = self.agent(0)?;
        self.check_unilateral(i, true)?;
        self.require(x.get(i) != y.get(i), || format!("agent {i}'s amount did not change"))?;
        Ok(format!(
            "agent {i} changes only weights; own amount {} -> {}",
            x.get(i),
            y.get(i)
        ))
    }

    fn replay_peak_only(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        self.require(v.id_set() == e.id_set(), || "variant has different agents".into())?;
        for (id, a) in e.agents() {
            let b = v.agent(id)?;
            self.require(a.endowment == b.endowment, || format!("agent {id}'s endowment changed"))?;
            self.require(a.preference.peak() == b.preference.peak(), || {
                format!("agent {id}'s peak changed")
            })?;
        }
        self.require(x != y, || "allocation did not change".into())?;
        Ok(format!("same peaks, allocation {x} -> {y}"))
    }

    fn replay_strategy(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let i = self.agent(0)?;
        self.check_unilateral(i, false)?;
        let truth = self.economy.preference(i);
        self.require(truth.strictly_prefers(y.get(i), x.get(i)), || {
            format!("agent {i} does not gain by misreporting")
        })?;
        Ok(format!(
            "agent {i} misreports peak {}: {} P {} under the true preference",
            self.variant()?.peak(i),
            y.get(i),
            x.get(i)
        ))
    }

    fn replay_non_bossiness(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let i = self.agent(0)?;
        self.check_unilateral(i, false)?;
        self.require(x.get(i) == y.get(i), || format!("agent {i}'s own amount changed"))?;
        self.require(x != y, || "allocation did not change".into())?;
        Ok(format!(
            "agent {i} keeps {} but the allocation moves {x} -> {y}",
            x.get(i)
        ))
    }

    fn replay_endow_mono(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        self.require(v.id_set() == e.id_set(), || "variant has different agents".into())?;
        for (id, a) in e.agents() {
            let b = v.agent(id)?;
            self.require(a.preference == b.preference, || {
                format!("agent {id}'s preference changed")
            })?;
            self.require(b.endowment >= a.endowment, || format!("agent {id}'s endowment fell"))?;
        }
        let i = self.agent(0)?;
        let pref = e.preference(i);
        let (xi, yi) = (x.get(i), y.get(i));
        if !v.excess().is_negative() && pref.strictly_prefers(xi, yi) {
            return Ok(format!("z'={} >= 0 but agent {i} falls from {xi} to {yi}", v.excess()));
        }
        if !e.excess().is_positive() && pref.strictly_prefers(yi, xi) {
            return Ok(format!(
                "z={} <= 0 but agent {i} prefers {yi} after the increase to {xi} before",
                e.excess()
            ));
        }
        Err(stale(format!("agent {i} is not hurt on the applicable side")))
    }

    fn replay_pop_mono(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        let sub: BTreeSet<AgentId> = v.id_set();
        self.require(
            !sub.is_empty() && sub.len() < e.len() && e.restrict(&sub).as_ref() == Ok(v),
            || "variant is not a proper subeconomy".into(),
        )?;
        self.require(!(e.excess() * v.excess()).is_negative(), || {
            "economies lie on opposite sides of zero excess".into()
        })?;
        let (i, j) = (self.agent(0)?, self.agent(1)?);
        self.require(e.preference(i).strictly_prefers(y.get(i), x.get(i)), || {
            format!("agent {i} does not gain in the subeconomy")
        })?;
        self.require(e.preference(j).strictly_prefers(x.get(j), y.get(j)), || {
            format!("agent {j} does not lose in the subeconomy")
        })?;
        Ok(format!(
            "agent {i} improves {} -> {} while agent {j} worsens {} -> {}",
            x.get(i),
            y.get(i),
            x.get(j),
            y.get(j)
        ))
    }

    fn replay_satiation(&self, x: &Allocation) -> Result<String> {
        let e = &self.economy;
        let i = self.agent(0)?;
        let (p, w, xi) = (e.peak(i), e.endowment(i), x.get(i));
        let z = e.excess();
        let covered = (!z.is_negative() && p <= w) || (!z.is_positive() && p >= w);
        self.require(covered && xi != p, || format!("agent {i} is not a satiation violation"))?;
        Ok(format!(
            "z={z}, peak {p} vs endowment {w}, but agent {i} gets {xi} != {p}"
        ))
    }

    fn replay_envy(&self, x: &Allocation) -> Result<String> {
        let e = &self.economy;
        let (i, j) = (self.agent(0)?, self.agent(1)?);
        let copied = e.endowment(i) + x.get(j) - e.endowment(j);
        self.require(!copied.is_negative(), || "copied net trade is infeasible".into())?;
        self.require(e.preference(i).strictly_prefers(copied, x.get(i)), || {
            format!("agent {i} does not envy agent {j}'s net trade")
        })?;
        Ok(format!(
            "agent {i} prefers {copied} (own endowment plus agent {j}'s net trade) to {}",
            x.get(i)
        ))
    }

    fn transfer(&self) -> Result<(Rational, Rational)> {
        self.transfer
            .ok_or_else(|| stale(format!("{} witness needs a transfer", self.kind)))
    }

    /// Both amounts weakly better, at least one (both, if `strict`) strictly.
    fn improves_pair(
        &self,
        x: &Allocation,
        (i, xi): (AgentId, Rational),
        (j, xj): (AgentId, Rational),
        strict: bool,
    ) -> Result<String> {
        let e = &self.economy;
        let (pi, pj) = (e.preference(i), e.preference(j));
        let (si, sj) = (pi.strictly_prefers(xi, x.get(i)), pj.strictly_prefers(xj, x.get(j)));
        let (wi, wj) = (pi.weakly_prefers(xi, x.get(i)), pj.weakly_prefers(xj, x.get(j)));
        let ok = if strict { si && sj } else { wi && wj && (si || sj) };
        self.require(ok && !xi.is_negative() && !xj.is_negative(), || {
            format!("split ({xi}, {xj}) does not improve agents {i} and {j}")
        })?;
        let rel = |s: bool| if s { "P" } else { "I" };
        Ok(format!(
            "agent {i}: {xi} {} {}; agent {j}: {xj} {} {}",
            rel(si),
            x.get(i),
            rel(sj),
            x.get(j)
        ))
    }

    fn replay_withdrawal(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        let (i, j) = (self.agent(0)?, self.agent(1)?);
        self.require(e.without(j).as_ref() == Ok(v), || {
            format!("variant is not the economy without agent {j}")
        })?;
        let (xi, xj) = self.transfer()?;
        let total = y.get(i) + e.endowment(j);
        self.require(xi + xj == total, || format!("split does not sum to {total}"))?;
        let verdict = self.improves_pair(x, (i, xi), (j, xj), self.kind == WitnessKind::Withdrawal)?;
        Ok(format!("T={total} = {} + {}; {verdict}", y.get(i), e.endowment(j)))
    }

    fn replay_merging(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        let (i, j) = (self.agent(0)?, self.agent(1)?);
        let expected = e.without(j)?.with_endowment(i, e.endowment(i) + e.endowment(j))?;
        self.require(&expected == v, || format!("variant is not agent {j} merged into {i}"))?;
        let (xi, xj) = self.transfer()?;
        let total = y.get(i);
        self.require(xi + xj == total, || format!("split does not sum to {total}"))?;
        let verdict = self.improves_pair(x, (i, xi), (j, xj), false)?;
        Ok(format!("T={total}; {verdict}"))
    }

    fn replay_splitting(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        let (i, g) = (self.agent(0)?, self.agent(1)?);
        self.require(!e.contains(g), || format!("guest {g} is already in the economy"))?;
        let host = v.endowment(i);
        let guest = v.endowment(g);
        self.require(host + guest == e.endowment(i), || "split does not add up".into())?;
        let expected = e.with_endowment(i, host)?.with_agent(g, *v.preference(g), guest)?;
        self.require(&expected == v, || "variant is not a split of the host".into())?;
        let combined = y.get(i) + y.get(g);
        self.require(e.preference(i).strictly_prefers(combined, x.get(i)), || {
            format!("agent {i} does not gain from splitting")
        })?;
        Ok(format!(
            "agent {i} splits {} into {host} + {guest}: {} + {} = {combined} P {}",
            e.endowment(i),
            y.get(i),
            y.get(g),
            x.get(i)
        ))
    }

    fn replay_predelivery(&self, x: &Allocation, y: &Allocation) -> Result<String> {
        let e = &self.economy;
        let v = self.variant()?;
        let (i, j) = (self.agent(0)?, self.agent(1)?);
        let delivered = e.endowment(i) + e.endowment(j) - x.get(j);
        let expected = e.without(j)?.with_endowment(i, delivered)?;
        self.require(&expected == v, || {
            format!("variant is not agent {j}'s pre-delivery to agent {i}")
        })?;
        self.require(e.preference(i).strictly_prefers(y.get(i), x.get(i)), || {
            format!("agent {i} does not gain from the pre-delivery")
        })?;
        Ok(format!(
            "agent {j} pre-delivers to agent {i} (endowment {delivered}): {} P {}",
            y.get(i),
            x.get(i)
        ))
    }
}
