//! Agents, preferences, economies and allocations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::{Bound, Interval};
use crate::rational::Rational;

/// Identity of a potential agent. Ids are global, so an agent keeps its id
/// when it leaves or joins an economy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    StrictlyBetter,
    Indifferent,
    StrictlyWorse,
}

/// Single-peaked preference over amounts of the good.
///
/// Disutility is `left * (peak - x)` below the peak and `right * (x - peak)`
/// above it; lower disutility is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Preference {
    peak: Rational,
    left: Rational,
    right: Rational,
}

impl Preference {
    pub fn new(peak: Rational, left: Rational, right: Rational) -> Result<Self> {
        if !left.is_positive() || !right.is_positive() {
            return Err(Error::NonPositiveWeight { left, right });
        }
        Ok(Preference { peak, left, right })
    }

    /// Equal slopes on both sides of the peak.
    pub fn symmetric(peak: Rational) -> Self {
        Preference {
            peak,
            left: Rational::ONE,
            right: Rational::ONE,
        }
    }

    pub fn peak(&self) -> Rational {
        self.peak
    }

    pub fn left_weight(&self) -> Rational {
        self.left
    }

    pub fn right_weight(&self) -> Rational {
        self.right
    }

    /// Same slopes, different peak.
    pub fn with_peak(&self, peak: Rational) -> Self {
        Preference { peak, ..*self }
    }

    /// Same peak, different slopes.
    pub fn with_weights(&self, left: Rational, right: Rational) -> Result<Self> {
        Preference::new(self.peak, left, right)
    }

    pub fn disutility(&self, x: Rational) -> Rational {
        if x <= self.peak {
            self.left * (self.peak - x)
        } else {
            self.right * (x - self.peak)
        }
    }

    pub fn compare(&self, x: Rational, y: Rational) -> Comparison {
        match self.disutility(x).cmp(&self.disutility(y)) {
            std::cmp::Ordering::Less => Comparison::StrictlyBetter,
            std::cmp::Ordering::Equal => Comparison::Indifferent,
            std::cmp::Ordering::Greater => Comparison::StrictlyWorse,
        }
    }

    /// `x P y`
    pub fn strictly_prefers(&self, x: Rational, y: Rational) -> bool {
        self.disutility(x) < self.disutility(y)
    }

    /// `x R y`
    pub fn weakly_prefers(&self, x: Rational, y: Rational) -> bool {
        self.disutility(x) <= self.disutility(y)
    }

    /// `{y >= 0 : y P x}`.
    pub fn strict_improvement_interval(&self, x: Rational) -> Interval {
        let p = self.peak;
        if x == p {
            return Interval::empty();
        }
        let (lower, upper) = if x < p {
            (x, p + self.left / self.right * (p - x))
        } else {
            (p - self.right / self.left * (x - p), x)
        };
        nonnegative(Interval::open(lower, upper))
    }

    /// `{y >= 0 : y R x}`; contains `x` itself and its indifferent mirror.
    pub fn weak_improvement_interval(&self, x: Rational) -> Interval {
        let p = self.peak;
        let (lower, upper) = if x <= p {
            (x, p + self.left / self.right * (p - x))
        } else {
            (p - self.right / self.left * (x - p), x)
        };
        nonnegative(Interval::closed(lower, upper))
    }
}

fn nonnegative(iv: Interval) -> Interval {
    iv.intersect(&Interval::new(Bound::Closed(Rational::ZERO), Bound::Unbounded))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Agent {
    pub preference: Preference,
    pub endowment: Rational,
}

/// Sign of the aggregate excess demand, with zero counted as demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    ExcessDemand,
    ExcessSupply,
}

/// A finite set of agents, each with a preference and an endowment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Economy {
    agents: BTreeMap<AgentId, Agent>,
}

impl Economy {
    pub fn new(agents: impl IntoIterator<Item = (AgentId, Preference, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (id, preference, endowment) in agents {
            if endowment.is_negative() {
                return Err(Error::NegativeEndowment(id, endowment));
            }
            if preference.peak().is_negative() {
                return Err(Error::NegativePeak(id, preference.peak()));
            }
            if map.insert(id, Agent { preference, endowment }).is_some() {
                return Err(Error::DuplicateAgent(id));
            }
        }
        if map.is_empty() {
            return Err(Error::NoAgents);
        }
        Ok(Economy { agents: map })
    }

    /// Agents `1..=n` with symmetric preferences, from `(peak, endowment)` pairs.
    pub fn from_peaks_and_endowments(pairs: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        Economy::new(
            pairs
                .into_iter()
                .enumerate()
                .map(|(k, (p, w))| (AgentId(k as u32 + 1), Preference::symmetric(p), w)),
        )
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.agents.keys().copied()
    }

    pub fn id_set(&self) -> BTreeSet<AgentId> {
        self.agents.keys().copied().collect()
    }

    pub fn agents(&self) -> impl Iterator<Item = (AgentId, &Agent)> + '_ {
        self.agents.iter().map(|(id, a)| (*id, a))
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.agents.contains_key(&id)
    }

    pub fn agent(&self, id: AgentId) -> Result<&Agent> {
        self.agents.get(&id).ok_or(Error::UnknownAgent(id))
    }

    fn get(&self, id: AgentId) -> &Agent {
        self.agents
            .get(&id)
            .unwrap_or_else(|| panic!("agent {id} is not in the economy"))
    }

    /// Panics if `id` is not present.
    pub fn preference(&self, id: AgentId) -> &Preference {
        &self.get(id).preference
    }

    /// Panics if `id` is not present.
    pub fn peak(&self, id: AgentId) -> Rational {
        self.get(id).preference.peak()
    }

    /// Panics if `id` is not present.
    pub fn endowment(&self, id: AgentId) -> Rational {
        self.get(id).endowment
    }

    pub fn endowments(&self) -> BTreeMap<AgentId, Rational> {
        self.agents.iter().map(|(id, a)| (*id, a.endowment)).collect()
    }

    pub fn total_endowment(&self) -> Rational {
        self.agents.values().map(|a| a.endowment).sum()
    }

    /// `z(e) = sum(peak - endowment)`.
    pub fn excess(&self) -> Rational {
        self.agents.values().map(|a| a.preference.peak() - a.endowment).sum()
    }

    pub fn side(&self) -> Side {
        if self.excess().is_negative() {
            Side::ExcessSupply
        } else {
            Side::ExcessDemand
        }
    }

    /// Agents whose peak is strictly above their endowment.
    pub fn demanders(&self) -> BTreeSet<AgentId> {
        self.agents
            .iter()
            .filter(|(_, a)| a.preference.peak() > a.endowment)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Everyone who is not a demander.
    pub fn suppliers(&self) -> BTreeSet<AgentId> {
        self.agents
            .iter()
            .filter(|(_, a)| a.preference.peak() <= a.endowment)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Total amount suppliers hold above their peaks.
    pub fn aggregate_supply(&self) -> Rational {
        self.agents
            .values()
            .filter(|a| a.preference.peak() <= a.endowment)
            .map(|a| a.endowment - a.preference.peak())
            .sum()
    }

    /// Total amount demanders lack below their peaks.
    pub fn aggregate_demand(&self) -> Rational {
        self.agents
            .values()
            .filter(|a| a.preference.peak() > a.endowment)
            .map(|a| a.preference.peak() - a.endowment)
            .sum()
    }

    pub fn restrict(&self, subset: &BTreeSet<AgentId>) -> Result<Economy> {
        if subset.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        let mut agents = BTreeMap::new();
        for id in subset {
            let agent = self
                .agents
                .get(id)
                .ok_or_else(|| Error::InvalidSubset(format!("agent {id} is not in the economy")))?;
            agents.insert(*id, *agent);
        }
        Ok(Economy { agents })
    }

    /// The economy without agent `id`.
    pub fn without(&self, id: AgentId) -> Result<Economy> {
        let mut rest = self.id_set();
        if !rest.remove(&id) {
            return Err(Error::UnknownAgent(id));
        }
        self.restrict(&rest)
    }

    pub fn with_endowment(&self, id: AgentId, endowment: Rational) -> Result<Economy> {
        if endowment.is_negative() {
            return Err(Error::NegativeEndowment(id, endowment));
        }
        let mut e = self.clone();
        e.agents.get_mut(&id).ok_or(Error::UnknownAgent(id))?.endowment = endowment;
        Ok(e)
    }

    pub fn with_endowments(&self, endowments: &BTreeMap<AgentId, Rational>) -> Result<Economy> {
        let mut e = self.clone();
        for (id, w) in endowments {
            if w.is_negative() {
                return Err(Error::NegativeEndowment(*id, *w));
            }
            e.agents.get_mut(id).ok_or(Error::UnknownAgent(*id))?.endowment = *w;
        }
        Ok(e)
    }

    pub fn with_preference(&self, id: AgentId, preference: Preference) -> Result<Economy> {
        if preference.peak().is_negative() {
            return Err(Error::NegativePeak(id, preference.peak()));
        }
        let mut e = self.clone();
        e.agents.get_mut(&id).ok_or(Error::UnknownAgent(id))?.preference = preference;
        Ok(e)
    }

    /// Adds a new agent; fails if the id is taken.
    pub fn with_agent(&self, id: AgentId, preference: Preference, endowment: Rational) -> Result<Economy> {
        if self.contains(id) {
            return Err(Error::DuplicateAgent(id));
        }
        if endowment.is_negative() {
            return Err(Error::NegativeEndowment(id, endowment));
        }
        if preference.peak().is_negative() {
            return Err(Error::NegativePeak(id, preference.peak()));
        }
        let mut e = self.clone();
        e.agents.insert(id, Agent { preference, endowment });
        Ok(e)
    }

    /// Smallest positive id not used by this economy.
    pub fn fresh_id(&self) -> AgentId {
        (1..)
            .map(AgentId)
            .find(|id| !self.contains(*id))
            .expect("ids are unbounded")
    }
}

/// A feasible reallocation: nonnegative amounts summing to the total
/// endowment of the economy it answers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation {
    amounts: BTreeMap<AgentId, Rational>,
}

impl Allocation {
    pub fn for_economy(e: &Economy, amounts: BTreeMap<AgentId, Rational>) -> Result<Self> {
        if amounts.len() != e.len() || !e.ids().all(|id| amounts.contains_key(&id)) {
            return Err(Error::Infeasible("allocation agents differ from economy agents".into()));
        }
        if let Some((id, x)) = amounts.iter().find(|(_, x)| x.is_negative()) {
            return Err(Error::Infeasible(format!("agent {id} receives {x} < 0")));
        }
        let total: Rational = amounts.values().sum();
        let endowed = e.total_endowment();
        if total != endowed {
            return Err(Error::Infeasible(format!(
                "allocated {total} but endowments sum to {endowed}"
            )));
        }
        Ok(Allocation { amounts })
    }

    /// Panics if `id` is not allocated.
    pub fn get(&self, id: AgentId) -> Rational {
        *self
            .amounts
            .get(&id)
            .unwrap_or_else(|| panic!("agent {id} is not in the allocation"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, Rational)> + '_ {
        self.amounts.iter().map(|(id, x)| (*id, *x))
    }

    pub fn amounts(&self) -> &BTreeMap<AgentId, Rational> {
        &self.amounts
    }

    /// `x_i - omega_i` for every agent.
    pub fn net_trades(&self, e: &Economy) -> BTreeMap<AgentId, Rational> {
        self.amounts
            .iter()
            .map(|(id, x)| (*id, *x - e.endowment(*id)))
            .collect()
    }

    pub fn values(&self) -> Vec<Rational> {
        self.amounts.values().copied().collect()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.amounts.values().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn econ(pairs: &[(Rational, Rational)]) -> Economy {
        Economy::from_peaks_and_endowments(pairs.iter().copied()).unwrap()
    }

    pub(crate) fn example1() -> Economy {
        econ(&[
            (int(0), int(9)),
            (int(2), int(1)),
            (rat(7, 2), int(0)),
            (int(10), int(2)),
        ])
    }

    #[test]
    fn excess_of_example_one() {
        assert_eq!(example1().excess(), rat(7, 2));
    }

    #[test]
    fn excess_of_balanced_single_agent() {
        assert_eq!(econ(&[(int(3), int(3))]).excess(), int(0));
    }

    #[test]
    fn excess_by_direct_summation() {
        let e = econ(&[(int(1), int(3)), (int(5), int(1)), (int(5), int(1))]);
        assert_eq!(e.excess(), int(6));
    }

    #[test]
    fn demanders_of_example_three() {
        let e = Economy::new([
            (AgentId(1), Preference::symmetric(int(0)), int(4)),
            (AgentId(3), Preference::symmetric(int(6)), int(2)),
            (AgentId(4), Preference::symmetric(int(6)), int(2)),
        ])
        .unwrap();
        assert_eq!(e.demanders(), [AgentId(3), AgentId(4)].into());
        assert_eq!(e.aggregate_supply(), int(4));
    }

    #[test]
    fn no_demanders_when_everyone_is_at_peak() {
        let e = econ(&[(int(2), int(2)), (int(1), int(1))]);
        assert!(e.demanders().is_empty());
        assert_eq!(e.aggregate_supply(), int(0));
    }

    #[test]
    fn demanders_direct() {
        let e = econ(&[(int(0), int(3)), (int(9), int(1)), (int(4), int(1))]);
        assert_eq!(e.demanders(), [AgentId(2), AgentId(3)].into());
        assert_eq!(e.aggregate_supply(), int(3));
    }

    #[test]
    fn prefers_examples() {
        let p = Preference::symmetric(int(4));
        assert_eq!(p.compare(rat(10, 3), int(3)), Comparison::StrictlyBetter);
        assert_eq!(p.compare(int(4), int(5)), Comparison::StrictlyBetter);
        assert_eq!(p.compare(int(3), int(5)), Comparison::Indifferent);
        let tilted = Preference::new(int(1), int(14), int(1)).unwrap();
        assert_eq!(tilted.compare(int(14), int(0)), Comparison::StrictlyBetter);
        assert_eq!(tilted.compare(int(0), int(14)), Comparison::StrictlyWorse);
    }

    #[test]
    fn strict_improvement_intervals() {
        let p = Preference::symmetric(int(4));
        assert_eq!(p.strict_improvement_interval(int(3)), Interval::open(int(3), int(5)));
        assert!(p.strict_improvement_interval(int(4)).is_empty());
        let tilted = Preference::new(int(1), int(14), int(1)).unwrap();
        assert_eq!(
            tilted.strict_improvement_interval(int(0)),
            Interval::open(int(0), int(15))
        );
        // Above the peak the lower end is clipped at zero.
        let steep = Preference::new(int(1), int(1), int(14)).unwrap();
        assert_eq!(
            steep.strict_improvement_interval(int(2)),
            Interval::new(Bound::Closed(int(0)), Bound::Open(int(2)))
        );
    }

    #[test]
    fn weak_interval_includes_indifference_points() {
        let p = Preference::symmetric(int(4));
        assert_eq!(p.weak_improvement_interval(int(3)), Interval::closed(int(3), int(5)));
        assert_eq!(p.weak_improvement_interval(int(4)), Interval::point(int(4)));
    }

    #[test]
    fn restriction() {
        let e = econ(&[(int(1), int(3)), (int(4), int(1)), (int(3), int(1)), (int(1), int(3))]);
        let sub = e.restrict(&[AgentId(1), AgentId(2), AgentId(3)].into()).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.endowment(AgentId(1)), int(3));
        assert_eq!(sub.peak(AgentId(2)), int(4));
        assert_eq!(e.restrict(&e.id_set()).unwrap(), e);
        let single = e.restrict(&[AgentId(2)].into()).unwrap();
        assert_eq!(single.excess(), int(3));
        assert!(matches!(e.restrict(&BTreeSet::new()), Err(Error::InvalidSubset(_))));
        assert!(matches!(e.restrict(&[AgentId(9)].into()), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn allocation_feasibility_is_exact() {
        let e = econ(&[(int(1), int(2)), (int(3), int(2))]);
        let ok = Allocation::for_economy(&e, [(AgentId(1), int(1)), (AgentId(2), int(3))].into());
        assert!(ok.is_ok());
        let off = Allocation::for_economy(&e, [(AgentId(1), int(1)), (AgentId(2), rat(3001, 1000))].into());
        assert!(matches!(off, Err(Error::Infeasible(_))));
        let negative = Allocation::for_economy(&e, [(AgentId(1), int(-1)), (AgentId(2), int(5))].into());
        assert!(matches!(negative, Err(Error::Infeasible(_))));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(Economy::new([]), Err(Error::NoAgents)));
        assert!(matches!(
            Economy::new([
                (AgentId(1), Preference::symmetric(int(1)), int(1)),
                (AgentId(1), Preference::symmetric(int(2)), int(1)),
            ]),
            Err(Error::DuplicateAgent(_))
        ));
        assert!(matches!(
            Economy::new([(AgentId(1), Preference::symmetric(int(1)), int(-1))]),
            Err(Error::NegativeEndowment(..))
        ));
        assert!(Preference::new(int(1), int(0), int(1)).is_err());
    }
}
