//! The rule catalog.
//!
//! Every rule is a pure map from an [`Economy`] to a feasible
//! [`Allocation`]. Economies with zero aggregate excess use the
//! excess-demand formulas; at zero excess every efficient rule returns the
//! peak allocation, so the choice only fixes which formula computes it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AgentId, Allocation, Comparison, Economy, Side};
use crate::pwl::{self, Term};
use crate::rational::Rational;

/// Strict total order over agent ids used by the priority rules.
///
/// Listed ids come first, in the listed order; every other id follows in
/// increasing order. The dual reverses the whole comparator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Order {
    ranking: Vec<AgentId>,
    dual: bool,
}

impl Order {
    /// Increasing id order.
    pub fn natural() -> Self {
        Order::default()
    }

    pub fn ranked(ranking: Vec<AgentId>) -> Self {
        Order { ranking, dual: false }
    }

    pub fn dual(&self) -> Self {
        Order {
            ranking: self.ranking.clone(),
            dual: !self.dual,
        }
    }

    pub fn is_natural(&self) -> bool {
        self.ranking.is_empty() && !self.dual
    }

    fn key(&self, id: AgentId) -> (usize, AgentId) {
        let pos = self.ranking.iter().position(|r| *r == id).unwrap_or(self.ranking.len());
        (pos, id)
    }

    pub fn cmp(&self, a: AgentId, b: AgentId) -> Ordering {
        let ord = self.key(a).cmp(&self.key(b));
        if self.dual {
            ord.reverse()
        } else {
            ord
        }
    }

    pub fn sort(&self, ids: &mut [AgentId]) {
        ids.sort_by(|a, b| self.cmp(*a, *b));
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.ranking.is_empty() {
            parts.push(
                self.ranking
                    .iter()
                    .map(|id| id.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if self.dual {
            parts.push("dual".to_string());
        }
        write!(f, "{}", parts.join(":"))
    }
}

impl FromStr for Order {
    type Err = Error;

    /// Colon-separated segments: a comma list of ids and/or `dual`.
    fn from_str(s: &str) -> Result<Self> {
        let mut order = Order::natural();
        for segment in s.split(':').filter(|seg| !seg.is_empty()) {
            if segment == "dual" {
                order.dual = !order.dual;
                continue;
            }
            let ids = segment
                .split(',')
                .map(|tok| tok.trim().parse::<u32>().map(AgentId))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::UnknownRule(format!("bad order `{s}`")))?;
            let mut seen = ids.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != ids.len() {
                return Err(Error::UnknownRule(format!("order `{s}` repeats an id")));
            }
            order.ranking = ids;
        }
        Ok(order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleId {
    /// `min{p_i, w_i + lambda}` / `max{p_i, w_i - lambda}`.
    UniformRealloc,
    /// `min{p_i, lambda * w_i}` / `max{p_i, lambda * w_i}`.
    Proportional,
    /// Satiates the long side, serves the short side in `order`.
    Priority(Order),
    /// Smallest claims first, equal shares within a claim class.
    MaxSatiating,
    /// The endowment-blind uniform rule `min{p_i, lambda}` / `max{p_i, lambda}`.
    SprumontUniform,
    Endowments,
    /// Priority under `order` for odd populations, under its dual for even ones.
    PhiBar(Order),
    /// Priority by claim size or uniform reallocation, switched by the
    /// preference of the lowest-indexed agent on the long side.
    PhiStar,
}

impl RuleId {
    /// Every rule, with natural orders where an order is needed.
    pub fn catalog() -> Vec<RuleId> {
        vec![
            RuleId::UniformRealloc,
            RuleId::Proportional,
            RuleId::Priority(Order::natural()),
            RuleId::MaxSatiating,
            RuleId::SprumontUniform,
            RuleId::Endowments,
            RuleId::PhiBar(Order::natural()),
            RuleId::PhiStar,
        ]
    }

    pub fn tag(&self) -> &'static str {
        match self {
            RuleId::UniformRealloc => "uniform",
            RuleId::Proportional => "proportional",
            RuleId::Priority(_) => "priority",
            RuleId::MaxSatiating => "max-satiating",
            RuleId::SprumontUniform => "sprumont",
            RuleId::Endowments => "endowments",
            RuleId::PhiBar(_) => "phi-bar",
            RuleId::PhiStar => "phi-star",
        }
    }

    /// Whether the allocation depends on preferences only through peaks.
    pub fn is_peak_only(&self) -> bool {
        !matches!(self, RuleId::PhiStar)
    }

    /// Efficient, own-peak-only and meets the endowments lower bound.
    pub fn is_efficient_opo_elb(&self) -> bool {
        !matches!(self, RuleId::SprumontUniform | RuleId::Endowments)
    }

    pub fn apply(&self, e: &Economy) -> Result<Allocation> {
        match self {
            RuleId::UniformRealloc => Ok(uniform_realloc(e)),
            RuleId::Proportional => proportional(e),
            RuleId::Priority(order) => Ok(priority(order, e)),
            RuleId::MaxSatiating => Ok(max_satiating(e)),
            RuleId::SprumontUniform => Ok(sprumont_uniform(e)),
            RuleId::Endowments => Ok(endowments_rule(e)),
            RuleId::PhiBar(order) => Ok(phi_bar(order, e)),
            RuleId::PhiStar => Ok(phi_star(e)),
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleId::Priority(order) | RuleId::PhiBar(order) if !order.is_natural() => {
                write!(f, "{}:{}", self.tag(), order)
            }
            _ => write!(f, "{}", self.tag()),
        }
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = match s.split_once(':') {
            Some((tag, rest)) => (tag, Some(rest)),
            None => (s, None),
        };
        let order = || -> Result<Order> { rest.map_or(Ok(Order::natural()), str::parse) };
        let plain = |rule: RuleId| -> Result<RuleId> {
            match rest {
                None => Ok(rule),
                Some(_) => Err(Error::UnknownRule(s.to_string())),
            }
        };
        match tag {
            "uniform" | "uniform-realloc" => plain(RuleId::UniformRealloc),
            "proportional" => plain(RuleId::Proportional),
            "priority" => Ok(RuleId::Priority(order()?)),
            "max-satiating" => plain(RuleId::MaxSatiating),
            "sprumont" | "sprumont-uniform" => plain(RuleId::SprumontUniform),
            "endowments" => plain(RuleId::Endowments),
            "phi-bar" => Ok(RuleId::PhiBar(order()?)),
            "phi-star" => plain(RuleId::PhiStar),
            _ => Err(Error::UnknownRule(s.to_string())),
        }
    }
}

fn finish(e: &Economy, amounts: BTreeMap<AgentId, Rational>) -> Allocation {
    Allocation::for_economy(e, amounts).unwrap_or_else(|err| panic!("rule produced an infeasible allocation: {err}"))
}

/// Solves for the rationing parameter and evaluates every agent's term.
fn ration(e: &Economy, term_of: impl Fn(Rational, Rational) -> Term) -> Allocation {
    let ids: Vec<AgentId> = e.ids().collect();
    let terms: Vec<Term> = ids.iter().map(|id| term_of(e.peak(*id), e.endowment(*id))).collect();
    let lambda =
        pwl::solve(&terms, e.total_endowment()).expect("a feasible rationing parameter exists for every economy");
    finish(e, ids.into_iter().zip(terms.iter().map(|t| t.eval(lambda))).collect())
}

pub fn uniform_realloc(e: &Economy) -> Allocation {
    match e.side() {
        Side::ExcessDemand => ration(e, |p, w| Term::Min {
            cap: p,
            base: w,
            slope: Rational::ONE,
        }),
        // max{p, w - lambda} with lambda >= 0, written in mu = -lambda.
        Side::ExcessSupply => ration(e, |p, w| Term::Max {
            floor: p,
            base: w,
            slope: Rational::ONE,
        }),
    }
}

/// Defined only when every endowment is strictly positive.
pub fn proportional(e: &Economy) -> Result<Allocation> {
    if let Some(agent) = e.ids().find(|id| e.endowment(*id).is_zero()) {
        return Err(Error::ZeroEndowment {
            rule: "proportional".into(),
            agent,
        });
    }
    Ok(proportional_unchecked(e))
}

/// The proportional formulas evaluated as written; an agent with zero
/// endowment gets `min{p, 0}` or `max{p, 0}`.
pub(crate) fn proportional_unchecked(e: &Economy) -> Allocation {
    if e.total_endowment().is_zero() {
        return endowments_rule(e);
    }
    match e.side() {
        Side::ExcessDemand => ration(e, |p, w| Term::Min {
            cap: p,
            base: Rational::ZERO,
            slope: w,
        }),
        Side::ExcessSupply => ration(e, |p, w| Term::Max {
            floor: p,
            base: Rational::ZERO,
            slope: w,
        }),
    }
}

pub fn sprumont_uniform(e: &Economy) -> Allocation {
    match e.side() {
        Side::ExcessDemand => ration(e, |p, _| Term::Min {
            cap: p,
            base: Rational::ZERO,
            slope: Rational::ONE,
        }),
        Side::ExcessSupply => ration(e, |p, _| Term::Max {
            floor: p,
            base: Rational::ZERO,
            slope: Rational::ONE,
        }),
    }
}

pub fn endowments_rule(e: &Economy) -> Allocation {
    finish(e, e.endowments())
}

/// Agents on the short side: demanders under excess demand, agents holding
/// strictly more than their peak under excess supply.
fn rationed_side(e: &Economy) -> Vec<AgentId> {
    match e.side() {
        Side::ExcessDemand => e.demanders().into_iter().collect(),
        Side::ExcessSupply => e.ids().filter(|id| e.peak(*id) < e.endowment(*id)).collect(),
    }
}

/// How far agent `id` is from its peak on the rationed side.
fn claim(e: &Economy, id: AgentId) -> Rational {
    (e.peak(id) - e.endowment(id)).abs()
}

/// Satiates everyone off the rationed side, then serves `queue` (the
/// rationed side, in service order) from what is left.
fn serve_in_order(e: &Economy, queue: &[AgentId]) -> Allocation {
    let mut amounts: BTreeMap<AgentId, Rational> = e.ids().map(|id| (id, e.peak(id))).collect();
    match e.side() {
        Side::ExcessDemand => {
            let mut remaining = e.aggregate_supply();
            for &id in queue {
                let w = e.endowment(id);
                let x = e.peak(id).min(w + remaining);
                remaining -= x - w;
                amounts.insert(id, x);
            }
        }
        Side::ExcessSupply => {
            let mut remaining = e.aggregate_demand();
            for &id in queue {
                let w = e.endowment(id);
                let x = e.peak(id).max(w - remaining);
                remaining -= w - x;
                amounts.insert(id, x);
            }
        }
    }
    finish(e, amounts)
}

pub fn priority(order: &Order, e: &Economy) -> Allocation {
    let mut queue = rationed_side(e);
    order.sort(&mut queue);
    serve_in_order(e, &queue)
}

pub fn max_satiating(e: &Economy) -> Allocation {
    let mut queue = rationed_side(e);
    queue.sort_by_key(|id| (claim(e, *id), *id));
    let mut amounts: BTreeMap<AgentId, Rational> = e.ids().map(|id| (id, e.peak(id))).collect();
    let (mut remaining, sign) = match e.side() {
        Side::ExcessDemand => (e.aggregate_supply(), Rational::ONE),
        Side::ExcessSupply => (e.aggregate_demand(), -Rational::ONE),
    };
    for class in queue.chunk_by(|a, b| claim(e, *a) == claim(e, *b)) {
        let share = remaining / Rational::from(class.len());
        let granted = claim(e, class[0]).min(share);
        for &id in class {
            amounts.insert(id, e.endowment(id) + sign * granted);
        }
        remaining -= granted * Rational::from(class.len());
    }
    finish(e, amounts)
}

pub fn phi_bar(order: &Order, e: &Economy) -> Allocation {
    if e.len() % 2 == 1 {
        priority(order, e)
    } else {
        priority(&order.dual(), e)
    }
}

pub fn phi_star(e: &Economy) -> Allocation {
    let total = e.total_endowment();
    let prefers_priority = match e.side() {
        Side::ExcessDemand => {
            let Some(pivot) = e.suppliers().into_iter().next() else {
                return endowments_rule(e);
            };
            e.preference(pivot).compare(Rational::ZERO, total) == Comparison::StrictlyBetter
        }
        Side::ExcessSupply => {
            let Some(pivot) = e.ids().find(|id| e.peak(*id) >= e.endowment(*id)) else {
                return endowments_rule(e);
            };
            e.preference(pivot).compare(total, Rational::ZERO) == Comparison::StrictlyBetter
        }
    };
    if prefers_priority {
        let mut queue = rationed_side(e);
        queue.sort_by_key(|id| (claim(e, *id), *id));
        serve_in_order(e, &queue)
    } else {
        uniform_realloc(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preference;
    use crate::rational::{int, rat};

    fn econ(pairs: &[(i128, i128)]) -> Economy {
        Economy::from_peaks_and_endowments(pairs.iter().map(|(p, w)| (int(*p), int(*w)))).unwrap()
    }

    fn with_ids(agents: &[(u32, Rational, Rational)]) -> Economy {
        Economy::new(
            agents
                .iter()
                .map(|(id, p, w)| (AgentId(*id), Preference::symmetric(*p), *w)),
        )
        .unwrap()
    }

    fn values(a: &Allocation) -> Vec<Rational> {
        a.values()
    }

    fn ints(xs: &[i128]) -> Vec<Rational> {
        xs.iter().map(|x| int(*x)).collect()
    }

    fn example1() -> Economy {
        Economy::from_peaks_and_endowments([
            (int(0), int(9)),
            (int(2), int(1)),
            (rat(7, 2), int(0)),
            (int(10), int(2)),
        ])
        .unwrap()
    }

    #[test]
    fn uniform_example_one() {
        assert_eq!(
            values(&uniform_realloc(&example1())),
            vec![int(0), int(2), rat(7, 2), rat(13, 2)]
        );
    }

    #[test]
    fn uniform_at_peaks_returns_endowments() {
        let e = econ(&[(3, 3), (1, 1)]);
        assert_eq!(uniform_realloc(&e), endowments_rule(&e));
    }

    #[test]
    fn uniform_example_two_after_split() {
        let e = econ(&[(4, 1), (0, 2), (2, 1), (4, 1)]);
        assert_eq!(
            values(&uniform_realloc(&e)),
            vec![rat(5, 3), int(0), rat(5, 3), rat(5, 3)]
        );
    }

    #[test]
    fn uniform_excess_supply() {
        let e = econ(&[(0, 6), (2, 4), (3, 1)]);
        let a = uniform_realloc(&e);
        // max{0, 6 - l} + max{2, 4 - l} + 3 = 11  =>  l = 1
        assert_eq!(values(&a), ints(&[5, 3, 3]));
    }

    #[test]
    fn proportional_examples() {
        let e = econ(&[(4, 2), (0, 2), (2, 1)]);
        assert_eq!(values(&proportional(&e).unwrap()), vec![rat(10, 3), int(0), rat(5, 3)]);
        let balanced = econ(&[(1, 2), (3, 2)]);
        assert_eq!(values(&proportional(&balanced).unwrap()), ints(&[1, 3]));
        let single = econ(&[(5, 2)]);
        assert_eq!(values(&proportional(&single).unwrap()), ints(&[2]));
        let zero = econ(&[(1, 0), (3, 2)]);
        assert_eq!(
            proportional(&zero),
            Err(Error::ZeroEndowment {
                rule: "proportional".into(),
                agent: AgentId(1)
            })
        );
    }

    #[test]
    fn proportional_excess_supply_scales_down() {
        // max{1, 4l} + max{0, 2l} = 6 with l in [0, 1]: l = 1 gives 6.
        // Shrink demand: peaks (1, 0), endowments (4, 2) => 4l + 2l = 6.
        let e = econ(&[(1, 4), (0, 2), (3, 1)]);
        // z = -3; max{1,4l} + max{0,2l} + max{3,l} = 7
        // with l in [1/4, 1]: 4l + 2l + 3 = 7  =>  l = 2/3
        assert_eq!(values(&proportional(&e).unwrap()), vec![rat(8, 3), rat(4, 3), int(3)]);
    }

    #[test]
    fn priority_example_three() {
        let e = with_ids(&[(1, int(0), int(4)), (3, int(6), int(2)), (4, int(6), int(2))]);
        assert_eq!(values(&priority(&Order::natural(), &e)), ints(&[0, 6, 2]));
        let split = with_ids(&[
            (1, int(0), int(4)),
            (2, int(4), int(1)),
            (3, int(6), int(2)),
            (4, int(6), int(1)),
        ]);
        assert_eq!(values(&priority(&Order::natural(), &split)), ints(&[0, 4, 3, 1]));
    }

    #[test]
    fn priority_without_demanders() {
        let e = econ(&[(1, 1), (2, 2)]);
        assert_eq!(values(&priority(&Order::natural(), &e)), ints(&[1, 2]));
    }

    #[test]
    fn max_satiating_examples() {
        assert_eq!(
            values(&max_satiating(&econ(&[(0, 4), (2, 1), (5, 0)]))),
            ints(&[0, 2, 3])
        );
        assert_eq!(values(&max_satiating(&econ(&[(2, 2), (1, 1)]))), ints(&[2, 1]));
        assert_eq!(
            values(&max_satiating(&econ(&[(0, 3), (9, 1), (4, 1)]))),
            ints(&[0, 1, 4])
        );
    }

    #[test]
    fn max_satiating_splits_ties_equally() {
        // Claims 4 and 4 share the 3 units of supply.
        let e = econ(&[(0, 3), (5, 1), (6, 2)]);
        assert_eq!(values(&max_satiating(&e)), vec![int(0), rat(5, 2), rat(7, 2)]);
    }

    #[test]
    fn sprumont_examples() {
        assert_eq!(
            values(&sprumont_uniform(&econ(&[(4, 2), (0, 2), (2, 1)]))),
            ints(&[3, 0, 2])
        );
        assert_eq!(values(&sprumont_uniform(&econ(&[(4, 7)]))), ints(&[7]));
        let e = Economy::new([
            (AgentId(1), Preference::symmetric(int(4)), int(0)),
            (AgentId(2), Preference::new(int(3), int(2), int(1)).unwrap(), int(4)),
        ])
        .unwrap();
        let a = sprumont_uniform(&e);
        assert_eq!(values(&a), ints(&[2, 2]));
        assert!(e.preference(AgentId(2)).strictly_prefers(int(4), a.get(AgentId(2))));
    }

    #[test]
    fn endowments_rule_echoes() {
        assert_eq!(values(&endowments_rule(&example1())), ints(&[9, 1, 0, 2]));
        assert_eq!(
            values(&endowments_rule(&econ(&[(1, 3), (4, 1), (3, 1), (1, 3)]))),
            ints(&[3, 1, 1, 3])
        );
    }

    #[test]
    fn phi_bar_parity() {
        let four = econ(&[(5, 1), (5, 1), (0, 3), (0, 3)]);
        assert_eq!(values(&phi_bar(&Order::natural(), &four)), ints(&[3, 5, 0, 0]));
        let three = four.restrict(&[AgentId(1), AgentId(2), AgentId(3)].into()).unwrap();
        assert_eq!(values(&phi_bar(&Order::natural(), &three)), ints(&[4, 1, 0]));
        let single = econ(&[(5, 1)]);
        assert_eq!(values(&phi_bar(&Order::natural(), &single)), ints(&[1]));
    }

    fn example_b1(agent1: Preference) -> Economy {
        Economy::new([
            (AgentId(1), agent1, int(9)),
            (AgentId(2), Preference::symmetric(int(7)), int(1)),
            (AgentId(3), Preference::symmetric(int(9)), int(4)),
        ])
        .unwrap()
    }

    #[test]
    fn phi_star_example_b1() {
        let e = example_b1(Preference::symmetric(int(1)));
        assert!(e.preference(AgentId(1)).strictly_prefers(int(0), int(14)));
        assert_eq!(values(&phi_star(&e)), ints(&[1, 4, 9]));

        let flipped = example_b1(Preference::new(int(1), int(14), int(1)).unwrap());
        assert_eq!(values(&phi_star(&flipped)), ints(&[1, 5, 8]));

        let misreport = e
            .with_preference(AgentId(2), Preference::symmetric(rat(11, 2)))
            .unwrap();
        assert_eq!(phi_star(&misreport).get(AgentId(2)), rat(11, 2));
    }

    #[test]
    fn rule_ids_round_trip_through_strings() {
        for rule in RuleId::catalog() {
            assert_eq!(rule.to_string().parse::<RuleId>().unwrap(), rule);
        }
        let custom: RuleId = "priority:3,1,2:dual".parse().unwrap();
        assert_eq!(custom.to_string(), "priority:3,1,2:dual");
        assert!("priority:1,1".parse::<RuleId>().is_err());
        assert!("uniform:dual".parse::<RuleId>().is_err());
        assert!("walrasian".parse::<RuleId>().is_err());
    }

    #[test]
    fn orders_compare_and_dualize() {
        let order: Order = "3,1".parse().unwrap();
        let mut ids = vec![AgentId(1), AgentId(2), AgentId(3), AgentId(4)];
        order.sort(&mut ids);
        assert_eq!(ids, vec![AgentId(3), AgentId(1), AgentId(2), AgentId(4)]);
        order.dual().sort(&mut ids);
        assert_eq!(ids, vec![AgentId(4), AgentId(2), AgentId(1), AgentId(3)]);
    }
}
