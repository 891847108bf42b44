//! Variable-population manipulations: withdrawing, merging, splitting and
//! pre-delivering endowments.
//!
//! Withdrawal and merging are decided exactly: the better-than sets of a
//! weighted-V preference are intervals, so the question "can the joint
//! amount be split so both agents gain" is an interval intersection.
//! Splitting is searched over a finite battery of guests and split points
//! and can only falsify.

use std::collections::BTreeSet;

use crate::axioms::Draft;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::model::{AgentId, Allocation, Economy, Preference};
use crate::rational::Rational;
use crate::rules::RuleId;
use crate::witness::{Witness, WitnessKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Both agents strictly better off.
    Strict,
    /// Both weakly, at least one strictly.
    Weak,
}

fn pairs(e: &Economy) -> Vec<(AgentId, AgentId)> {
    let ids: Vec<AgentId> = e.ids().collect();
    ids.iter()
        .flat_map(|i| ids.iter().filter(move |j| *j != i).map(move |j| (*i, *j)))
        .collect()
}

/// Some `(x_i, T - x_i)`, both nonnegative, inside the given improvement
/// sets of `i` and `j`.
fn split_total(total: Rational, set_i: Interval, set_j: Interval) -> Option<(Rational, Rational)> {
    let x_i = set_i
        .intersect(&set_j.reflect(total))
        .intersect(&Interval::closed(Rational::ZERO, total))
        .representative()?;
    Some((x_i, total - x_i))
}

/// Improvement-set combinations to try for a joint amount.
fn combinations(e: &Economy, x: &Allocation, i: AgentId, j: AgentId, mode: Mode) -> Vec<(Interval, Interval)> {
    let (pi, pj) = (e.preference(i), e.preference(j));
    let (xi, xj) = (x.get(i), x.get(j));
    let (si, sj) = (pi.strict_improvement_interval(xi), pj.strict_improvement_interval(xj));
    match mode {
        Mode::Strict => vec![(si, sj)],
        Mode::Weak => vec![
            (si, pj.weak_improvement_interval(xj)),
            (pi.weak_improvement_interval(xi), sj),
        ],
    }
}

/// Whether agents `i` and `j` gain when `j` withdraws and `i` hands back
/// part of what it receives, plus `j`'s endowment.
pub fn find_withdrawal_pair(rule: &RuleId, e: &Economy, i: AgentId, j: AgentId, mode: Mode) -> Result<Option<Witness>> {
    if i == j {
        return Err(Error::InvalidSubset("withdrawal needs two distinct agents".into()));
    }
    e.agent(i)?;
    e.agent(j)?;
    let x = rule.apply(e)?;
    let reduced = e.without(j)?;
    let y = rule.apply(&reduced)?;
    let total = y.get(i) + e.endowment(j);
    for (set_i, set_j) in combinations(e, &x, i, j, mode) {
        if let Some(transfer) = split_total(total, set_i, set_j) {
            let kind = match mode {
                Mode::Strict => WitnessKind::Withdrawal,
                Mode::Weak => WitnessKind::WeakWithdrawal,
            };
            return Ok(Some(
                Draft {
                    kind,
                    rule,
                    economy: e,
                    variant: Some(reduced),
                    agents: vec![i, j],
                    before: x,
                    after: Some(y),
                    transfer: Some(transfer),
                }
                .seal(),
            ));
        }
    }
    Ok(None)
}

/// First withdrawal manipulation in lexicographic `(i, j)` order.
pub fn find_withdrawal(rule: &RuleId, e: &Economy, mode: Mode) -> Result<Option<Witness>> {
    for (i, j) in pairs(e) {
        if let Some(w) = find_withdrawal_pair(rule, e, i, j, mode)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Whether `j` handing its endowment to `i` and leaving lets the two split
/// `i`'s new allocation so both weakly gain and one strictly.
pub fn find_merging_pair(rule: &RuleId, e: &Economy, i: AgentId, j: AgentId) -> Result<Option<Witness>> {
    if i == j {
        return Err(Error::InvalidSubset("merging needs two distinct agents".into()));
    }
    let x = rule.apply(e)?;
    let merged = e.without(j)?.with_endowment(i, e.endowment(i) + e.endowment(j))?;
    let y = rule.apply(&merged)?;
    let total = y.get(i);
    let (pi, pj) = (e.preference(i), e.preference(j));
    let (xi, xj) = (x.get(i), x.get(j));
    let strict_i = pi.strict_improvement_interval(xi);
    let strict_j = pj.strict_improvement_interval(xj);
    let cases = [
        (strict_i, pj.weak_improvement_interval(xj)),
        (pi.weak_improvement_interval(xi), strict_j),
        (strict_i, strict_j),
    ];
    for (set_i, set_j) in cases {
        if let Some(transfer) = split_total(total, set_i, set_j) {
            return Ok(Some(
                Draft {
                    kind: WitnessKind::Merging,
                    rule,
                    economy: e,
                    variant: Some(merged),
                    agents: vec![i, j],
                    before: x,
                    after: Some(y),
                    transfer: Some(transfer),
                }
                .seal(),
            ));
        }
    }
    Ok(None)
}

pub fn find_merging(rule: &RuleId, e: &Economy) -> Result<Option<Witness>> {
    for (i, j) in pairs(e) {
        if let Some(w) = find_merging_pair(rule, e, i, j)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Rules whose outcome does not depend on agent labels.
fn is_anonymous(rule: &RuleId) -> bool {
    matches!(
        rule,
        RuleId::UniformRealloc
            | RuleId::Proportional
            | RuleId::MaxSatiating
            | RuleId::SprumontUniform
            | RuleId::Endowments
    )
}

/// Candidate ids for a guest: the smallest unused id and one past the
/// largest. Under an anonymous rule the label cannot matter, so only the
/// first is tried.
fn guest_ids(rule: &RuleId, e: &Economy) -> Vec<AgentId> {
    let mut ids = vec![e.fresh_id()];
    let after = AgentId(e.ids().last().map_or(1, |id| id.0 + 1));
    if !is_anonymous(rule) && !ids.contains(&after) {
        ids.push(after);
    }
    ids
}

/// Default guest peaks: zero, every peak, every endowment and the total.
pub fn default_guest_peaks(e: &Economy) -> Vec<Rational> {
    let mut peaks: BTreeSet<Rational> = [Rational::ZERO, e.total_endowment()].into();
    for (_, a) in e.agents() {
        peaks.insert(a.preference.peak());
        peaks.insert(a.endowment);
    }
    peaks.into_iter().collect()
}

/// Default host endowments after a split: a halving grid from both ends
/// plus the points where some term of the rule can change regime.
pub fn default_split_points(e: &Economy, host: AgentId, guest_peaks: &[Rational]) -> Vec<Rational> {
    let w = e.endowment(host);
    let mut points = BTreeSet::new();
    let mut piece = w;
    for _ in 1..=6 {
        piece = piece / Rational::from(2);
        points.insert(piece);
        points.insert(w - piece);
    }
    points.insert(e.peak(host));
    for g in guest_peaks {
        points.insert(w - *g);
    }
    for (id, a) in e.agents() {
        if id != host {
            points.insert(a.preference.peak());
            points.insert(a.endowment);
        }
    }
    points.into_iter().filter(|x| !x.is_negative() && *x <= w).collect()
}

fn try_split(
    rule: &RuleId,
    e: &Economy,
    x: &Allocation,
    host: AgentId,
    guest: AgentId,
    guest_peak: Rational,
    host_share: Rational,
) -> Result<Option<Witness>> {
    let w = e.endowment(host);
    if host_share.is_negative() || host_share > w {
        return Ok(None);
    }
    let split =
        e.with_endowment(host, host_share)?
            .with_agent(guest, Preference::symmetric(guest_peak), w - host_share)?;
    let y = match rule.apply(&split) {
        Ok(y) => y,
        Err(Error::ZeroEndowment { .. }) => return Ok(None),
        Err(err) => return Err(err),
    };
    let combined = y.get(host) + y.get(guest);
    if !e.preference(host).strictly_prefers(combined, x.get(host)) {
        return Ok(None);
    }
    Ok(Some(
        Draft {
            kind: WitnessKind::Splitting,
            rule,
            economy: e,
            variant: Some(split),
            agents: vec![host, guest],
            before: x.clone(),
            after: Some(y),
            transfer: None,
        }
        .seal(),
    ))
}

/// Searches hosts in id order, then guest ids, guest peaks and host shares
/// in the order given. Host shares outside `[0, endowment]` are skipped, as
/// are splits on which the rule is undefined.
pub fn find_splitting(
    rule: &RuleId,
    e: &Economy,
    guest_peaks: &[Rational],
    split_points: &[Rational],
) -> Result<Option<Witness>> {
    if guest_peaks.is_empty() || split_points.is_empty() {
        return Err(Error::InvalidBattery("empty guest-peak or split list".into()));
    }
    if let Some(p) = guest_peaks.iter().find(|p| p.is_negative()) {
        return Err(Error::InvalidBattery(format!("negative guest peak {p}")));
    }
    let x = rule.apply(e)?;
    for host in e.ids() {
        for guest in guest_ids(rule, e) {
            for &peak in guest_peaks {
                for &share in split_points {
                    if let Some(w) = try_split(rule, e, &x, host, guest, peak, share)? {
                        return Ok(Some(w));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// [`find_splitting`] over the default battery, with split points derived
/// per host.
pub fn find_splitting_default(rule: &RuleId, e: &Economy) -> Result<Option<Witness>> {
    let x = rule.apply(e)?;
    let peaks = default_guest_peaks(e);
    for host in e.ids() {
        let splits = default_split_points(e, host, &peaks);
        for guest in guest_ids(rule, e) {
            for &peak in &peaks {
                for &share in &splits {
                    if let Some(w) = try_split(rule, e, &x, host, guest, peak, share)? {
                        return Ok(Some(w));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Whether `j` taking its allocation early and handing the rest of its
/// endowment to `i` strictly helps `i`.
pub fn find_predelivery_pair(rule: &RuleId, e: &Economy, i: AgentId, j: AgentId) -> Result<Option<Witness>> {
    if i == j {
        return Err(Error::InvalidSubset("pre-delivery needs two distinct agents".into()));
    }
    let x = rule.apply(e)?;
    let delivered = e.endowment(i) + e.endowment(j) - x.get(j);
    if delivered.is_negative() {
        return Ok(None);
    }
    let reduced = e.without(j)?.with_endowment(i, delivered)?;
    let y = match rule.apply(&reduced) {
        Ok(y) => y,
        Err(Error::ZeroEndowment { .. }) => return Ok(None),
        Err(err) => return Err(err),
    };
    if !e.preference(i).strictly_prefers(y.get(i), x.get(i)) {
        return Ok(None);
    }
    Ok(Some(
        Draft {
            kind: WitnessKind::Predelivery,
            rule,
            economy: e,
            variant: Some(reduced),
            agents: vec![i, j],
            before: x,
            after: Some(y),
            transfer: None,
        }
        .seal(),
    ))
}

pub fn find_predelivery(rule: &RuleId, e: &Economy) -> Result<Option<Witness>> {
    for (i, j) in pairs(e) {
        if let Some(w) = find_predelivery_pair(rule, e, i, j)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Three-agent economy with peaks `(low, high, high)` and endowments
/// `(mid, low, low)`, where `0 < low < mid < high`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Template {
    pub low: Rational,
    pub high: Rational,
    pub mid: Rational,
}

impl Default for Template {
    fn default() -> Self {
        Template {
            low: Rational::from(1),
            high: Rational::from(5),
            mid: Rational::from(3),
        }
    }
}

impl Template {
    pub fn economy(&self) -> Result<Economy> {
        let Template { low, high, mid } = *self;
        if !(low.is_positive() && low < mid && mid < high) {
            return Err(Error::InvalidTemplate(format!("need 0 < {low} < {mid} < {high}")));
        }
        Economy::from_peaks_and_endowments([(low, mid), (high, low), (high, low)])
    }
}

/// Builds a strict pre-delivery manipulation for an efficient, own-peak-only
/// rule meeting the endowments lower bound: the supplier pre-delivers to
/// whichever demander ends below the supplier's endowment.
pub fn construct_predelivery_witness(rule: &RuleId, template: &Template) -> Result<Witness> {
    if !rule.is_efficient_opo_elb() {
        return Err(Error::UnsupportedRule {
            rule: rule.to_string(),
            reason: "the construction needs an efficient, own-peak-only rule meeting the endowments lower bound".into(),
        });
    }
    let e = template.economy()?;
    let x = rule.apply(&e)?;
    let supplier = AgentId(1);
    let target = [AgentId(2), AgentId(3)]
        .into_iter()
        .find(|id| x.get(*id) < template.mid)
        .ok_or_else(|| Error::InvalidTemplate("no demander ends below the supplier's endowment".into()))?;
    find_predelivery_pair(rule, &e, target, supplier)?
        .ok_or_else(|| Error::InvalidTemplate(format!("pre-delivery to agent {target} does not improve it")))
}
