//! Greedy witness shrinking.
//!
//! Candidate moves simplify the witness economy (and the variant economy
//! alongside it). A move is kept only if the scenario gets strictly simpler
//! and the violation is still found on it, so every accepted step replays.

use std::collections::BTreeSet;

use crate::axioms::check_envy_free_net_trades_for;
use crate::error::{Error, Result};
use crate::manipulation::{find_merging_pair, find_predelivery_pair, find_splitting, find_withdrawal_pair, Mode};
use crate::model::{AgentId, Economy, Preference};
use crate::rational::Rational;
use crate::witness::{Witness, WitnessKind};

/// Size used to compare scenarios: agent count first, then asymmetric
/// preferences, then the total size of all numerators and denominators.
fn complexity(w: &Witness) -> (usize, usize, u128) {
    let economies = std::iter::once(&w.economy).chain(w.variant.as_ref());
    let mut agents = 0;
    let mut tilted = 0;
    let mut digits = 0;
    for e in economies {
        agents += e.len();
        for (_, a) in e.agents() {
            let p = a.preference;
            if p.left_weight() != Rational::ONE || p.right_weight() != Rational::ONE {
                tilted += 1;
            }
            digits += p.peak().complexity()
                + a.endowment.complexity()
                + p.left_weight().complexity()
                + p.right_weight().complexity();
        }
    }
    (agents, tilted, digits)
}

#[derive(Clone, Copy, Debug)]
enum Field {
    Peak,
    Endowment,
}

fn field(e: &Economy, id: AgentId, f: Field) -> Rational {
    match f {
        Field::Peak => e.peak(id),
        Field::Endowment => e.endowment(id),
    }
}

fn set_field(e: &Economy, id: AgentId, f: Field, value: Rational) -> Option<Economy> {
    match f {
        Field::Peak => e.with_preference(id, e.preference(id).with_peak(value)).ok(),
        Field::Endowment => e.with_endowment(id, value).ok(),
    }
}

/// Applies `edit` to the economy and, where the variant shares the edited
/// value, to the variant as well.
fn edit_both(w: &Witness, id: AgentId, f: Field, value: Rational) -> Option<(Economy, Option<Economy>)> {
    let old = field(&w.economy, id, f);
    let e = set_field(&w.economy, id, f, value)?;
    let v = match &w.variant {
        Some(v) if v.contains(id) && field(v, id, f) == old => Some(set_field(v, id, f, value)?),
        other => other.clone(),
    };
    Some((e, v))
}

fn candidates(w: &Witness) -> Vec<(Economy, Option<Economy>)> {
    let mut out = Vec::new();
    let involved: BTreeSet<AgentId> = w.agents.iter().copied().collect();
    let ids: Vec<AgentId> = w.economy.ids().collect();

    for &id in &ids {
        if involved.contains(&id) || w.economy.len() == 1 {
            continue;
        }
        let Ok(e) = w.economy.without(id) else { continue };
        let v = match &w.variant {
            Some(v) if v.contains(id) => match v.without(id) {
                Ok(v) => Some(v),
                Err(_) => continue,
            },
            other => other.clone(),
        };
        out.push((e, v));
    }

    if let Some(v) = &w.variant {
        for id in v.ids() {
            for f in [Field::Peak, Field::Endowment] {
                let current = field(v, id, f);
                let mut targets: BTreeSet<Rational> = [current.floor(), current.ceil()].into();
                if w.economy.contains(id) {
                    targets.insert(field(&w.economy, id, f));
                }
                for value in targets {
                    if value != current && !value.is_negative() {
                        if let Some(changed) = set_field(v, id, f, value) {
                            out.push((w.economy.clone(), Some(changed)));
                        }
                    }
                }
            }
        }
    }

    for &id in &ids {
        let pref = *w.economy.preference(id);
        if pref.left_weight() != Rational::ONE || pref.right_weight() != Rational::ONE {
            let plain = Preference::symmetric(pref.peak());
            if let Ok(e) = w.economy.with_preference(id, plain) {
                let v = match &w.variant {
                    Some(v) if v.contains(id) && *v.preference(id) == pref => v.with_preference(id, plain).ok(),
                    other => other.clone(),
                };
                out.push((e, v));
            }
        }
        for f in [Field::Peak, Field::Endowment] {
            let current = field(&w.economy, id, f);
            let mut targets: BTreeSet<Rational> = [Rational::ZERO, current.floor(), current.ceil()].into();
            targets.extend(ids.iter().filter(|o| **o != id).map(|o| field(&w.economy, *o, f)));
            for value in targets {
                if value != current && !value.is_negative() {
                    if let Some(pair) = edit_both(w, id, f, value) {
                        out.push(pair);
                    }
                }
            }
        }
    }
    out
}

/// The violation, re-found on a simplified scenario.
fn recheck(w: &Witness, e: Economy, v: Option<Economy>) -> Option<Witness> {
    let rule = &w.rule;
    let pair = || -> Option<(AgentId, AgentId)> { Some((*w.agents.first()?, *w.agents.get(1)?)) };
    match w.kind {
        WitnessKind::Withdrawal | WitnessKind::WeakWithdrawal => {
            let (i, j) = pair()?;
            let mode = if w.kind == WitnessKind::Withdrawal {
                Mode::Strict
            } else {
                Mode::Weak
            };
            find_withdrawal_pair(rule, &e, i, j, mode).ok()?
        }
        WitnessKind::Merging => {
            let (i, j) = pair()?;
            find_merging_pair(rule, &e, i, j).ok()?
        }
        WitnessKind::Predelivery => {
            let (i, j) = pair()?;
            find_predelivery_pair(rule, &e, i, j).ok()?
        }
        WitnessKind::Splitting => {
            let (host, guest) = pair()?;
            let v = v?;
            let found = find_splitting(rule, &e, &[v.peak(guest)], &[v.endowment(host)]).ok()??;
            (found.agents == w.agents).then_some(found)
        }
        WitnessKind::EnvyFreeNetTrades => {
            let found = check_envy_free_net_trades_for(rule, &e).ok()?.into_witness()?;
            Some(found)
        }
        _ => {
            let before = rule.apply(&e).ok()?;
            let after = match &v {
                Some(v) => Some(rule.apply(v).ok()?),
                None => None,
            };
            let candidate = Witness {
                kind: w.kind,
                rule: rule.clone(),
                economy: e,
                variant: v,
                agents: w.agents.clone(),
                before,
                after,
                transfer: None,
                comparison: String::new(),
            };
            let comparison = candidate.replay().ok()?;
            Some(Witness {
                comparison,
                ..candidate
            })
        }
    }
}

/// Greedily simplifies a witness while it keeps replaying. The result is
/// locally minimal: no single candidate move both simplifies it and keeps
/// the violation.
pub fn shrink_witness(w: &Witness) -> Result<Witness> {
    w.replay()
        .map_err(|err| Error::StaleWitness(format!("cannot shrink a witness that does not replay: {err}")))?;
    let mut current = w.clone();
    loop {
        let size = complexity(&current);
        let next = candidates(&current)
            .into_iter()
            .filter_map(|(e, v)| recheck(&current, e, v))
            .find(|c| complexity(c) < size);
        match next {
            Some(c) => current = c,
            None => return Ok(current),
        }
    }
}
