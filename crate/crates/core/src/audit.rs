//! Seeded batteries and the parallel audit harness.
//!
//! Every trial draws one economy from the generator and a perturbation
//! battery from a second stream keyed by the same trial number, so results
//! depend only on the seed. Trials run on the rayon pool and are merged in
//! trial order; the first witness reported is the one with the lowest trial.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::axioms::{self, proper_subsets, Deviation, Verdict};
use crate::econgen::{generate_trial, GenConfig};
use crate::error::{Error, Result};
use crate::iterative::{check_step_conditions, derive_trace, StepCondition};
use crate::manipulation::{self, Mode};
use crate::model::{AgentId, Economy};
use crate::rational::Rational;
use crate::rules::RuleId;
use crate::witness::{Witness, WitnessKind};

/// Weight pairs swapped in for peak-preserving perturbations.
pub const WEIGHT_FLIPS: [(i64, i64); 5] = [(1, 1), (2, 1), (1, 2), (14, 1), (1, 14)];
/// Per-agent endowment increments for monotonicity checks.
pub const ENDOWMENT_STEPS: [(i128, i128); 4] = [(1, 2), (1, 1), (3, 1), (8, 1)];
/// Cap on misreported peaks tried per agent.
pub const MISREPORTS_PER_AGENT: usize = 64;
/// Seeded increases touching several agents at once.
pub const JOINT_INCREASES: usize = 4;

/// The properties the axiom harness can decide.
pub const AXIOMS: [WitnessKind; 10] = [
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
];

fn flips() -> impl Iterator<Item = (Rational, Rational)> {
    WEIGHT_FLIPS
        .iter()
        .map(|(l, r)| (Rational::from(*l), Rational::from(*r)))
}

/// Every agent switched to every other weight pair, peak kept.
pub fn weight_flips(e: &Economy) -> Vec<Deviation> {
    let mut out = Vec::new();
    for (id, a) in e.agents() {
        let pref = a.preference;
        for (l, r) in flips() {
            if (l, r) != (pref.left_weight(), pref.right_weight()) {
                let flipped = pref.with_weights(l, r).expect("positive weights");
                out.push(Deviation::new(id, flipped));
            }
        }
    }
    out
}

/// Single-agent flips followed by the same flip applied to everyone.
pub fn peak_only_profiles(e: &Economy) -> Vec<Vec<Deviation>> {
    let mut out: Vec<Vec<Deviation>> = weight_flips(e).into_iter().map(|d| vec![d]).collect();
    for (l, r) in flips() {
        let profile = e
            .agents()
            .map(|(id, a)| Deviation::new(id, a.preference.with_weights(l, r).expect("positive weights")))
            .collect();
        out.push(profile);
    }
    out
}

/// Peaks an agent might pretend to have: zero, the total, every peak and
/// endowment, the integers up to the total, and midpoints between
/// neighbouring candidates. Thinned evenly to at most
/// [`MISREPORTS_PER_AGENT`], own peak excluded.
pub fn misreport_peaks(e: &Economy, id: AgentId) -> Vec<Rational> {
    let total = e.total_endowment();
    let mut grid: BTreeSet<Rational> = [Rational::ZERO, total].into();
    for (_, a) in e.agents() {
        grid.insert(a.preference.peak());
        grid.insert(a.endowment);
    }
    let mut k = Rational::ZERO;
    while k <= total {
        grid.insert(k);
        k += Rational::ONE;
    }
    let base: Vec<Rational> = grid.iter().copied().collect();
    for pair in base.windows(2) {
        grid.insert(Rational::midpoint(pair[0], pair[1]));
    }
    let own = e.peak(id);
    let all: Vec<Rational> = grid.into_iter().filter(|p| *p != own).collect();
    if all.len() <= MISREPORTS_PER_AGENT {
        return all;
    }
    (0..MISREPORTS_PER_AGENT)
        .map(|k| all[k * (all.len() - 1) / (MISREPORTS_PER_AGENT - 1)])
        .collect()
}

/// Peak misreports with the agent's own weights, then weight flips.
pub fn misreports(e: &Economy) -> Vec<Deviation> {
    let mut out = Vec::new();
    for id in e.ids() {
        let pref = *e.preference(id);
        out.extend(
            misreport_peaks(e, id)
                .into_iter()
                .map(|p| Deviation::new(id, pref.with_peak(p))),
        );
    }
    out.extend(weight_flips(e));
    out
}

/// Each agent raised by each step alone, then seeded joint increases.
pub fn endowment_increases(e: &Economy, rng: &mut impl Rng) -> Vec<BTreeMap<AgentId, Rational>> {
    let steps: Vec<Rational> = ENDOWMENT_STEPS.iter().map(|(n, d)| Rational::new(*n, *d)).collect();
    let mut out = Vec::new();
    for id in e.ids() {
        for step in &steps {
            out.push([(id, e.endowment(id) + *step)].into());
        }
    }
    let ids: Vec<AgentId> = e.ids().collect();
    for _ in 0..JOINT_INCREASES {
        let count = rng.gen_range(1..=ids.len());
        let chosen: Vec<AgentId> = ids.choose_multiple(rng, count).copied().collect();
        out.push(
            chosen
                .into_iter()
                .map(|id| (id, e.endowment(id) + *steps.choose(rng).expect("steps")))
                .collect(),
        );
    }
    out
}

fn battery_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ba77_e12f_0000);
    rng.set_stream(trial);
    rng
}

/// Decides one property on one economy against the seeded battery for
/// `trial`. Perturbation-based checks stop at the first violation.
pub fn check_axiom(rule: &RuleId, axiom: WitnessKind, e: &Economy, seed: u64, trial: u64) -> Result<Verdict> {
    match axiom {
        WitnessKind::Efficiency => axioms::check_efficiency(rule, e),
        WitnessKind::EndowmentsLowerBound => axioms::check_elb(rule, e),
        WitnessKind::OwnPeakOnly => axioms::check_own_peak_only(rule, e, &weight_flips(e)),
        WitnessKind::PeakOnly => axioms::check_peak_only(rule, e, &peak_only_profiles(e)),
        WitnessKind::StrategyProofness => axioms::check_strategy_proofness(rule, e, &misreports(e)),
        WitnessKind::NonBossiness => axioms::check_non_bossiness(rule, e, &misreports(e)),
        WitnessKind::EndowmentsMonotonicity => {
            let mut rng = battery_rng(seed, trial);
            let mut checked = 0;
            let mut inapplicable = None;
            for increase in endowment_increases(e, &mut rng) {
                match axioms::check_os_endow_mono(rule, e, &increase)? {
                    Verdict::Pass { checked: c } => checked += c,
                    Verdict::Inapplicable { reason } => inapplicable = Some(reason),
                    v @ Verdict::Violation(_) => return Ok(v),
                }
            }
            Ok(match (checked, inapplicable) {
                (0, Some(reason)) => Verdict::Inapplicable { reason },
                _ => Verdict::Pass { checked },
            })
        }
        WitnessKind::PopulationMonotonicity => axioms::check_os_pop_mono(rule, e, &proper_subsets(e)),
        WitnessKind::Satiation => axioms::check_lemma2_satiation(rule, e),
        WitnessKind::EnvyFreeNetTrades => axioms::check_envy_free_net_trades_for(rule, e),
        other => Err(Error::UnknownAxiom(format!(
            "{other} is a manipulation property, not an axiom"
        ))),
    }
}

/// What the battery is drawn from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditConfig {
    pub generator: GenConfig,
    pub trials: u64,
}

/// Per-property tally over a battery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tally {
    pub kind: WitnessKind,
    pub economies: u64,
    pub passed: u64,
    pub violations: u64,
    pub inapplicable: u64,
    /// Economies the rule is undefined on.
    pub outside_domain: u64,
    /// Perturbations or pairs examined across passing economies.
    pub cases: u64,
    /// Lowest-trial witness.
    pub first: Option<(u64, Witness)>,
}

impl Tally {
    fn new(kind: WitnessKind) -> Self {
        Tally {
            kind,
            economies: 0,
            passed: 0,
            violations: 0,
            inapplicable: 0,
            outside_domain: 0,
            cases: 0,
            first: None,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    fn absorb(&mut self, trial: u64, outcome: Outcome) {
        self.economies += 1;
        match outcome {
            Outcome::Pass(cases) => {
                self.passed += 1;
                self.cases += cases as u64;
            }
            Outcome::Violation(w) => {
                self.violations += 1;
                if self.first.is_none() {
                    self.first = Some((trial, *w));
                }
            }
            Outcome::Inapplicable => self.inapplicable += 1,
            Outcome::OutsideDomain => self.outside_domain += 1,
        }
    }
}

enum Outcome {
    Pass(usize),
    Violation(Box<Witness>),
    Inapplicable,
    OutsideDomain,
}

fn outcome(result: Result<Verdict>) -> Result<Outcome> {
    match result {
        Ok(Verdict::Pass { checked }) => Ok(Outcome::Pass(checked)),
        Ok(Verdict::Violation(w)) => Ok(Outcome::Violation(w)),
        Ok(Verdict::Inapplicable { .. }) => Ok(Outcome::Inapplicable),
        Err(Error::ZeroEndowment { .. }) => Ok(Outcome::OutsideDomain),
        Err(err) => Err(err),
    }
}

fn found(result: Result<Option<Witness>>) -> Result<Outcome> {
    match result {
        Ok(Some(w)) => Ok(Outcome::Violation(Box::new(w))),
        Ok(None) => Ok(Outcome::Pass(1)),
        Err(Error::ZeroEndowment { .. }) => Ok(Outcome::OutsideDomain),
        Err(err) => Err(err),
    }
}

/// Runs `per_trial` over the battery in parallel and merges in trial order.
fn harness<F>(config: &AuditConfig, kinds: &[WitnessKind], per_trial: F) -> Result<Vec<Tally>>
where
    F: Fn(&Economy, u64) -> Result<Vec<Outcome>> + Sync,
{
    config.generator.validate()?;
    let results: Vec<Result<Vec<Outcome>>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let e = generate_trial(&config.generator, trial)?;
            per_trial(&e, trial)
        })
        .collect();
    let mut tallies: Vec<Tally> = kinds.iter().map(|k| Tally::new(*k)).collect();
    for (trial, result) in results.into_iter().enumerate() {
        for (tally, o) in tallies.iter_mut().zip(result?) {
            tally.absorb(trial as u64, o);
        }
    }
    Ok(tallies)
}

/// Audits `rule` for each of `axioms` over the battery.
pub fn audit_axioms(rule: &RuleId, axioms: &[WitnessKind], config: &AuditConfig) -> Result<Vec<Tally>> {
    if let Some(bad) = axioms.iter().find(|k| !AXIOMS.contains(k)) {
        return Err(Error::UnknownAxiom(format!("{bad} is not an axiom")));
    }
    let seed = config.generator.seed;
    harness(config, axioms, |e, trial| {
        axioms
            .iter()
            .map(|k| outcome(check_axiom(rule, *k, e, seed, trial)))
            .collect()
    })
}

/// A manipulation search over the battery. Splitting uses the default
/// guest and split battery; withdrawal uses `mode`.
pub fn audit_manipulation(rule: &RuleId, kind: WitnessKind, mode: Mode, config: &AuditConfig) -> Result<Tally> {
    let search = |e: &Economy| -> Result<Option<Witness>> {
        match kind {
            WitnessKind::Withdrawal | WitnessKind::WeakWithdrawal => manipulation::find_withdrawal(rule, e, mode),
            WitnessKind::Merging => manipulation::find_merging(rule, e),
            WitnessKind::Splitting => manipulation::find_splitting_default(rule, e),
            WitnessKind::Predelivery => manipulation::find_predelivery(rule, e),
            other => Err(Error::UnknownAxiom(format!("{other} is not a manipulation property"))),
        }
    };
    let tallies = harness(config, &[kind], |e, _| Ok(vec![found(search(e))?]))?;
    Ok(tallies.into_iter().next().expect("one tally"))
}

/// Trace round trip over the battery.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundTrip {
    pub economies: u64,
    pub outside_domain: u64,
    /// Final net trades differ from the rule's outcome.
    pub mismatches: u64,
    /// Some step condition fails.
    pub step_failures: u64,
    /// Continuing past the last step moved someone.
    pub unstationary: u64,
    /// Lowest trial with any failure.
    pub first_failure: Option<(u64, Economy, String)>,
}

impl RoundTrip {
    pub fn is_clean(&self) -> bool {
        self.mismatches == 0 && self.step_failures == 0 && self.unstationary == 0
    }
}

struct TrialTrace {
    mismatch: bool,
    steps_bad: bool,
    unstationary: bool,
    detail: String,
}

/// Derives a trace for every economy in the battery and checks that it
/// reproduces the rule and meets the step conditions.
pub fn audit_round_trip(rule: &RuleId, config: &AuditConfig) -> Result<RoundTrip> {
    config.generator.validate()?;
    let results: Vec<Result<Option<TrialTrace>>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let e = generate_trial(&config.generator, trial)?;
            let x = match rule.apply(&e) {
                Ok(x) => x,
                Err(Error::ZeroEndowment { .. }) => return Ok(None),
                Err(err) => return Err(err),
            };
            let trace = derive_trace(rule, &e)?;
            let mismatch = *trace.final_net_trades() != x.net_trades(&e);
            let report = check_step_conditions(&trace);
            let unstationary = report.has(StepCondition::Stationarity);
            let steps_bad = report
                .violations
                .iter()
                .any(|v| v.condition != StepCondition::Stationarity);
            let detail = report
                .violations
                .first()
                .map(|v| v.to_string())
                .unwrap_or_else(|| format!("final net trades differ from {x}"));
            Ok(Some(TrialTrace {
                mismatch,
                steps_bad,
                unstationary,
                detail,
            }))
        })
        .collect();
    let mut out = RoundTrip::default();
    for (trial, result) in results.into_iter().enumerate() {
        out.economies += 1;
        let Some(TrialTrace {
            mismatch,
            steps_bad,
            unstationary,
            detail,
        }) = result?
        else {
            out.outside_domain += 1;
            continue;
        };
        out.mismatches += u64::from(mismatch);
        out.step_failures += u64::from(steps_bad);
        out.unstationary += u64::from(unstationary);
        if (mismatch || steps_bad || unstationary) && out.first_failure.is_none() {
            let e = generate_trial(&config.generator, trial as u64)?;
            out.first_failure = Some((trial as u64, e, detail));
        }
    }
    Ok(out)
}

/// Outcome of the efficiency meta-check for one rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfficiencyMetaCheck {
    pub rule: RuleId,
    /// Own-peak-only, the endowments lower bound and endowment monotonicity
    /// all passed on the whole battery.
    pub premises_hold: bool,
    pub efficient: bool,
    pub tallies: Vec<Tally>,
}

impl EfficiencyMetaCheck {
    /// The premises never hold without efficiency.
    pub fn consistent(&self) -> bool {
        !self.premises_hold || self.efficient
    }
}

/// Checks that a rule passing own-peak-only, the endowments lower bound and
/// endowment monotonicity on the battery is also efficient on it.
pub fn efficiency_meta_check(rule: &RuleId, config: &AuditConfig) -> Result<EfficiencyMetaCheck> {
    let kinds = [
        WitnessKind::OwnPeakOnly,
        WitnessKind::EndowmentsLowerBound,
        WitnessKind::EndowmentsMonotonicity,
        WitnessKind::Efficiency,
    ];
    let tallies = audit_axioms(rule, &kinds, config)?;
    Ok(EfficiencyMetaCheck {
        rule: rule.clone(),
        premises_hold: tallies[..3].iter().all(Tally::is_clean),
        efficient: tallies[3].is_clean(),
        tallies,
    })
}

/// A generator config for `rule`: proportional needs positive endowments.
pub fn generator_for(rule: &RuleId, base: &GenConfig) -> GenConfig {
    GenConfig {
        positive_endowments: base.positive_endowments || matches!(rule, RuleId::Proportional),
        ..base.clone()
    }
}
