//! Acceptance report: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use realloc_core::audit::{audit_axioms, audit_manipulation, audit_round_trip, efficiency_meta_check};
use realloc_core::format::serialize_economy;
use realloc_core::manipulation::{construct_predelivery_witness, find_splitting, Mode, Template};
use realloc_core::reference_cases::{run_example, Example};
use realloc_core::{int, AgentId, Order, RuleId, WitnessKind};
use realloc_criteria::{config, indent, iterative_rules, Outcome};

const EXAMPLES_BUDGET: Duration = Duration::from_secs(1);
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(60);

fn criterion_1() -> Outcome {
    let mut out = Outcome::new("worked examples replay exactly");
    let start = Instant::now();
    for ex in Example::ALL {
        match run_example(ex) {
            Ok(report) => {
                for c in &report.checks {
                    out.require(
                        c.passed(),
                        format!("example {ex} {}: {} (expected {})", c.label, c.actual, c.expected),
                    );
                }
            }
            Err(err) => out.require(false, format!("example {ex}: {err}")),
        }
    }
    let elapsed = start.elapsed();
    out.require(
        elapsed < EXAMPLES_BUDGET,
        format!("runtime {elapsed:.2?} < {EXAMPLES_BUDGET:?}"),
    );
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new("derived traces reproduce each rule and meet the step conditions");
    let start = Instant::now();
    for rule in iterative_rules() {
        match audit_round_trip(&rule, &config(&rule)) {
            Ok(r) => {
                let mut line = format!(
                    "{rule}: economies={} mismatches={} step-failures={} unstationary={} outside-domain={}",
                    r.economies, r.mismatches, r.step_failures, r.unstationary, r.outside_domain
                );
                if let Some((trial, e, detail)) = &r.first_failure {
                    line.push_str(&format!(
                        "\n       first failure trial {trial}: {detail}\n{}",
                        indent(&serialize_economy(e))
                    ));
                }
                out.require(r.is_clean() && r.outside_domain == 0, line);
            }
            Err(err) => out.require(false, format!("{rule}: {err}")),
        }
    }
    let elapsed = start.elapsed();
    out.require(
        elapsed < ROUND_TRIP_BUDGET,
        format!("runtime {elapsed:.2?} < {ROUND_TRIP_BUDGET:?}"),
    );
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new("no strict withdrawal or merging manipulation on the battery");
    for rule in iterative_rules() {
        let c = config(&rule);
        out.tally(
            &rule,
            audit_manipulation(&rule, WitnessKind::Withdrawal, Mode::Strict, &c),
            true,
        );
        out.tally(
            &rule,
            audit_manipulation(&rule, WitnessKind::Merging, Mode::Strict, &c),
            true,
        );
    }
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new("proportional resists splitting; known splitting witnesses reproduce");
    let rule = RuleId::Proportional;
    out.tally(
        &rule,
        audit_manipulation(&rule, WitnessKind::Splitting, Mode::Strict, &config(&rule)),
        true,
    );
    for (ex, rule, host, combined) in [
        (Example::Two, RuleId::UniformRealloc, AgentId(1), "10/3"),
        (Example::Three, RuleId::Priority(Order::natural()), AgentId(4), "5"),
    ] {
        let e = ex.economy();
        let first = find_splitting(&rule, &e, &[int(4)], &[int(1)]);
        let second = find_splitting(&rule, &e, &[int(4)], &[int(1)]);
        let ok = match (&first, &second) {
            (Ok(Some(a)), Ok(Some(b))) => {
                let after = a.after.as_ref().expect("variant allocation");
                let sum: realloc_core::Rational = a.agents.iter().map(|id| after.get(*id)).sum();
                a == b && a.replays() && a.agents[0] == host && sum.to_string() == combined
            }
            _ => false,
        };
        out.require(
            ok,
            format!("example {ex} {rule}: host {host} combined {combined}, deterministic"),
        );
    }
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new("pre-delivery witness constructed for every qualifying rule");
    let qualifying = [
        RuleId::UniformRealloc,
        RuleId::Proportional,
        RuleId::Priority(Order::natural()),
        RuleId::MaxSatiating,
        RuleId::PhiBar(Order::natural()),
        RuleId::PhiStar,
    ];
    for rule in qualifying {
        match construct_predelivery_witness(&rule, &Template::default()) {
            Ok(w) => {
                let i = w.agents[0];
                let after = w.after.as_ref().expect("variant allocation").get(i);
                let strict = w.economy.preference(i).strictly_prefers(after, w.before.get(i));
                out.require(
                    w.replays() && strict,
                    format!("{rule}: agent {i} gets {after} instead of {}", w.before.get(i)),
                );
            }
            Err(err) => out.require(false, format!("{rule}: {err}")),
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new("each independence rule fails exactly its one axiom");
    let four = [
        WitnessKind::OwnPeakOnly,
        WitnessKind::EndowmentsLowerBound,
        WitnessKind::EndowmentsMonotonicity,
        WitnessKind::PopulationMonotonicity,
    ];
    for (rule, failing) in [
        (RuleId::PhiBar(Order::natural()), WitnessKind::PopulationMonotonicity),
        (RuleId::MaxSatiating, WitnessKind::EndowmentsMonotonicity),
        (RuleId::SprumontUniform, WitnessKind::EndowmentsLowerBound),
    ] {
        match audit_axioms(&rule, &four, &config(&rule)) {
            Ok(tallies) => {
                for t in tallies {
                    let expect_clean = t.kind != failing;
                    out.tally(&rule, Ok(t), expect_clean);
                }
            }
            Err(err) => out.require(false, format!("{rule}: {err}")),
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new("own-peak-only + lower bound + endowment monotonicity never without efficiency");
    for rule in RuleId::catalog() {
        match efficiency_meta_check(&rule, &config(&rule)) {
            Ok(m) => {
                let counts: Vec<String> = m
                    .tallies
                    .iter()
                    .map(|t| format!("{}={}", t.kind, t.violations))
                    .collect();
                out.require(
                    m.consistent(),
                    format!(
                        "{rule}: premises={} efficient={} violations [{}]",
                        m.premises_hold,
                        m.efficient,
                        counts.join(" ")
                    ),
                );
            }
            Err(err) => out.require(false, format!("{rule}: {err}")),
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new("uniform net trades are envy-free; priority's are not");
    for (rule, expect_clean) in [
        (RuleId::UniformRealloc, true),
        (RuleId::Priority(Order::natural()), false),
    ] {
        let tally = audit_axioms(&rule, &[WitnessKind::EnvyFreeNetTrades], &config(&rule)).map(|mut t| t.remove(0));
        out.tally(&rule, tally, expect_clean);
    }
    out
}

fn main() -> ExitCode {
    let criteria: [(u8, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {n}: {verdict} {} ({:.1?})", outcome.summary, start.elapsed());
        for d in &outcome.details {
            println!("    {d}");
        }
        if !outcome.passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
