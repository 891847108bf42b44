//! Shared battery settings and reporting for the acceptance report.
//!
//! Every comparison is exact (tolerance 0). Batteries are 10 000 seeded
//! economies with at most 6 agents on the denominator-4 grid; proportional
//! draws positive endowments since it is undefined at zero.

use realloc_core::audit::{generator_for, AuditConfig, Tally};
use realloc_core::econgen::GenConfig;
use realloc_core::format::serialize_witness;
use realloc_core::{Order, Result, RuleId};

pub const TRIALS: u64 = 10_000;
pub const SEED: u64 = 1;
pub const MAX_AGENTS: usize = 6;
pub const DENOMINATOR_BOUND: u32 = 4;

/// The battery for `rule`.
pub fn config(rule: &RuleId) -> AuditConfig {
    let base = GenConfig {
        min_agents: 1,
        max_agents: MAX_AGENTS,
        denominator_bound: DENOMINATOR_BOUND,
        seed: SEED,
        ..GenConfig::default()
    };
    AuditConfig {
        generator: generator_for(rule, &base),
        trials: TRIALS,
    }
}

/// Rules checked for the trace round trip and variable-population manipulation.
pub fn iterative_rules() -> Vec<RuleId> {
    vec![
        RuleId::UniformRealloc,
        RuleId::Proportional,
        RuleId::Priority(Order::natural()),
        RuleId::MaxSatiating,
        RuleId::PhiBar(Order::natural()),
        RuleId::PhiStar,
        RuleId::Endowments,
    ]
}

/// Verdict of one criterion plus one line per sub-check.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl Outcome {
    pub fn new(summary: impl Into<String>) -> Self {
        Outcome {
            passed: true,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    pub fn require(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        let mark = if ok { "ok  " } else { "FAIL" };
        self.details.push(format!("{mark} {detail}"));
    }

    /// Records a battery tally. Expecting clean means no violation and
    /// nothing outside the domain; otherwise a replayable witness is required.
    pub fn tally(&mut self, rule: &RuleId, tally: Result<Tally>, expect_clean: bool) {
        match tally {
            Ok(t) => {
                let mut line = format!(
                    "{rule} {}: economies={} violations={} inapplicable={} outside-domain={}",
                    t.kind, t.economies, t.violations, t.inapplicable, t.outside_domain
                );
                if let Some((trial, w)) = &t.first {
                    line.push_str(&format!(
                        "\n       first at trial {trial}:\n{}",
                        indent(&serialize_witness(w))
                    ));
                }
                let ok = if expect_clean {
                    t.is_clean() && t.outside_domain == 0
                } else {
                    !t.is_clean() && t.first.as_ref().is_some_and(|(_, w)| w.replays())
                };
                self.require(ok, line);
            }
            Err(err) => self.require(false, format!("{rule}: {err}")),
        }
    }
}

pub fn indent(text: &str) -> String {
    text.lines()
        .map(|l| format!("       {l}"))
        .collect::<Vec<_>>()
        .join("\n")
}
