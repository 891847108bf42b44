//! Seeded random economies on a bounded rational grid.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AgentId, Economy, Preference};
use crate::rational::Rational;

/// Largest id an agent can be given.
pub const MAX_ID: u32 = 12;
/// Values are `k / d` with `0 <= k <= GRID_SPAN * d`.
pub const GRID_SPAN: i128 = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub min_agents: usize,
    pub max_agents: usize,
    /// Largest denominator on the value grid.
    pub denominator_bound: u32,
    /// `(left, right)` slope pairs to draw preferences from.
    pub weights: Vec<(Rational, Rational)>,
    /// Draw endowments from the grid without zero.
    pub positive_endowments: bool,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            min_agents: 1,
            max_agents: 6,
            denominator_bound: 4,
            weights: default_weights(),
            positive_endowments: false,
            seed: 0,
        }
    }
}

pub fn default_weights() -> Vec<(Rational, Rational)> {
    [(1, 1), (2, 1), (1, 2), (14, 1)]
        .into_iter()
        .map(|(l, r)| (Rational::from(l), Rational::from(r)))
        .collect()
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_agents < 1 || self.max_agents > 8 || self.min_agents > self.max_agents {
            return Err(Error::Config(format!(
                "agent range {}..={} must lie within 1..=8",
                self.min_agents, self.max_agents
            )));
        }
        if self.denominator_bound < 1 {
            return Err(Error::Config("denominator bound must be at least 1".into()));
        }
        if self.weights.is_empty() {
            return Err(Error::Config("weight set is empty".into()));
        }
        if let Some((l, r)) = self.weights.iter().find(|(l, r)| !l.is_positive() || !r.is_positive()) {
            return Err(Error::Config(format!("weights ({l}, {r}) are not positive")));
        }
        Ok(())
    }
}

fn grid_value(rng: &mut ChaCha8Rng, bound: u32, positive: bool) -> Rational {
    let d = rng.gen_range(1..=bound as i128);
    let k = rng.gen_range(i128::from(positive)..=GRID_SPAN * d);
    Rational::new(k, d)
}

/// Economy number `trial` of the stream selected by `config.seed`.
pub fn generate_trial(config: &GenConfig, trial: u64) -> Result<Economy> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let n = rng.gen_range(config.min_agents..=config.max_agents);
    let mut ids: Vec<u32> = index::sample(&mut rng, MAX_ID as usize, n)
        .into_iter()
        .map(|k| k as u32 + 1)
        .collect();
    ids.sort_unstable();
    let agents: Vec<_> = ids
        .into_iter()
        .map(|id| {
            let peak = grid_value(&mut rng, config.denominator_bound, false);
            let endowment = grid_value(&mut rng, config.denominator_bound, config.positive_endowments);
            let (left, right) = config.weights[rng.gen_range(0..config.weights.len())];
            let preference = Preference::new(peak, left, right).expect("validated weights");
            (AgentId(id), preference, endowment)
        })
        .collect();
    Economy::new(agents)
}

/// The first economy of the stream selected by `config.seed`.
pub fn generate_economy(config: &GenConfig) -> Result<Economy> {
    generate_trial(config, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Side;
    use crate::rules::RuleId;

    #[test]
    fn deterministic() {
        let config = GenConfig {
            seed: 42,
            ..GenConfig::default()
        };
        for trial in 0..20 {
            assert_eq!(
                generate_trial(&config, trial).unwrap(),
                generate_trial(&config, trial).unwrap()
            );
        }
        assert_ne!(generate_trial(&config, 0).unwrap(), generate_trial(&config, 1).unwrap());
    }

    #[test]
    fn single_agent_economies_return_endowments() {
        let config = GenConfig {
            min_agents: 1,
            max_agents: 1,
            ..GenConfig::default()
        };
        for trial in 0..20 {
            let e = generate_trial(&config, trial).unwrap();
            assert_eq!(e.len(), 1);
            for rule in RuleId::catalog() {
                if let Ok(x) = rule.apply(&e) {
                    assert_eq!(x.amounts(), &e.endowments(), "{rule}");
                }
            }
        }
    }

    #[test]
    fn values_stay_on_the_grid() {
        let config = GenConfig {
            seed: 7,
            positive_endowments: true,
            ..GenConfig::default()
        };
        for trial in 0..200 {
            let e = generate_trial(&config, trial).unwrap();
            assert!((1..=6).contains(&e.len()));
            for (id, a) in e.agents() {
                assert!((1..=MAX_ID).contains(&id.0));
                for v in [a.preference.peak(), a.endowment] {
                    assert!(v.denom() <= 4 && v <= Rational::from(16));
                }
                assert!(a.endowment.is_positive());
            }
        }
    }

    #[test]
    fn sides_are_roughly_balanced() {
        let config = GenConfig {
            seed: 1,
            ..GenConfig::default()
        };
        let demand = (0..10_000)
            .filter(|t| generate_trial(&config, *t).unwrap().side() == Side::ExcessDemand)
            .count();
        assert!((4_500..=5_500).contains(&demand), "{demand}");
    }

    #[test]
    fn rejects_bad_ranges() {
        for config in [
            GenConfig {
                min_agents: 0,
                ..GenConfig::default()
            },
            GenConfig {
                max_agents: 9,
                ..GenConfig::default()
            },
            GenConfig {
                min_agents: 4,
                max_agents: 3,
                ..GenConfig::default()
            },
            GenConfig {
                denominator_bound: 0,
                ..GenConfig::default()
            },
        ] {
            assert!(matches!(generate_economy(&config), Err(Error::Config(_))));
        }
    }
}
