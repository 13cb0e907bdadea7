//! Synchronous social learning.
//!
//! Both rules read the scores of generation `t` and produce the strategies of
//! generation `t + 1` for every node at once. Random draws are taken in node
//! index order so a seed fixes the whole trajectory.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ScoreVector, Strategy, StrategyVector};
use crate::network::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Imitate the highest-scoring neighbour.
    Deterministic,
    /// Copy a random neighbour with Fermi probability.
    Stochastic,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Deterministic => "deterministic",
            UpdateRule::Stochastic => "stochastic",
        }
    }

    /// Default number of generations simulated under this rule.
    pub fn default_horizon(self) -> usize {
        match self {
            UpdateRule::Deterministic => 75,
            UpdateRule::Stochastic => 500,
        }
    }
}

impl std::str::FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(UpdateRule::Deterministic),
            "stochastic" => Ok(UpdateRule::Stochastic),
            _ => Err(Error::InvalidUpdateRule(format!("unknown rule `{s}`"))),
        }
    }
}

pub const DEFAULT_NOISE: f64 = 0.1;

fn default_noise() -> f64 {
    DEFAULT_NOISE
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateRuleConfig {
    pub rule: UpdateRule,
    /// Selection noise of the Fermi rule. Ignored by the deterministic rule.
    #[serde(rename = "K", default = "default_noise")]
    pub k: f64,
    /// Imitate-best only switches when the best neighbour strictly beats the
    /// focal agent's own score. With `false`, the best neighbour is always
    /// copied.
    #[serde(default = "yes")]
    pub self_comparison: bool,
}

impl UpdateRuleConfig {
    pub fn deterministic() -> Self {
        UpdateRuleConfig {
            rule: UpdateRule::Deterministic,
            k: DEFAULT_NOISE,
            self_comparison: true,
        }
    }

    pub fn stochastic(k: f64) -> Self {
        UpdateRuleConfig {
            rule: UpdateRule::Stochastic,
            k,
            self_comparison: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rule == UpdateRule::Stochastic && !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidUpdateRule(format!("K = {} must be finite and > 0", self.k)));
        }
        Ok(())
    }

    pub fn step<R: Rng + ?Sized>(
        &self,
        g: &Graph,
        s: &StrategyVector,
        scores: &ScoreVector,
        rng: &mut R,
    ) -> StrategyVector {
        match self.rule {
            UpdateRule::Deterministic => step_deterministic(g, s, scores, self.self_comparison, rng),
            UpdateRule::Stochastic => step_stochastic(g, s, scores, self.k, rng),
        }
    }
}

/// Probability that an agent scoring `f_a` copies a neighbour scoring `f_b`:
/// `1 / (1 + exp((f_a - f_b) / k))`.
pub fn fermi_probability(f_a: f64, f_b: f64, k: f64) -> f64 {
    let x = (f_a - f_b) / k;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Imitate-best, synchronously.
///
/// Ties among equally scored best neighbours with differing strategies are
/// broken uniformly at random; no draw is made otherwise.
pub fn step_deterministic<R: Rng + ?Sized>(
    g: &Graph,
    s: &StrategyVector,
    scores: &ScoreVector,
    self_comparison: bool,
    rng: &mut R,
) -> StrategyVector {
    let mut best = Vec::new();
    (0..g.n())
        .map(|i| {
            let own = s.get(i);
            let neighbors = g.neighbors(i);
            let top = neighbors
                .iter()
                .map(|&j| scores.get(j))
                .fold(f64::NEG_INFINITY, f64::max);
            if self_comparison && top <= scores.get(i) {
                return own;
            }
            best.clear();
            best.extend(neighbors.iter().copied().filter(|&j| scores.get(j) == top));
            let first = s.get(best[0]);
            if best.iter().all(|&j| s.get(j) == first) {
                first
            } else {
                s.get(best[rng.random_range(0..best.len())])
            }
        })
        .collect()
}

/// Random draws of one node for the Fermi rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeDraw {
    /// Index into the node's sorted neighbour list.
    pub slot: usize,
    /// Uniform in `[0, 1)`; the copy happens when `coin < p`.
    pub coin: f64,
}

/// Draw a neighbour slot and a coin for every node, in node order.
pub fn draw_stochastic<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Vec<NodeDraw> {
    (0..g.n())
        .map(|i| NodeDraw {
            slot: rng.random_range(0..g.degree(i)),
            coin: rng.random::<f64>(),
        })
        .collect()
}

/// Apply the Fermi rule with pre-drawn randomness.
pub fn apply_stochastic(
    g: &Graph,
    s: &StrategyVector,
    scores: &ScoreVector,
    k: f64,
    draws: &[NodeDraw],
) -> StrategyVector {
    debug_assert_eq!(draws.len(), g.n());
    draws
        .iter()
        .enumerate()
        .map(|(a, d)| {
            let b = g.neighbors(a)[d.slot];
            let (own, other) = (s.get(a), s.get(b));
            if own != other && d.coin < fermi_probability(scores.get(a), scores.get(b), k) {
                other
            } else {
                own
            }
        })
        .collect()
}

pub fn step_stochastic<R: Rng + ?Sized>(
    g: &Graph,
    s: &StrategyVector,
    scores: &ScoreVector,
    k: f64,
    rng: &mut R,
) -> StrategyVector {
    let draws = draw_stochastic(g, rng);
    apply_stochastic(g, s, scores, k, &draws)
}

pub fn is_homogeneous(s: &StrategyVector) -> bool {
    match s.as_slice().first() {
        None => true,
        Some(&first) => s.as_slice().iter().all(|&x| x == first),
    }
}

/// The shared strategy of a homogeneous population.
pub fn homogeneous_strategy(s: &StrategyVector) -> Option<Strategy> {
    if s.is_empty() || !is_homogeneous(s) {
        None
    } else {
        Some(s.get(0))
    }
}
