//! One-shot weak Prisoner's Dilemma played with every neighbour.
//!
//! Row-player payoffs: `R = 1`, `S = 0`, `T = b`, `P = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Cooperate,
    Defect,
}

pub use Strategy::{Cooperate as C, Defect as D};

impl Strategy {
    pub fn is_cooperator(self) -> bool {
        self == Strategy::Cooperate
    }

    pub fn to_char(self) -> char {
        match self {
            Strategy::Cooperate => 'C',
            Strategy::Defect => 'D',
        }
    }
}

fn default_b() -> f64 {
    1.8
}

/// Temptation to defect, `1 < b <= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffParams {
    #[serde(default = "default_b")]
    pub b: f64,
}

impl Default for PayoffParams {
    fn default() -> Self {
        PayoffParams { b: default_b() }
    }
}

impl PayoffParams {
    pub fn new(b: f64) -> Result<Self> {
        let p = PayoffParams { b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b > 1.0 && self.b <= 2.0 {
            Ok(())
        } else {
            Err(Error::InvalidPayoff(format!("b = {} outside (1, 2]", self.b)))
        }
    }
}

pub fn pairwise_payoff(row: Strategy, col: Strategy, p: &PayoffParams) -> f64 {
    match (row, col) {
        (C, C) => 1.0,
        (C, D) => 0.0,
        (D, C) => p.b,
        (D, D) => 0.0,
    }
}

/// Strategies of all nodes for one generation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyVector(Vec<Strategy>);

impl StrategyVector {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        StrategyVector(strategies)
    }

    pub fn uniform(n: usize, s: Strategy) -> Self {
        StrategyVector(vec![s; n])
    }

    /// Each node independently C or D with equal probability.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        StrategyVector((0..n).map(|_| if rng.random_bool(0.5) { C } else { D }).collect())
    }

    /// Parse a string of `C`/`D` characters.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                'C' | 'c' => Some(C),
                'D' | 'd' => Some(D),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(StrategyVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, node: usize) -> Strategy {
        self.0[node]
    }

    pub fn as_slice(&self) -> &[Strategy] {
        &self.0
    }

    pub fn cooperator_count(&self) -> usize {
        self.0.iter().filter(|s| s.is_cooperator()).count()
    }

    /// Global cooperator fraction `x_c`.
    pub fn cooperation_fraction(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.cooperator_count() as f64 / self.0.len() as f64
    }

    pub fn cooperating_neighbors(&self, g: &Graph, node: usize) -> usize {
        g.neighbors(node).iter().filter(|&&j| self.0[j].is_cooperator()).count()
    }
}

impl std::fmt::Display for StrategyVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.to_char()))
    }
}

impl FromIterator<Strategy> for StrategyVector {
    fn from_iter<I: IntoIterator<Item = Strategy>>(iter: I) -> Self {
        StrategyVector(iter.into_iter().collect())
    }
}

/// Accumulated payoff per node for one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Self {
        ScoreVector(scores)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, node: usize) -> f64 {
        self.0[node]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn add(&mut self, node: usize, amount: f64) {
        self.0[node] += amount;
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Sum of pairwise payoffs of every node against each of its neighbours,
/// accumulated in neighbour-id order.
///
/// # Panics
///
/// If `s` does not have one entry per node.
pub fn accumulate_scores(g: &Graph, s: &StrategyVector, p: &PayoffParams) -> ScoreVector {
    assert_eq!(s.len(), g.n(), "strategy vector length must equal node count");
    let scores = (0..g.n())
        .map(|i| {
            let own = s.get(i);
            g.neighbors(i)
                .iter()
                .fold(0.0, |acc, &j| acc + pairwise_payoff(own, s.get(j), p))
        })
        .collect();
    ScoreVector(scores)
}
