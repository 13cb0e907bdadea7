//! External investment in cooperators.
//!
//! Each generation, after payoffs are accumulated, cooperators that satisfy
//! the active schemes receive an endowment `theta` on top of their score. A
//! node is paid at most once per generation no matter how many schemes it
//! satisfies.
//!
//! * `POP`: invest in every cooperator when the global cooperator fraction is
//!   at most `p_c`.
//! * `NEB`: invest in a cooperator when the cooperator fraction among its
//!   neighbours is at most `n_c`.
//! * `NI`: invest in a cooperator whose centrality is at least `c_I`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ScoreVector, StrategyVector};
use crate::network::{Centrality, Graph, NodeMetrics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "POP", alias = "pop")]
    Pop,
    #[serde(rename = "NEB", alias = "neb")]
    Neb,
    #[serde(rename = "NI", alias = "ni")]
    Ni,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Pop => "POP",
            Scheme::Neb => "NEB",
            Scheme::Ni => "NI",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "POP" => Ok(Scheme::Pop),
            "NEB" => Ok(Scheme::Neb),
            "NI" => Ok(Scheme::Ni),
            other => Err(Error::InvalidInterference(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A sorted, duplicate-free set of schemes. Empty means no interference.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Scheme>", into = "Vec<Scheme>")]
pub struct SchemeSet(Vec<Scheme>);

impl SchemeSet {
    pub fn new<I: IntoIterator<Item = Scheme>>(schemes: I) -> Self {
        let mut v: Vec<_> = schemes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SchemeSet(v)
    }

    pub fn none() -> Self {
        SchemeSet(Vec::new())
    }

    pub fn contains(&self, s: Scheme) -> bool {
        self.0.contains(&s)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Scheme> + '_ {
        self.0.iter().copied()
    }

    /// Parse the `+`-joined form used in tables, e.g. `NEB+NI`. The empty
    /// string is the empty set.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(SchemeSet::none());
        }
        s.split('+').map(str::parse).collect::<Result<Vec<_>>>().map(SchemeSet::new)
    }
}

impl From<Vec<Scheme>> for SchemeSet {
    fn from(v: Vec<Scheme>) -> Self {
        SchemeSet::new(v)
    }
}

impl From<SchemeSet> for Vec<Scheme> {
    fn from(s: SchemeSet) -> Self {
        s.0
    }
}

impl fmt::Display for SchemeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(s.as_str())?;
        }
        Ok(())
    }
}

/// How several active schemes combine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// A cooperator must satisfy every active scheme.
    #[default]
    All,
    /// A cooperator must satisfy at least one active scheme.
    Any,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceConfig {
    #[serde(default)]
    pub schemes: SchemeSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_c: Option<f64>,
    #[serde(default, rename = "c_I", skip_serializing_if = "Option::is_none")]
    pub c_i: Option<f64>,
    #[serde(default)]
    pub composition: Composition,
    #[serde(default)]
    pub centrality: Centrality,
}

impl InterferenceConfig {
    /// No interference.
    pub fn baseline() -> Self {
        InterferenceConfig::default()
    }

    pub fn pop(theta: f64, p_c: f64) -> Self {
        InterferenceConfig {
            schemes: SchemeSet::new([Scheme::Pop]),
            theta: Some(theta),
            p_c: Some(p_c),
            ..Default::default()
        }
    }

    pub fn neb(theta: f64, n_c: f64) -> Self {
        InterferenceConfig {
            schemes: SchemeSet::new([Scheme::Neb]),
            theta: Some(theta),
            n_c: Some(n_c),
            ..Default::default()
        }
    }

    pub fn ni(theta: f64, c_i: f64) -> Self {
        InterferenceConfig {
            schemes: SchemeSet::new([Scheme::Ni]),
            theta: Some(theta),
            c_i: Some(c_i),
            ..Default::default()
        }
    }

    /// `theta` whenever at least one scheme is active, otherwise 0.
    pub fn endowment(&self) -> f64 {
        if self.schemes.is_empty() {
            0.0
        } else {
            self.theta.unwrap_or(0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidInterference(m));
        if !self.schemes.is_empty() {
            match self.theta {
                Some(t) if t > 0.0 && t.is_finite() => {}
                other => return err(format!("theta must be finite and > 0, got {other:?}")),
            }
        } else if self.theta.is_some() {
            return err("theta given without any active scheme".into());
        }
        for (scheme, name, value) in [
            (Scheme::Pop, "p_c", self.p_c),
            (Scheme::Neb, "n_c", self.n_c),
            (Scheme::Ni, "c_I", self.c_i),
        ] {
            match (self.schemes.contains(scheme), value) {
                (true, Some(v)) if (0.0..=1.0).contains(&v) => {}
                (true, Some(v)) => return err(format!("{name} = {v} outside [0, 1]")),
                (true, None) => return err(format!("{} is active but {name} is missing", scheme.as_str())),
                (false, Some(_)) => {
                    return err(format!("{name} given but {} is not active", scheme.as_str()))
                }
                (false, None) => {}
            }
        }
        Ok(())
    }
}

/// Investment made in one generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvestmentRecord {
    pub generation: usize,
    pub count: usize,
    pub cost: f64,
}

/// All cooperators if the global cooperator fraction is at most `p_c`,
/// otherwise nobody.
pub fn pop_eligible(s: &StrategyVector, p_c: f64) -> Vec<usize> {
    if s.cooperation_fraction() <= p_c {
        cooperators(s).collect()
    } else {
        Vec::new()
    }
}

pub fn neb_eligible(g: &Graph, s: &StrategyVector, n_c: f64, node: usize) -> bool {
    s.get(node).is_cooperator()
        && s.cooperating_neighbors(g, node) as f64 / g.degree(node) as f64 <= n_c
}

pub fn ni_eligible(metrics: &NodeMetrics, s: &StrategyVector, c_i: f64, node: usize) -> bool {
    s.get(node).is_cooperator() && metrics.get(node) >= c_i
}

fn cooperators(s: &StrategyVector) -> impl Iterator<Item = usize> + '_ {
    s.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, st)| st.is_cooperator())
        .map(|(i, _)| i)
}

/// Nodes that receive the endowment this generation, ascending and without
/// duplicates. `metrics` is only consulted when `NI` is active.
pub fn eligible_set(
    g: &Graph,
    metrics: &NodeMetrics,
    s: &StrategyVector,
    cfg: &InterferenceConfig,
) -> Vec<usize> {
    if cfg.schemes.is_empty() {
        return Vec::new();
    }
    let pop_open = cfg.p_c.map(|p| s.cooperation_fraction() <= p);
    let holds = |scheme: Scheme, i: usize| match scheme {
        Scheme::Pop => pop_open.unwrap_or(false),
        Scheme::Neb => neb_eligible(g, s, cfg.n_c.unwrap_or(f64::NEG_INFINITY), i),
        Scheme::Ni => ni_eligible(metrics, s, cfg.c_i.unwrap_or(f64::INFINITY), i),
    };
    cooperators(s)
        .filter(|&i| match cfg.composition {
            Composition::All => cfg.schemes.iter().all(|sc| holds(sc, i)),
            Composition::Any => cfg.schemes.iter().any(|sc| holds(sc, i)),
        })
        .collect()
}

/// Add `theta` once to every eligible node's score.
pub fn apply_interference(
    mut scores: ScoreVector,
    eligible: &[usize],
    theta: f64,
    generation: usize,
) -> (ScoreVector, InvestmentRecord) {
    for &i in eligible {
        scores.add(i, theta);
    }
    let record = InvestmentRecord {
        generation,
        count: eligible.len(),
        cost: theta * eligible.len() as f64,
    };
    (scores, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{C, D};
    use crate::network::degree_percentiles;

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    #[test]
    fn pop_boundary_is_inclusive() {
        let s = StrategyVector::parse("CCCCCDDDDD").unwrap();
        assert_eq!(pop_eligible(&s, 0.5), vec![0, 1, 2, 3, 4]);
        let s = StrategyVector::parse("CCCCCCCCCD").unwrap();
        assert!(pop_eligible(&s, 0.8).is_empty());
        assert_eq!(pop_eligible(&s, 1.0).len(), 9);
        assert_eq!(pop_eligible(&StrategyVector::uniform(4, C), 1.0).len(), 4);
    }

    #[test]
    fn neb_cases() {
        let g = star(4);
        let s = StrategyVector::new(vec![C, C, C, D, D]);
        assert!(neb_eligible(&g, &s, 0.5, 0));
        let s = StrategyVector::new(vec![C, C, C, C, D]);
        assert!(!neb_eligible(&g, &s, 0.5, 0));
        let s = StrategyVector::new(vec![D, C, C, C, C]);
        assert!(!neb_eligible(&g, &s, 1.0, 0));
    }

    #[test]
    fn ni_cases() {
        let g = star(4);
        let q = degree_percentiles(&g);
        let s = StrategyVector::uniform(5, C);
        assert!((0..5).all(|i| ni_eligible(&q, &s, 0.0, i)));
        assert!(ni_eligible(&q, &s, 1.0, 0));
        assert!((1..5).all(|i| !ni_eligible(&q, &s, 1.0, i)));
    }

    #[test]
    fn ni_excludes_bottom_five_percent() {
        // Path of 40 nodes: two endpoints (5%) have degree 1, the rest degree 2.
        let edges: Vec<_> = (0..39).map(|v| (v, v + 1)).collect();
        let g = Graph::from_edges(40, &edges).unwrap();
        let q = degree_percentiles(&g);
        let s = StrategyVector::uniform(40, C);
        let cfg = InterferenceConfig::ni(1.0, 0.05);
        let set = eligible_set(&g, &q, &s, &cfg);
        assert_eq!(set, (1..39).collect::<Vec<_>>());
    }

    #[test]
    fn neb_and_ni_conjunction() {
        // Leaf 1 cooperates among defectors: NEB alone would pay it, but it
        // is a minimum-degree node.
        let g = star(4);
        let q = degree_percentiles(&g);
        let s = StrategyVector::new(vec![D, C, D, D, D]);
        let mut cfg = InterferenceConfig::neb(1.0, 0.5);
        assert_eq!(eligible_set(&g, &q, &s, &cfg), vec![1]);
        cfg.schemes = SchemeSet::new([Scheme::Neb, Scheme::Ni]);
        cfg.c_i = Some(0.05);
        assert!(eligible_set(&g, &q, &s, &cfg).is_empty());
    }

    #[test]
    fn single_scheme_identity() {
        let g = star(4);
        let q = degree_percentiles(&g);
        let s = StrategyVector::new(vec![C, C, D, D, D]);
        let cfg = InterferenceConfig::pop(2.0, 0.4);
        assert_eq!(eligible_set(&g, &q, &s, &cfg), pop_eligible(&s, 0.4));
        assert!(eligible_set(&g, &q, &s, &InterferenceConfig::baseline()).is_empty());
    }

    #[test]
    fn multiple_schemes_pay_once() {
        let g = star(4);
        let q = degree_percentiles(&g);
        let s = StrategyVector::new(vec![D, C, D, D, D]);
        for composition in [Composition::All, Composition::Any] {
            let cfg = InterferenceConfig {
                schemes: SchemeSet::new([Scheme::Pop, Scheme::Neb]),
                theta: Some(5.0),
                p_c: Some(1.0),
                n_c: Some(1.0),
                composition,
                ..Default::default()
            };
            let set = eligible_set(&g, &q, &s, &cfg);
            assert_eq!(set, vec![1]);
            let (scores, rec) = apply_interference(ScoreVector::new(vec![0.0; 5]), &set, 5.0, 0);
            assert_eq!(scores.get(1), 5.0);
            assert_eq!(rec.cost, 5.0);
        }
    }

    #[test]
    fn union_composition() {
        let g = star(4);
        let q = degree_percentiles(&g);
        let s = StrategyVector::new(vec![C, C, C, C, D]);
        let cfg = InterferenceConfig {
            schemes: SchemeSet::new([Scheme::Neb, Scheme::Ni]),
            theta: Some(1.0),
            n_c: Some(0.5),
            c_i: Some(1.0),
            composition: Composition::Any,
            ..Default::default()
        };
        // Centre passes NI, leaves with a cooperating centre fail NEB (1.0 > 0.5).
        assert_eq!(eligible_set(&g, &q, &s, &cfg), vec![0]);
    }

    #[test]
    fn accounting() {
        let (scores, rec) = apply_interference(ScoreVector::new(vec![1.0; 5]), &[0, 2, 4], 2.0, 3);
        assert_eq!(scores.as_slice(), &[3.0, 1.0, 3.0, 1.0, 3.0]);
        assert_eq!(rec, InvestmentRecord { generation: 3, count: 3, cost: 6.0 });
        let (scores, rec) = apply_interference(ScoreVector::new(vec![1.0; 2]), &[], 2.0, 0);
        assert_eq!(scores.as_slice(), &[1.0, 1.0]);
        assert_eq!(rec.cost, 0.0);
    }

    #[test]
    fn validation() {
        assert!(InterferenceConfig::baseline().validate().is_ok());
        assert!(InterferenceConfig::pop(5.0, 0.8).validate().is_ok());
        assert!(InterferenceConfig::pop(0.0, 0.8).validate().is_err());
        assert!(InterferenceConfig::pop(1.0, 1.5).validate().is_err());
        let mut cfg = InterferenceConfig::neb(1.0, 0.5);
        cfg.p_c = Some(0.3);
        assert!(cfg.validate().is_err());
        cfg.p_c = None;
        cfg.n_c = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let cfg: InterferenceConfig =
            serde_json::from_str(r#"{"schemes":["NEB","NI"],"theta":2.5,"n_c":0.5,"c_I":0.05}"#).unwrap();
        assert_eq!(cfg.schemes.to_string(), "NEB+NI");
        assert_eq!(cfg.c_i, Some(0.05));
        assert_eq!(cfg.composition, Composition::All);
        cfg.validate().unwrap();
        assert_eq!(SchemeSet::parse("NI+NEB").unwrap(), cfg.schemes);
        assert!(SchemeSet::parse("").unwrap().is_empty());
    }
}
