//! Scale-free contact networks.
//!
//! Two growth models are provided:
//!
//! * [`NetworkModel::Ba`]: Barabási–Albert preferential attachment. A connected
//!   core of `m0` nodes (a path; a single edge for the default `m0 = 2`) grows
//!   by adding one node at a time, each attached to `m` distinct existing nodes
//!   chosen with probability proportional to degree.
//! * [`NetworkModel::Dms`]: edge attachment seeded from a triangle. Each new
//!   node picks one existing edge uniformly at random and links to both of its
//!   endpoints. This keeps the mean degree near four while closing a triangle
//!   at every step, so clustering stays high.
//!
//! Both families have `2n - 3` edges with the defaults.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NetworkModel {
    #[serde(rename = "BA", alias = "ba")]
    Ba,
    #[serde(rename = "DMS", alias = "dms")]
    Dms,
}

impl NetworkModel {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkModel::Ba => "BA",
            NetworkModel::Dms => "DMS",
        }
    }
}

impl std::fmt::Display for NetworkModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NetworkModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BA" => Ok(NetworkModel::Ba),
            "DMS" => Ok(NetworkModel::Dms),
            _ => Err(Error::InvalidNetwork(format!("unknown model `{s}`"))),
        }
    }
}

fn default_m0() -> usize {
    2
}

fn default_m() -> usize {
    2
}

/// Parameters of a generated network.
///
/// `m0` and `m` only affect [`NetworkModel::Ba`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub model: NetworkModel,
    pub n: usize,
    #[serde(default = "default_m0")]
    pub m0: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(model: NetworkModel, n: usize, seed: u64) -> Self {
        NetworkConfig {
            model,
            n,
            m0: default_m0(),
            m: default_m(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidNetwork(format!("n = {} but n must be at least 3", self.n)));
        }
        if self.model == NetworkModel::Ba {
            if self.m0 < 2 {
                return Err(Error::InvalidNetwork(format!("m0 = {} but m0 must be at least 2", self.m0)));
            }
            if self.m < 1 || self.m > self.m0 {
                return Err(Error::InvalidNetwork(format!(
                    "m = {} must satisfy 1 <= m <= m0 = {}",
                    self.m, self.m0
                )));
            }
            if self.n < self.m0 + 1 {
                return Err(Error::InvalidNetwork(format!(
                    "n = {} must exceed the initial core m0 = {}",
                    self.n, self.m0
                )));
            }
        }
        Ok(())
    }
}

/// Immutable undirected simple graph.
///
/// Neighbour lists are sorted by node id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    max_degree: usize,
    provenance: Option<(NetworkModel, u64)>,
}

impl Graph {
    /// Build a graph from an edge list, checking that it is simple, connected
    /// and free of isolated nodes.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("parallel edge at node {u}")));
            }
            if list.is_empty() && n > 1 {
                return Err(Error::InvalidGraph(format!("node {u} is isolated")));
            }
        }
        let graph = Graph {
            max_degree: adjacency.iter().map(Vec::len).max().unwrap_or(0),
            edge_count: edges.len(),
            adjacency,
            provenance: None,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.adjacency.iter().map(Vec::len)
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Average connectivity `z = 2|E| / N`.
    pub fn average_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.n() as f64
    }

    /// Model and seed this graph was generated from, if any.
    pub fn provenance(&self) -> Option<(NetworkModel, u64)> {
        self.provenance
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    fn bfs_distances(&self, source: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.clear();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut dist = vec![0; self.n()];
        self.bfs_distances(0, &mut dist, &mut VecDeque::new());
        dist.iter().all(|&d| d != usize::MAX)
    }

    /// Longest shortest path, by breadth-first search from every node.
    pub fn diameter(&self) -> usize {
        let mut dist = vec![0; self.n()];
        let mut queue = VecDeque::new();
        (0..self.n())
            .map(|s| {
                self.bfs_distances(s, &mut dist, &mut queue);
                dist.iter().copied().max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            model: self.provenance.map(|p| p.0),
            n: self.n(),
            seed: self.provenance.map(|p| p.1),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_file()).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let file: GraphFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        Graph::try_from(file)
    }
}

/// On-disk graph: `{model, n, seed, edges: [[u, v], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub model: Option<NetworkModel>,
    pub n: usize,
    pub seed: Option<u64>,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut graph = Graph::from_edges(file.n, &edges)?;
        if let (Some(model), Some(seed)) = (file.model, file.seed) {
            graph.provenance = Some((model, seed));
        }
        Ok(graph)
    }
}

/// Generate a graph for `config`, drawing from `rng`.
pub fn generate<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Graph> {
    match config.model {
        NetworkModel::Ba => generate_ba(config, rng),
        NetworkModel::Dms => generate_dms(config, rng),
    }
}

/// Generate a graph seeded from `config.seed`.
pub fn generate_seeded(config: &NetworkConfig) -> Result<Graph> {
    generate(config, &mut crate::seed::rng(config.seed))
}

pub fn generate_ba<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Graph> {
    if config.model != NetworkModel::Ba {
        return Err(Error::InvalidNetwork("generate_ba called with a non-BA config".into()));
    }
    config.validate()?;
    let NetworkConfig { n, m0, m, .. } = *config;

    let mut edges = Vec::with_capacity(m0 - 1 + m * (n - m0));
    // One entry per edge endpoint; a uniform pick is a degree-proportional pick.
    let mut endpoints = Vec::with_capacity(2 * edges.capacity());
    for u in 1..m0 {
        edges.push((u - 1, u));
        endpoints.extend([u - 1, u]);
    }
    let mut targets = Vec::with_capacity(m);
    for v in m0..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    let mut graph = Graph::from_edges(n, &edges)?;
    graph.provenance = Some((NetworkModel::Ba, config.seed));
    Ok(graph)
}

pub fn generate_dms<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Graph> {
    if config.model != NetworkModel::Dms {
        return Err(Error::InvalidNetwork("generate_dms called with a non-DMS config".into()));
    }
    if config.n < 3 {
        return Err(Error::InvalidNetwork(format!("n = {} but n must be at least 3", config.n)));
    }
    let n = config.n;
    let mut edges = Vec::with_capacity(2 * n - 3);
    edges.extend([(0, 1), (0, 2), (1, 2)]);
    for v in 3..n {
        let (a, b) = edges[rng.random_range(0..edges.len())];
        edges.push((a, v));
        edges.push((b, v));
    }
    let mut graph = Graph::from_edges(n, &edges)?;
    graph.provenance = Some((NetworkModel::Dms, config.seed));
    Ok(graph)
}

/// Global clustering coefficient: `3 * triangles / connected triples`.
///
/// Returns 0 for graphs without any connected triple.
pub fn global_transitivity(g: &Graph) -> f64 {
    let triples: u64 = g
        .degrees()
        .map(|d| (d as u64) * (d as u64).saturating_sub(1) / 2)
        .sum();
    if triples == 0 {
        return 0.0;
    }
    3.0 * triangle_count(g) as f64 / triples as f64
}

/// Number of triangles, each counted once.
pub fn triangle_count(g: &Graph) -> u64 {
    let mut count = 0u64;
    for u in 0..g.n() {
        let nu = g.neighbors(u);
        for &v in nu.iter().filter(|&&v| v > u) {
            // Count common neighbours w > v by merging the two sorted lists.
            let nv = g.neighbors(v);
            let (mut i, mut j) = (nu.partition_point(|&w| w <= v), nv.partition_point(|&w| w <= v));
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        count += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    count
}

/// How node influence is normalised into `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centrality {
    /// Fraction of other nodes with strictly lower degree.
    #[default]
    Percentile,
    /// Degree divided by the maximum degree.
    MaxNormalized,
}

/// Per-node influence values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMetrics {
    values: Vec<f64>,
}

impl NodeMetrics {
    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// `q_i = |{j != i : deg(j) < deg(i)}| / (n - 1)`.
pub fn degree_percentiles(g: &Graph) -> NodeMetrics {
    let n = g.n();
    let mut sorted: Vec<usize> = g.degrees().collect();
    sorted.sort_unstable();
    let denom = n.saturating_sub(1).max(1) as f64;
    let values = g
        .degrees()
        .map(|d| sorted.partition_point(|&x| x < d) as f64 / denom)
        .collect();
    NodeMetrics { values }
}

pub fn node_centrality(g: &Graph, kind: Centrality) -> NodeMetrics {
    match kind {
        Centrality::Percentile => degree_percentiles(g),
        Centrality::MaxNormalized => {
            let max = g.max_degree().max(1) as f64;
            NodeMetrics {
                values: g.degrees().map(|d| d as f64 / max).collect(),
            }
        }
    }
}

/// Discrete power-law exponent by maximum likelihood over degrees `>= k_min`,
/// using the continuous approximation with the half-integer shift:
/// `alpha = 1 + n / sum(ln(k / (k_min - 1/2)))`.
///
/// Returns `None` when fewer than two degrees reach `k_min`.
pub fn power_law_exponent<I>(degrees: I, k_min: usize) -> Option<f64>
where
    I: IntoIterator<Item = usize>,
{
    let shift = k_min as f64 - 0.5;
    let (count, log_sum) = degrees
        .into_iter()
        .filter(|&k| k >= k_min)
        .fold((0usize, 0.0f64), |(c, s), k| (c + 1, s + (k as f64 / shift).ln()));
    (count >= 2 && log_sum > 0.0).then(|| 1.0 + count as f64 / log_sum)
}
