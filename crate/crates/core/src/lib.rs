//! Cost-efficient positive incentives for cooperation on scale-free networks.
//!
//! Agents on a Barabási–Albert or edge-attachment (DMS) network play the weak
//! Prisoner's Dilemma with every neighbour. An external investor adds an
//! endowment to the payoff of selected cooperators, then every agent updates
//! its strategy by imitating neighbours. The crate simulates this process,
//! aggregates replicates over parameter grids and extracts the cheapest
//! configuration for each cooperation target.
//!
//! ```
//! use coopsim::prelude::*;
//!
//! let net = NetworkConfig::new(NetworkModel::Dms, 200, 1);
//! let graph = coopsim::network::generate_seeded(&net)?;
//! let cfg = RunConfig::new(net, UpdateRuleConfig::deterministic(), InterferenceConfig::pop(2.0, 0.5));
//! let result = coopsim::engine::run_simulation(&cfg, &graph, &mut coopsim::seed::rng(7))?;
//! assert_eq!(result.trace.len(), 75);
//! # Ok::<(), coopsim::Error>(())
//! ```

pub mod dynamics;
pub mod engine;
mod error;
pub mod game;
pub mod interference;
pub mod network;
pub mod seed;
pub mod table;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dynamics::{UpdateRule, UpdateRuleConfig};
    pub use crate::engine::{
        efficiency_frontier, run_parameter_point, run_replicate, sweep, Ensemble, ExperimentConfig, FrontierRow, RunConfig,
        RunResult, SweepGrid, SweepSummary,
    };
    pub use crate::game::{PayoffParams, Strategy, StrategyVector, C, D};
    pub use crate::interference::{Composition, InterferenceConfig, Scheme, SchemeSet};
    pub use crate::network::{Centrality, Graph, NetworkConfig, NetworkModel};
}
