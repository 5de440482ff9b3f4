//! Global search: start-point boxes, maximin sampling, clustering
//! multistart, DIRECT and the strategy dispatcher.

pub mod cluster;
pub mod direct;
pub mod kmeans;
pub mod lhd;
mod search_box;
pub mod strategy;

pub use cluster::{cluster_starts, ClusterOptions, ClusterStarts};
pub use direct::{direct_search, Direct, Rectangle};
pub use kmeans::{kmeans, KMeansResult};
pub use lhd::{latin_hypercube, lhd_maximin, lhd_maximin_search, MaximinDesign};
pub use search_box::{default_beta_box, if_beta_box, SearchBox};
pub use strategy::{run_strategy, StrategyId, StrategyOptions, StrategyReport};
