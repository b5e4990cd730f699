//! Grid mesh construction, de-tangling, link-uncertainty sampling and the
//! path views (i-hop groups, destination-oriented DAGs) used by the Bayesian
//! equivalents.

mod config;
mod grid;
mod paths;
mod sample;

pub use config::{ScenarioSpec, TopologyConfig};
pub use grid::{
    build_grid_mesh, from_layout, server_number, DiagonalMode, Link, LinkKind, MeshNode,
    MeshTopology, NodeId, Position, Role, Scenario, ScenarioName, DEFAULT_LAYOUT,
    DIAGONAL_SPACING_M, GRID_SPACING_M,
};
pub use paths::{build_dag, enumerate_ihop_paths, orientation_rank, DagTopology, PathGroup};
pub use sample::{sample_link_uncertainty, sample_trial, LinkSample, LinkState};
