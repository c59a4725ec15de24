//! Nielsen coincidence invariants for maps between flat manifolds.

pub mod axiom_harness;
pub mod coincidence_solver;
pub mod cli;
pub mod config;
pub mod equivariant_map;
pub mod error;
pub mod flat_space;
pub mod generators;
pub mod homotopy;
pub mod instances;
pub mod invariants;
pub mod lattice;
pub mod orientation_system;
pub mod rational;
pub mod report;
pub mod twisted_conjugacy;

pub use error::{Error, Result};
pub use flat_space::{DeckElement, DomainMarker, FlatManifold, ManifoldKind, OpenBox, OpenRegion};
pub use rational::{QMat, QVec, Q};
