//! Simulation and exact analysis of the kinetically constrained Ising
//! process (KCIP) and the reference chains used to study its mixing.

pub mod chains;
pub mod components;
pub mod error;
pub mod exact;
pub mod graph;
pub mod kcip;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Graph, GraphKind, Vertex};
pub use kcip::{Density, SpinConfig, UpdateDraw};
