//! Reachability for rotor-routing, free routing and generalized rotor mechanisms.

pub mod error;
pub mod formal_sum;
pub mod graph;
pub mod zlinalg;
mod maxflow;
pub mod free_routing;
pub mod rotor;
pub mod grm;
pub mod reach;
pub mod oracle;
pub mod text;

pub use error::{Error, Result};
pub use formal_sum::{Config, IndexKind, Universe};
pub use graph::{ArcId, ComponentPartition, Multigraph, VertexId};
