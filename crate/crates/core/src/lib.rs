//! K_r-bootstrap percolation: graph primitives, the infection process,
//! extremal constructions, source analysis, exhaustive search and the
//! random-weight threshold model.

pub mod engine;
pub mod error;
pub mod families;
pub mod graph;
pub mod random;
pub mod search;
pub mod sources;

pub use engine::{close, percolates, saturation_time, InfectionTrace, ProcessParams};
pub use error::{AnalysisError, GraphError, ParamError, SearchError};
pub use graph::{Edge, Graph, VertexSet};
