//! The three storage layouts behind [`MultilayerStore`](crate::store::MultilayerStore).

mod adjacency;
mod edge_table;
mod matrix;

use std::fmt;
use std::str::FromStr;

use crate::store::MultilayerStore;

pub use adjacency::AdjacencyBackend;
pub use edge_table::EdgeTableBackend;
pub use matrix::{MatrixBackend, DENSE_SLOT_CAP};

/// Selector for the storage layouts, as spelled on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Adjacency,
    EdgeTable,
    Matrix,
    /// Bit-matrix demonstration mode; intentionally memory-capped.
    MatrixDense,
}

impl BackendKind {
    pub const ALL: [BackendKind; 4] = [
        BackendKind::Adjacency,
        BackendKind::EdgeTable,
        BackendKind::Matrix,
        BackendKind::MatrixDense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Adjacency => "adjacency",
            BackendKind::EdgeTable => "edge-table",
            BackendKind::Matrix => "matrix",
            BackendKind::MatrixDense => "matrix-dense",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adjacency" => Ok(BackendKind::Adjacency),
            "edge-table" => Ok(BackendKind::EdgeTable),
            "matrix" => Ok(BackendKind::Matrix),
            "matrix-dense" => Ok(BackendKind::MatrixDense),
            other => Err(format!(
                "unknown backend {other:?} (expected adjacency, edge-table, matrix, or matrix-dense)"
            )),
        }
    }
}

/// Builds an empty store of the requested layout.
pub fn new_store(kind: BackendKind) -> Box<dyn MultilayerStore> {
    match kind {
        BackendKind::Adjacency => Box::new(AdjacencyBackend::new()),
        BackendKind::EdgeTable => Box::new(EdgeTableBackend::new()),
        BackendKind::Matrix => Box::new(MatrixBackend::new()),
        BackendKind::MatrixDense => Box::new(MatrixBackend::new_dense()),
    }
}
