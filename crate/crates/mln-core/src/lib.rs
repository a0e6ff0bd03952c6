//! In-memory storage engine for multilayer networks.
//!
//! A multilayer network couples a set of actors with an ordered list of
//! dimensions; each actor may appear as a node in any combination of layer
//! coordinates, and undirected edges connect node-layers within or across
//! layers. The [`store::MultilayerStore`] trait captures the full mutation
//! and query surface once, and three interchangeable backends implement it:
//!
//! - [`backends::AdjacencyBackend`] — per-node neighbor sets, the fast default
//! - [`backends::EdgeTableBackend`] — relational row tables with tombstones
//! - [`backends::MatrixBackend`] — supra-adjacency matrix, sparse by default
//!   with a deliberately capped dense demo mode
//!
//! Layer-level operators ([`operators`]) — flatten, project, diff, and
//! predicate-driven filter — are written once against the trait, so every
//! backend produces identical results; [`canonical::snapshot_canonical`]
//! renders a network as a sorted text form that makes that equivalence
//! checkable byte for byte. [`generator`] grows seeded random networks,
//! and [`io`] reads and writes a line-oriented interchange format.

pub mod backends;
pub mod canonical;
pub mod error;
pub mod generator;
pub mod io;
pub mod model;
pub mod operators;
pub mod predicate;
pub mod store;

pub use backends::{new_store, BackendKind};
pub use canonical::{snapshot_canonical, CanonicalForm};
pub use error::{Result, StoreError};
pub use generator::{generate_er, ErConfig};
pub use io::{read_mln, read_mln_str, write_mln, write_mln_string, IoError};
pub use model::{
    coord, ActorId, AttributeMap, AttributeValue, Dimension, DimensionSchema, Edge,
    LayerCoordinate, LayerRef, NodeLayer,
};
pub use operators::{diff_layer, filter_layer, flatten_layer, project_layer};
pub use predicate::{parse_predicate, NodeContext, Predicate, PredicateError};
pub use store::{LayerContents, MultilayerStore};
