use thiserror::Error;

/// Errors produced by store mutations, layer operators, and the generator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error("dimension `{0}` already exists")]
    DuplicateDimension(String),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("dimension `{0}` has more than one layer and cannot be deleted")]
    DimensionNotSingleton(String),
    #[error("layer `{layer}` already exists in dimension `{dimension}`")]
    DuplicateLayer { dimension: String, layer: String },
    #[error("unknown layer `{layer}` in dimension `{dimension}`")]
    UnknownLayer { dimension: String, layer: String },
    #[error("layer `{layer}` is the last layer of dimension `{dimension}`")]
    LastLayerInDimension { dimension: String, layer: String },
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),
    #[error("node `{actor}` already exists at that coordinate")]
    DuplicateNode { actor: String },
    #[error("unknown node `{actor}` at that coordinate")]
    UnknownNode { actor: String },
    #[error("attribute keys must be non-empty")]
    EmptyKey,
    #[error("names must be non-empty")]
    EmptyName,
    #[error("edge endpoint `{actor}` does not exist at that coordinate")]
    UnknownEndpoint { actor: String },
    #[error("self-loops are not allowed")]
    SelfLoop,
    #[error("edge already exists")]
    DuplicateEdge,
    #[error("edge does not exist")]
    UnknownEdge,
    #[error("source and target layer are identical")]
    LayerIdentical,
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("store must be empty")]
    NonEmptyStore,
    #[error("out of memory: {0}")]
    OutOfMemory(String),
}

/// Stable short name for an error variant; equivalence tests compare these
/// across backends.
impl StoreError {
    pub fn kind(&self) -> &'static str {
        use StoreError::*;
        match self {
            DuplicateDimension(_) => "DuplicateDimension",
            UnknownDimension(_) => "UnknownDimension",
            DimensionNotSingleton(_) => "DimensionNotSingleton",
            DuplicateLayer { .. } => "DuplicateLayer",
            UnknownLayer { .. } => "UnknownLayer",
            LastLayerInDimension { .. } => "LastLayerInDimension",
            InvalidCoordinate(_) => "InvalidCoordinate",
            DuplicateNode { .. } => "DuplicateNode",
            UnknownNode { .. } => "UnknownNode",
            EmptyKey => "EmptyKey",
            EmptyName => "EmptyName",
            UnknownEndpoint { .. } => "UnknownEndpoint",
            SelfLoop => "SelfLoop",
            DuplicateEdge => "DuplicateEdge",
            UnknownEdge => "UnknownEdge",
            LayerIdentical => "LayerIdentical",
            InvalidConfig(_) => "InvalidConfig",
            NonEmptyStore => "NonEmptyStore",
            OutOfMemory(_) => "OutOfMemory",
        }
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;
