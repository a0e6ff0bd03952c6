//! Domain types for the multilayer network model.
//!
//! A network is the quadruple (node-layers, edges, actors, layer schema).
//! An actor is an identity that may appear in many layers; a node-layer is
//! one actor's presence at one layer coordinate; edges connect node-layers.

use std::collections::BTreeMap;
use std::fmt;

/// An actor identity, unique by name within a network.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActorId(String);

impl ActorId {
    pub fn new(name: impl Into<String>) -> Self {
        ActorId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActorId {
    fn from(s: &str) -> Self {
        ActorId(s.to_owned())
    }
}

/// One layer name per dimension, in dimension order. Length always equals
/// the schema's dimension count at the time of use.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LayerCoordinate(Vec<String>);

impl LayerCoordinate {
    pub fn new(layers: Vec<String>) -> Self {
        LayerCoordinate(layers)
    }

    /// Coordinate for a network with no dimensions.
    pub fn empty() -> Self {
        LayerCoordinate(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, index: usize) -> Option<&str> {
        self.0.get(index).map(String::as_str)
    }

    pub fn positions(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Copy with position `index` replaced by `layer`.
    pub fn with_position(&self, index: usize, layer: &str) -> Self {
        let mut coords = self.0.clone();
        coords[index] = layer.to_owned();
        LayerCoordinate(coords)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for LayerCoordinate {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        LayerCoordinate(iter.into_iter().map(Into::into).collect())
    }
}

/// Convenience for test and call sites: `coord(["fb", "t0"])`.
pub fn coord<'a>(layers: impl IntoIterator<Item = &'a str>) -> LayerCoordinate {
    layers.into_iter().collect()
}

/// An actor's presence at one layer coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeLayer {
    pub actor: ActorId,
    pub coord: LayerCoordinate,
}

impl NodeLayer {
    pub fn new(actor: impl Into<String>, coord: LayerCoordinate) -> Self {
        NodeLayer {
            actor: ActorId::new(actor),
            coord,
        }
    }
}

/// Attribute value attached to a node-layer or edge.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Number(f64),
    Text(String),
}

impl AttributeValue {
    /// Total order used wherever attribute values must sort deterministically:
    /// numbers before text, numbers by IEEE total order, text bytewise.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use AttributeValue::*;
        match (self, other) {
            (Number(a), Number(b)) => a.total_cmp(b),
            (Number(_), Text(_)) => std::cmp::Ordering::Less,
            (Text(_), Number(_)) => std::cmp::Ordering::Greater,
            (Text(a), Text(b)) => a.cmp(b),
        }
    }
}

impl From<f64> for AttributeValue {
    fn from(v: f64) -> Self {
        AttributeValue::Number(v)
    }
}

impl From<&str> for AttributeValue {
    fn from(v: &str) -> Self {
        AttributeValue::Text(v.to_owned())
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Number(n) => write!(f, "{n}"),
            AttributeValue::Text(s) => f.write_str(s),
        }
    }
}

/// Sorted attribute map; key order makes serializations deterministic.
pub type AttributeMap = BTreeMap<String, AttributeValue>;

/// Undirected edge between two node-layers, with attributes.
///
/// Endpoints are held in normalized order (smaller node-layer first) so two
/// edges over the same pair compare equal regardless of insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeLayer,
    pub b: NodeLayer,
    pub attributes: AttributeMap,
}

impl Edge {
    pub fn new(x: NodeLayer, y: NodeLayer, attributes: AttributeMap) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Edge { a, b, attributes }
    }

    /// True when both endpoints share the full layer coordinate.
    pub fn is_intralayer(&self) -> bool {
        self.a.coord == self.b.coord
    }
}

/// One dimension of the layer schema: a name and its elementary layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimension {
    pub name: String,
    /// Live layer names in creation order.
    pub layers: Vec<String>,
}

/// Ordered dimension list; position in the list is the coordinate position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DimensionSchema {
    pub dimensions: Vec<Dimension>,
}

impl DimensionSchema {
    /// Number of dimensions d (coordinate arity).
    pub fn arity(&self) -> usize {
        self.dimensions.len()
    }

    pub fn dimension_index(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn has_layer(&self, dimension: &str, layer: &str) -> bool {
        self.dimension_index(dimension)
            .map(|i| self.dimensions[i].layers.iter().any(|l| l == layer))
            .unwrap_or(false)
    }
}

/// A (dimension, layer) pair naming one elementary layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayerRef {
    pub dimension: String,
    pub layer: String,
}

impl LayerRef {
    pub fn new(dimension: impl Into<String>, layer: impl Into<String>) -> Self {
        LayerRef {
            dimension: dimension.into(),
            layer: layer.into(),
        }
    }
}

impl fmt::Display for LayerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.dimension, self.layer)
    }
}
