//! The storage contract every backend implements, plus the schema bookkeeping
//! shared by the dictionary and matrix backends.

use std::collections::HashMap;

use crate::error::{Result, StoreError};
use crate::model::{
    ActorId, AttributeMap, AttributeValue, DimensionSchema, Edge, LayerCoordinate, LayerRef,
    NodeLayer,
};

/// Bulk view of one elementary layer: the node-layers whose coordinate uses
/// the layer in its dimension, and the edges with both endpoints in that set.
pub struct LayerContents {
    pub node_count: usize,
    pub edge_count: usize,
    pub nodes: Vec<NodeLayer>,
    pub edges: Vec<Edge>,
}

/// Storage contract for a multilayer network.
///
/// Implementations keep the quadruple consistent: every edge endpoint is a
/// live node-layer and every node-layer's actor is registered. Mutations come
/// from one logical thread at a time; reads may run concurrently between
/// mutations, so read methods take `&self` and never write behind the scenes.
pub trait MultilayerStore: Send + Sync {
    fn backend_name(&self) -> &'static str;

    // ---- layer definition ----

    /// Adds a dimension; every existing node-layer's coordinate is extended
    /// with `default_layer` in the new position. Returns the new position.
    fn create_dimension(&mut self, name: &str, default_layer: &str) -> Result<usize>;

    /// Removes a dimension that holds exactly one layer; coordinates shrink
    /// by dropping that position.
    fn delete_dimension(&mut self, name: &str) -> Result<()>;

    fn create_layer(&mut self, dimension: &str, layer: &str) -> Result<LayerRef>;

    /// Removes a layer, cascading to its node-layers and their edges.
    fn delete_layer(&mut self, dimension: &str, layer: &str) -> Result<()>;

    // ---- data manipulation ----

    /// Registers an actor without placing it in any layer. Idempotent.
    fn add_actor(&mut self, name: &str) -> Result<()>;

    fn add_node(&mut self, actor: &str, coord: &LayerCoordinate) -> Result<NodeLayer>;

    /// Removes a node-layer and its incident edges. The actor stays
    /// registered even when no node-layers remain for it.
    fn remove_node(&mut self, actor: &str, coord: &LayerCoordinate) -> Result<()>;

    fn update_node(
        &mut self,
        actor: &str,
        coord: &LayerCoordinate,
        key: &str,
        value: AttributeValue,
    ) -> Result<()>;

    fn add_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<Edge>;

    fn remove_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<()>;

    fn update_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
        key: &str,
        value: AttributeValue,
    ) -> Result<()>;

    // ---- reads ----

    fn schema(&self) -> DimensionSchema;
    fn actor_count(&self) -> usize;
    fn node_count(&self) -> usize;
    fn edge_count(&self) -> usize;

    fn actors(&self) -> Box<dyn Iterator<Item = ActorId> + '_>;
    fn node_layers(&self) -> Box<dyn Iterator<Item = NodeLayer> + '_>;
    fn edges(&self) -> Box<dyn Iterator<Item = Edge> + '_>;

    fn node_attributes(&self, actor: &str, coord: &LayerCoordinate) -> Result<AttributeMap>;

    fn edge_attributes(
        &self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<AttributeMap>;

    /// Endpoint order does not matter. Unknown endpoints yield `false`.
    fn edge_exists(
        &self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> bool;

    /// Every node-layer sharing an edge with the query node, once each,
    /// in unspecified order.
    fn neighbors(
        &self,
        actor: &str,
        coord: &LayerCoordinate,
    ) -> Result<Box<dyn Iterator<Item = NodeLayer> + '_>>;

    fn layer_contents(&self, dimension: &str, layer: &str) -> Result<LayerContents>;

    // ---- maintenance ----

    /// Merges any pending write buffer into the primary structure. Reads are
    /// unaffected; backends without a buffer do nothing.
    fn consolidate(&mut self) {}

    fn is_empty(&self) -> bool {
        self.schema().dimensions.is_empty()
            && self.actor_count() == 0
            && self.node_count() == 0
            && self.edge_count() == 0
    }
}

pub(crate) fn require_name(name: &str) -> Result<()> {
    if name.is_empty() {
        Err(StoreError::EmptyName)
    } else {
        Ok(())
    }
}

pub(crate) fn require_key(key: &str) -> Result<()> {
    if key.is_empty() {
        Err(StoreError::EmptyKey)
    } else {
        Ok(())
    }
}

struct LayerSlot {
    name: String,
    alive: bool,
}

struct DimEntry {
    name: String,
    // slot ids are indices into `slots` and are never reused
    slots: Vec<LayerSlot>,
    by_name: HashMap<String, u32>,
    live: usize,
}

/// Dimension and layer bookkeeping: names to stable slot ids and back.
/// Internal coordinates are one slot id per dimension position.
#[derive(Default)]
pub(crate) struct SchemaCore {
    dims: Vec<DimEntry>,
}

impl SchemaCore {
    fn dim_position(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn create_dimension(&mut self, name: &str, default_layer: &str) -> Result<(usize, u32)> {
        require_name(name)?;
        require_name(default_layer)?;
        if self.dim_position(name).is_some() {
            return Err(StoreError::DuplicateDimension(name.to_owned()));
        }
        let mut by_name = HashMap::new();
        by_name.insert(default_layer.to_owned(), 0u32);
        self.dims.push(DimEntry {
            name: name.to_owned(),
            slots: vec![LayerSlot {
                name: default_layer.to_owned(),
                alive: true,
            }],
            by_name,
            live: 1,
        });
        Ok((self.dims.len() - 1, 0))
    }

    pub fn delete_dimension(&mut self, name: &str) -> Result<usize> {
        let pos = self
            .dim_position(name)
            .ok_or_else(|| StoreError::UnknownDimension(name.to_owned()))?;
        if self.dims[pos].live != 1 {
            return Err(StoreError::DimensionNotSingleton(name.to_owned()));
        }
        self.dims.remove(pos);
        Ok(pos)
    }

    pub fn create_layer(&mut self, dimension: &str, layer: &str) -> Result<(usize, u32)> {
        require_name(layer)?;
        let pos = self
            .dim_position(dimension)
            .ok_or_else(|| StoreError::UnknownDimension(dimension.to_owned()))?;
        let dim = &mut self.dims[pos];
        if dim.by_name.contains_key(layer) {
            return Err(StoreError::DuplicateLayer {
                dimension: dimension.to_owned(),
                layer: layer.to_owned(),
            });
        }
        let slot = dim.slots.len() as u32;
        dim.slots.push(LayerSlot {
            name: layer.to_owned(),
            alive: true,
        });
        dim.by_name.insert(layer.to_owned(), slot);
        dim.live += 1;
        Ok((pos, slot))
    }

    /// Marks the layer dead; the caller cascades node-layer removal.
    pub fn delete_layer(&mut self, dimension: &str, layer: &str) -> Result<(usize, u32)> {
        let (pos, slot) = self.resolve_layer(dimension, layer)?;
        let dim = &mut self.dims[pos];
        if dim.live == 1 {
            return Err(StoreError::LastLayerInDimension {
                dimension: dimension.to_owned(),
                layer: layer.to_owned(),
            });
        }
        dim.slots[slot as usize].alive = false;
        dim.by_name.remove(layer);
        dim.live -= 1;
        Ok((pos, slot))
    }

    pub fn resolve_layer(&self, dimension: &str, layer: &str) -> Result<(usize, u32)> {
        let pos = self
            .dim_position(dimension)
            .ok_or_else(|| StoreError::UnknownDimension(dimension.to_owned()))?;
        let slot = self.dims[pos]
            .by_name
            .get(layer)
            .copied()
            .ok_or_else(|| StoreError::UnknownLayer {
                dimension: dimension.to_owned(),
                layer: layer.to_owned(),
            })?;
        Ok((pos, slot))
    }

    /// Translates an external coordinate to slot ids.
    pub fn resolve_coord(&self, coord: &LayerCoordinate) -> Result<Vec<u32>> {
        if coord.len() != self.dims.len() {
            return Err(StoreError::InvalidCoordinate(format!(
                "expected {} positions, got {}",
                self.dims.len(),
                coord.len()
            )));
        }
        let mut slots = Vec::with_capacity(coord.len());
        for (i, layer) in coord.positions().enumerate() {
            match self.dims[i].by_name.get(layer) {
                Some(&slot) => slots.push(slot),
                None => {
                    return Err(StoreError::InvalidCoordinate(format!(
                        "no layer `{layer}` in dimension `{}`",
                        self.dims[i].name
                    )))
                }
            }
        }
        Ok(slots)
    }

    pub fn externalize(&self, slots: &[u32]) -> LayerCoordinate {
        slots
            .iter()
            .enumerate()
            .map(|(i, &s)| self.dims[i].slots[s as usize].name.as_str())
            .collect()
    }

    pub fn schema(&self) -> DimensionSchema {
        DimensionSchema {
            dimensions: self
                .dims
                .iter()
                .map(|d| crate::model::Dimension {
                    name: d.name.clone(),
                    layers: d
                        .slots
                        .iter()
                        .filter(|s| s.alive)
                        .map(|s| s.name.clone())
                        .collect(),
                })
                .collect(),
        }
    }
}
