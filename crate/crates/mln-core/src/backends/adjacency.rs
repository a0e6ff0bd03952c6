//! Dictionary-based adjacency-list backend.
//!
//! Node-layers get dense indices; each index owns a hash set of neighbor
//! indices, so edge lookups are O(1) and neighbor scans O(1 + degree).

use std::collections::{HashMap, HashSet};

use crate::error::{Result, StoreError};
use crate::model::{
    ActorId, AttributeMap, AttributeValue, DimensionSchema, Edge, LayerCoordinate, LayerRef,
    NodeLayer,
};
use crate::store::{require_key, require_name, LayerContents, MultilayerStore, SchemaCore};

struct NodeSlot {
    actor: u32,
    coord: Vec<u32>,
    alive: bool,
    attrs: AttributeMap,
}

#[derive(Default)]
pub struct AdjacencyBackend {
    schema: SchemaCore,
    actor_names: Vec<String>,
    actor_index: HashMap<String, u32>,
    nodes: Vec<NodeSlot>,
    // (actor id, coordinate slots) -> node index; live nodes only
    node_index: HashMap<(u32, Vec<u32>), u32>,
    adj: Vec<HashSet<u32>>,
    // normalized (min, max) node-index pair; present only for attributed edges
    edge_attrs: HashMap<(u32, u32), AttributeMap>,
    live_nodes: usize,
    live_edges: usize,
}

impl AdjacencyBackend {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern_actor(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.actor_index.get(name) {
            return id;
        }
        let id = self.actor_names.len() as u32;
        self.actor_names.push(name.to_owned());
        self.actor_index.insert(name.to_owned(), id);
        id
    }

    fn find_node(&self, actor: &str, coord: &LayerCoordinate) -> Option<u32> {
        let aid = *self.actor_index.get(actor)?;
        let slots = self.schema.resolve_coord(coord).ok()?;
        self.node_index.get(&(aid, slots)).copied()
    }

    fn node_layer(&self, idx: u32) -> NodeLayer {
        let slot = &self.nodes[idx as usize];
        NodeLayer {
            actor: ActorId::new(self.actor_names[slot.actor as usize].clone()),
            coord: self.schema.externalize(&slot.coord),
        }
    }

    fn make_edge(&self, i: u32, j: u32) -> Edge {
        let attrs = self
            .edge_attrs
            .get(&norm(i, j))
            .cloned()
            .unwrap_or_default();
        Edge::new(self.node_layer(i), self.node_layer(j), attrs)
    }

    /// Unlinks every edge incident to `idx`, counting each once.
    fn drop_incident_edges(&mut self, idx: u32) {
        let neighbors = std::mem::take(&mut self.adj[idx as usize]);
        for j in neighbors {
            if self.adj[j as usize].remove(&idx) {
                self.edge_attrs.remove(&norm(idx, j));
                self.live_edges -= 1;
            }
        }
    }

    fn tombstone_node(&mut self, idx: u32) {
        let slot = &mut self.nodes[idx as usize];
        slot.alive = false;
        slot.attrs = AttributeMap::new();
        let key = (slot.actor, slot.coord.clone());
        self.node_index.remove(&key);
        self.live_nodes -= 1;
    }

    fn rebuild_node_index(&mut self) {
        self.node_index = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.alive)
            .map(|(i, n)| ((n.actor, n.coord.clone()), i as u32))
            .collect();
    }
}

fn norm(i: u32, j: u32) -> (u32, u32) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl MultilayerStore for AdjacencyBackend {
    fn backend_name(&self) -> &'static str {
        "adjacency"
    }

    fn create_dimension(&mut self, name: &str, default_layer: &str) -> Result<usize> {
        let (pos, slot) = self.schema.create_dimension(name, default_layer)?;
        for node in self.nodes.iter_mut().filter(|n| n.alive) {
            node.coord.push(slot);
        }
        self.rebuild_node_index();
        Ok(pos)
    }

    fn delete_dimension(&mut self, name: &str) -> Result<()> {
        let pos = self.schema.delete_dimension(name)?;
        for node in self.nodes.iter_mut().filter(|n| n.alive) {
            node.coord.remove(pos);
        }
        self.rebuild_node_index();
        Ok(())
    }

    fn create_layer(&mut self, dimension: &str, layer: &str) -> Result<LayerRef> {
        self.schema.create_layer(dimension, layer)?;
        Ok(LayerRef::new(dimension, layer))
    }

    fn delete_layer(&mut self, dimension: &str, layer: &str) -> Result<()> {
        let (pos, slot) = self.schema.delete_layer(dimension, layer)?;
        let dying: Vec<u32> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.alive && n.coord[pos] == slot)
            .map(|(i, _)| i as u32)
            .collect();
        for idx in dying {
            self.drop_incident_edges(idx);
            self.tombstone_node(idx);
        }
        Ok(())
    }

    fn add_actor(&mut self, name: &str) -> Result<()> {
        require_name(name)?;
        self.intern_actor(name);
        Ok(())
    }

    fn add_node(&mut self, actor: &str, coord: &LayerCoordinate) -> Result<NodeLayer> {
        require_name(actor)?;
        let slots = self.schema.resolve_coord(coord)?;
        let aid = self.intern_actor(actor);
        let key = (aid, slots);
        if self.node_index.contains_key(&key) {
            return Err(StoreError::DuplicateNode {
                actor: actor.to_owned(),
            });
        }
        let idx = self.nodes.len() as u32;
        self.nodes.push(NodeSlot {
            actor: key.0,
            coord: key.1.clone(),
            alive: true,
            attrs: AttributeMap::new(),
        });
        self.adj.push(HashSet::new());
        self.node_index.insert(key, idx);
        self.live_nodes += 1;
        Ok(self.node_layer(idx))
    }

    fn remove_node(&mut self, actor: &str, coord: &LayerCoordinate) -> Result<()> {
        let idx = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        self.drop_incident_edges(idx);
        self.tombstone_node(idx);
        Ok(())
    }

    fn update_node(
        &mut self,
        actor: &str,
        coord: &LayerCoordinate,
        key: &str,
        value: AttributeValue,
    ) -> Result<()> {
        let idx = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        require_key(key)?;
        self.nodes[idx as usize].attrs.insert(key.to_owned(), value);
        Ok(())
    }

    fn add_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<Edge> {
        let si = self
            .find_node(src, src_coord)
            .ok_or_else(|| StoreError::UnknownEndpoint {
                actor: src.to_owned(),
            })?;
        let di = self
            .find_node(dst, dst_coord)
            .ok_or_else(|| StoreError::UnknownEndpoint {
                actor: dst.to_owned(),
            })?;
        if si == di {
            return Err(StoreError::SelfLoop);
        }
        if self.adj[si as usize].contains(&di) {
            return Err(StoreError::DuplicateEdge);
        }
        self.adj[si as usize].insert(di);
        self.adj[di as usize].insert(si);
        self.live_edges += 1;
        Ok(Edge::new(
            self.node_layer(si),
            self.node_layer(di),
            AttributeMap::new(),
        ))
    }

    fn remove_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<()> {
        let (si, di) = match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) if self.adj[a as usize].contains(&b) => (a, b),
            _ => return Err(StoreError::UnknownEdge),
        };
        self.adj[si as usize].remove(&di);
        self.adj[di as usize].remove(&si);
        self.edge_attrs.remove(&norm(si, di));
        self.live_edges -= 1;
        Ok(())
    }

    fn update_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
        key: &str,
        value: AttributeValue,
    ) -> Result<()> {
        let (si, di) = match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) if self.adj[a as usize].contains(&b) => (a, b),
            _ => return Err(StoreError::UnknownEdge),
        };
        require_key(key)?;
        self.edge_attrs
            .entry(norm(si, di))
            .or_default()
            .insert(key.to_owned(), value);
        Ok(())
    }

    fn schema(&self) -> DimensionSchema {
        self.schema.schema()
    }

    fn actor_count(&self) -> usize {
        self.actor_names.len()
    }

    fn node_count(&self) -> usize {
        self.live_nodes
    }

    fn edge_count(&self) -> usize {
        self.live_edges
    }

    fn actors(&self) -> Box<dyn Iterator<Item = ActorId> + '_> {
        Box::new(self.actor_names.iter().map(|n| ActorId::new(n.clone())))
    }

    fn node_layers(&self) -> Box<dyn Iterator<Item = NodeLayer> + '_> {
        Box::new(
            self.nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.alive)
                .map(|(i, _)| self.node_layer(i as u32)),
        )
    }

    fn edges(&self) -> Box<dyn Iterator<Item = Edge> + '_> {
        Box::new(
            self.nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.alive)
                .flat_map(move |(i, _)| {
                    self.adj[i]
                        .iter()
                        .filter(move |&&j| (j as usize) > i)
                        .map(move |&j| self.make_edge(i as u32, j))
                }),
        )
    }

    fn node_attributes(&self, actor: &str, coord: &LayerCoordinate) -> Result<AttributeMap> {
        let idx = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        Ok(self.nodes[idx as usize].attrs.clone())
    }

    fn edge_attributes(
        &self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<AttributeMap> {
        match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) if self.adj[a as usize].contains(&b) => {
                Ok(self.edge_attrs.get(&norm(a, b)).cloned().unwrap_or_default())
            }
            _ => Err(StoreError::UnknownEdge),
        }
    }

    fn edge_exists(
        &self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> bool {
        match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) => self.adj[a as usize].contains(&b),
            _ => false,
        }
    }

    fn neighbors(
        &self,
        actor: &str,
        coord: &LayerCoordinate,
    ) -> Result<Box<dyn Iterator<Item = NodeLayer> + '_>> {
        let idx = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        Ok(Box::new(
            self.adj[idx as usize].iter().map(|&j| self.node_layer(j)),
        ))
    }

    fn layer_contents(&self, dimension: &str, layer: &str) -> Result<LayerContents> {
        let (pos, slot) = self.schema.resolve_layer(dimension, layer)?;
        let members: Vec<u32> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.alive && n.coord[pos] == slot)
            .map(|(i, _)| i as u32)
            .collect();
        let member_set: HashSet<u32> = members.iter().copied().collect();
        let nodes: Vec<NodeLayer> = members.iter().map(|&i| self.node_layer(i)).collect();
        let mut edges = Vec::new();
        for &i in &members {
            for &j in &self.adj[i as usize] {
                if j > i && member_set.contains(&j) {
                    edges.push(self.make_edge(i, j));
                }
            }
        }
        Ok(LayerContents {
            node_count: nodes.len(),
            edge_count: edges.len(),
            nodes,
            edges,
        })
    }
}
