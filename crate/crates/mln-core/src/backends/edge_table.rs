//! Relational edge-table backend.
//!
//! State lives in append-style row tables (node-layers, edges) plus hash
//! indexes for point lookups. Deletion tombstones rows; once more than half
//! of a table is dead it is compacted in place and the indexes are rebuilt.
//! There are no adjacency lists: neighbor queries scan the edge table, which
//! is the honest relational cost model this backend exists to exhibit.

use std::collections::{HashMap, HashSet};

use crate::error::{Result, StoreError};
use crate::model::{
    ActorId, AttributeMap, AttributeValue, DimensionSchema, Edge, LayerCoordinate, LayerRef,
    NodeLayer,
};
use crate::store::{require_key, require_name, LayerContents, MultilayerStore, SchemaCore};

struct NodeRow {
    actor: u32,
    coord: Vec<u32>,
    attrs: AttributeMap,
    alive: bool,
}

struct EdgeRow {
    // node row ids, src < dst
    src: u32,
    dst: u32,
    attrs: AttributeMap,
    alive: bool,
}

#[derive(Default)]
pub struct EdgeTableBackend {
    schema: SchemaCore,
    actor_names: Vec<String>,
    actor_index: HashMap<String, u32>,
    node_rows: Vec<NodeRow>,
    edge_rows: Vec<EdgeRow>,
    node_index: HashMap<(u32, Vec<u32>), u32>,
    edge_index: HashMap<(u32, u32), u32>,
    live_nodes: usize,
    live_edges: usize,
}

impl EdgeTableBackend {
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

    fn find_edge(&self, si: u32, di: u32) -> Option<u32> {
        self.edge_index.get(&norm(si, di)).copied()
    }

    fn node_layer(&self, row: u32) -> NodeLayer {
        let r = &self.node_rows[row as usize];
        NodeLayer {
            actor: ActorId::new(self.actor_names[r.actor as usize].clone()),
            coord: self.schema.externalize(&r.coord),
        }
    }

    fn edge_at(&self, row: u32) -> Edge {
        let r = &self.edge_rows[row as usize];
        Edge::new(
            self.node_layer(r.src),
            self.node_layer(r.dst),
            r.attrs.clone(),
        )
    }

    fn tombstone_node(&mut self, row: u32) {
        let r = &mut self.node_rows[row as usize];
        r.alive = false;
        r.attrs = AttributeMap::new();
        let key = (r.actor, r.coord.clone());
        self.node_index.remove(&key);
        self.live_nodes -= 1;
    }

    fn tombstone_edge(&mut self, row: u32) {
        let r = &mut self.edge_rows[row as usize];
        r.alive = false;
        r.attrs = AttributeMap::new();
        let key = (r.src, r.dst);
        self.edge_index.remove(&key);
        self.live_edges -= 1;
    }

    /// Tombstones every live edge incident to a node in `rows`.
    fn drop_edges_touching(&mut self, rows: &HashSet<u32>) {
        let hit: Vec<u32> = self
            .edge_rows
            .iter()
            .enumerate()
            .filter(|(_, e)| e.alive && (rows.contains(&e.src) || rows.contains(&e.dst)))
            .map(|(i, _)| i as u32)
            .collect();
        for row in hit {
            self.tombstone_edge(row);
        }
    }

    fn rebuild_node_index(&mut self) {
        self.node_index = self
            .node_rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive)
            .map(|(i, r)| ((r.actor, r.coord.clone()), i as u32))
            .collect();
    }

    fn rebuild_edge_index(&mut self) {
        self.edge_index = self
            .edge_rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive)
            .map(|(i, r)| ((r.src, r.dst), i as u32))
            .collect();
    }

    /// Compacts whichever tables are more than half dead. Node compaction
    /// rewrites edge endpoints through an old-id -> new-id map; compaction
    /// preserves row order, so the src < dst normalization survives.
    fn maybe_compact(&mut self) {
        if self.node_rows.len() - self.live_nodes > self.live_nodes {
            let mut remap = vec![u32::MAX; self.node_rows.len()];
            let mut live = Vec::with_capacity(self.live_nodes);
            for (i, row) in self.node_rows.drain(..).enumerate() {
                if row.alive {
                    remap[i] = live.len() as u32;
                    live.push(row);
                }
            }
            self.node_rows = live;
            for e in self.edge_rows.iter_mut().filter(|e| e.alive) {
                e.src = remap[e.src as usize];
                e.dst = remap[e.dst as usize];
            }
            self.rebuild_node_index();
            self.rebuild_edge_index();
        }
        if self.edge_rows.len() - self.live_edges > self.live_edges {
            self.edge_rows.retain(|e| e.alive);
            self.rebuild_edge_index();
        }
    }
}

fn norm(i: u32, j: u32) -> (u32, u32) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl MultilayerStore for EdgeTableBackend {
    fn backend_name(&self) -> &'static str {
        "edge-table"
    }

    fn create_dimension(&mut self, name: &str, default_layer: &str) -> Result<usize> {
        let (pos, slot) = self.schema.create_dimension(name, default_layer)?;
        for row in self.node_rows.iter_mut().filter(|r| r.alive) {
            row.coord.push(slot);
        }
        self.rebuild_node_index();
        Ok(pos)
    }

    fn delete_dimension(&mut self, name: &str) -> Result<()> {
        let pos = self.schema.delete_dimension(name)?;
        for row in self.node_rows.iter_mut().filter(|r| r.alive) {
            row.coord.remove(pos);
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
            .node_rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive && r.coord[pos] == slot)
            .map(|(i, _)| i as u32)
            .collect();
        let dying_set: HashSet<u32> = dying.iter().copied().collect();
        self.drop_edges_touching(&dying_set);
        for row in dying {
            self.tombstone_node(row);
        }
        self.maybe_compact();
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
        let row = self.node_rows.len() as u32;
        self.node_rows.push(NodeRow {
            actor: key.0,
            coord: key.1.clone(),
            attrs: AttributeMap::new(),
            alive: true,
        });
        self.node_index.insert(key, row);
        self.live_nodes += 1;
        Ok(self.node_layer(row))
    }

    fn remove_node(&mut self, actor: &str, coord: &LayerCoordinate) -> Result<()> {
        let row = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        let mut dying = HashSet::new();
        dying.insert(row);
        self.drop_edges_touching(&dying);
        self.tombstone_node(row);
        self.maybe_compact();
        Ok(())
    }

    fn update_node(
        &mut self,
        actor: &str,
        coord: &LayerCoordinate,
        key: &str,
        value: AttributeValue,
    ) -> Result<()> {
        let row = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        require_key(key)?;
        self.node_rows[row as usize]
            .attrs
            .insert(key.to_owned(), value);
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
        if self.find_edge(si, di).is_some() {
            return Err(StoreError::DuplicateEdge);
        }
        let (a, b) = norm(si, di);
        let row = self.edge_rows.len() as u32;
        self.edge_rows.push(EdgeRow {
            src: a,
            dst: b,
            attrs: AttributeMap::new(),
            alive: true,
        });
        self.edge_index.insert((a, b), row);
        self.live_edges += 1;
        Ok(self.edge_at(row))
    }

    fn remove_edge(
        &mut self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<()> {
        let row = match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) => self.find_edge(a, b).ok_or(StoreError::UnknownEdge)?,
            _ => return Err(StoreError::UnknownEdge),
        };
        self.tombstone_edge(row);
        self.maybe_compact();
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
        let row = match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) => self.find_edge(a, b).ok_or(StoreError::UnknownEdge)?,
            _ => return Err(StoreError::UnknownEdge),
        };
        require_key(key)?;
        self.edge_rows[row as usize]
            .attrs
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
            self.node_rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.alive)
                .map(|(i, _)| self.node_layer(i as u32)),
        )
    }

    fn edges(&self) -> Box<dyn Iterator<Item = Edge> + '_> {
        Box::new(
            self.edge_rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.alive)
                .map(|(i, _)| self.edge_at(i as u32)),
        )
    }

    fn node_attributes(&self, actor: &str, coord: &LayerCoordinate) -> Result<AttributeMap> {
        let row = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        Ok(self.node_rows[row as usize].attrs.clone())
    }

    fn edge_attributes(
        &self,
        src: &str,
        src_coord: &LayerCoordinate,
        dst: &str,
        dst_coord: &LayerCoordinate,
    ) -> Result<AttributeMap> {
        match (self.find_node(src, src_coord), self.find_node(dst, dst_coord)) {
            (Some(a), Some(b)) => {
                let row = self.find_edge(a, b).ok_or(StoreError::UnknownEdge)?;
                Ok(self.edge_rows[row as usize].attrs.clone())
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
            (Some(a), Some(b)) => self.find_edge(a, b).is_some(),
            _ => false,
        }
    }

    fn neighbors(
        &self,
        actor: &str,
        coord: &LayerCoordinate,
    ) -> Result<Box<dyn Iterator<Item = NodeLayer> + '_>> {
        let row = self
            .find_node(actor, coord)
            .ok_or_else(|| StoreError::UnknownNode {
                actor: actor.to_owned(),
            })?;
        // deliberate full scan: the relational layout keeps no adjacency lists
        Ok(Box::new(self.edge_rows.iter().filter_map(move |e| {
            if !e.alive {
                None
            } else if e.src == row {
                Some(self.node_layer(e.dst))
            } else if e.dst == row {
                Some(self.node_layer(e.src))
            } else {
                None
            }
        })))
    }

    fn layer_contents(&self, dimension: &str, layer: &str) -> Result<LayerContents> {
        let (pos, slot) = self.schema.resolve_layer(dimension, layer)?;
        let members: Vec<u32> = self
            .node_rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive && r.coord[pos] == slot)
            .map(|(i, _)| i as u32)
            .collect();
        let member_set: HashSet<u32> = members.iter().copied().collect();
        let nodes: Vec<NodeLayer> = members.iter().map(|&i| self.node_layer(i)).collect();
        let edges: Vec<Edge> = self
            .edge_rows
            .iter()
            .enumerate()
            .filter(|(_, e)| e.alive && member_set.contains(&e.src) && member_set.contains(&e.dst))
            .map(|(i, _)| self.edge_at(i as u32))
            .collect();
        Ok(LayerContents {
            node_count: nodes.len(),
            edge_count: edges.len(),
            nodes,
            edges,
        })
    }
}
