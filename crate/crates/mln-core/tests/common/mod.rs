//! Shared test support: an independent reference implementation of the
//! store contract, a canonical renderer written directly against the format
//! rules, and seeded random operation logs to replay against every backend.
//!
//! `RefNet` deliberately shares no code with the crate under test — plain
//! `BTreeMap`s keyed by names, with every rule (error precedence, cascades,
//! coordinate checks) restated from the contract. When a backend and `RefNet`
//! agree on a few thousand random logs, byte for byte, a shared bug would
//! have to be implemented twice independently.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use mln_core::{
    AttributeValue, LayerCoordinate, MultilayerStore, StoreError,
};

// ---- reference network ----

#[derive(Debug, Clone, PartialEq)]
pub enum RefValue {
    Num(f64),
    Text(String),
}

impl RefValue {
    pub fn to_attribute(&self) -> AttributeValue {
        match self {
            RefValue::Num(n) => AttributeValue::Number(*n),
            RefValue::Text(t) => AttributeValue::Text(t.clone()),
        }
    }
}

type NodeKey = (String, Vec<String>);
type Attrs = BTreeMap<String, RefValue>;

#[derive(Debug, Clone)]
pub struct RefDim {
    pub name: String,
    /// Live layers in creation order.
    pub layers: Vec<String>,
}

/// Reference implementation: every mutation returns `Err(kind)` with the
/// same error kind string the store contract specifies, or applies the
/// same state change.
#[derive(Debug, Clone, Default)]
pub struct RefNet {
    pub dims: Vec<RefDim>,
    pub actors: std::collections::BTreeSet<String>,
    pub nodes: BTreeMap<NodeKey, Attrs>,
    pub edges: BTreeMap<(NodeKey, NodeKey), Attrs>,
}

type RefResult = Result<(), &'static str>;

impl RefNet {
    fn dim_index(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    fn coord_valid(&self, coord: &[String]) -> bool {
        coord.len() == self.dims.len()
            && coord
                .iter()
                .zip(&self.dims)
                .all(|(pos, dim)| dim.layers.iter().any(|l| l == pos))
    }

    fn node_key(&self, actor: &str, coord: &[String]) -> Option<NodeKey> {
        let key = (actor.to_owned(), coord.to_vec());
        (self.coord_valid(coord) && self.nodes.contains_key(&key)).then_some(key)
    }

    fn edge_key(a: NodeKey, b: NodeKey) -> (NodeKey, NodeKey) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn drop_edges_touching(&mut self, dead: &dyn Fn(&NodeKey) -> bool) {
        self.edges.retain(|(a, b), _| !dead(a) && !dead(b));
    }

    pub fn create_dimension(&mut self, name: &str, default_layer: &str) -> RefResult {
        if name.is_empty() || default_layer.is_empty() {
            return Err("EmptyName");
        }
        if self.dim_index(name).is_some() {
            return Err("DuplicateDimension");
        }
        self.dims.push(RefDim {
            name: name.to_owned(),
            layers: vec![default_layer.to_owned()],
        });
        // every existing node-layer gains the new position at the default layer
        self.nodes = std::mem::take(&mut self.nodes)
            .into_iter()
            .map(|((actor, mut coord), attrs)| {
                coord.push(default_layer.to_owned());
                ((actor, coord), attrs)
            })
            .collect();
        self.edges = std::mem::take(&mut self.edges)
            .into_iter()
            .map(|(((aa, mut ac), (ba, mut bc)), attrs)| {
                ac.push(default_layer.to_owned());
                bc.push(default_layer.to_owned());
                (((aa, ac), (ba, bc)), attrs)
            })
            .collect();
        Ok(())
    }

    pub fn delete_dimension(&mut self, name: &str) -> RefResult {
        let pos = self.dim_index(name).ok_or("UnknownDimension")?;
        if self.dims[pos].layers.len() != 1 {
            return Err("DimensionNotSingleton");
        }
        self.dims.remove(pos);
        self.nodes = std::mem::take(&mut self.nodes)
            .into_iter()
            .map(|((actor, mut coord), attrs)| {
                coord.remove(pos);
                ((actor, coord), attrs)
            })
            .collect();
        self.edges = std::mem::take(&mut self.edges)
            .into_iter()
            .map(|(((aa, mut ac), (ba, mut bc)), attrs)| {
                ac.remove(pos);
                bc.remove(pos);
                (((aa, ac), (ba, bc)), attrs)
            })
            .collect();
        Ok(())
    }

    pub fn create_layer(&mut self, dimension: &str, layer: &str) -> RefResult {
        if layer.is_empty() {
            return Err("EmptyName");
        }
        let pos = self.dim_index(dimension).ok_or("UnknownDimension")?;
        if self.dims[pos].layers.iter().any(|l| l == layer) {
            return Err("DuplicateLayer");
        }
        self.dims[pos].layers.push(layer.to_owned());
        Ok(())
    }

    pub fn delete_layer(&mut self, dimension: &str, layer: &str) -> RefResult {
        let pos = self.dim_index(dimension).ok_or("UnknownDimension")?;
        let at = self.dims[pos]
            .layers
            .iter()
            .position(|l| l == layer)
            .ok_or("UnknownLayer")?;
        if self.dims[pos].layers.len() == 1 {
            return Err("LastLayerInDimension");
        }
        self.dims[pos].layers.remove(at);
        let doomed = layer.to_owned();
        self.nodes.retain(|(_, coord), _| coord[pos] != doomed);
        self.drop_edges_touching(&|k: &NodeKey| k.1[pos] == doomed);
        Ok(())
    }

    pub fn add_actor(&mut self, name: &str) -> RefResult {
        if name.is_empty() {
            return Err("EmptyName");
        }
        self.actors.insert(name.to_owned());
        Ok(())
    }

    pub fn add_node(&mut self, actor: &str, coord: &[String]) -> RefResult {
        if actor.is_empty() {
            return Err("EmptyName");
        }
        if !self.coord_valid(coord) {
            return Err("InvalidCoordinate");
        }
        let key = (actor.to_owned(), coord.to_vec());
        if self.nodes.contains_key(&key) {
            return Err("DuplicateNode");
        }
        self.actors.insert(actor.to_owned());
        self.nodes.insert(key, Attrs::new());
        Ok(())
    }

    pub fn remove_node(&mut self, actor: &str, coord: &[String]) -> RefResult {
        let key = self.node_key(actor, coord).ok_or("UnknownNode")?;
        self.nodes.remove(&key);
        self.drop_edges_touching(&|k: &NodeKey| *k == key);
        Ok(())
    }

    pub fn update_node(
        &mut self,
        actor: &str,
        coord: &[String],
        key: &str,
        value: RefValue,
    ) -> RefResult {
        let node = self.node_key(actor, coord).ok_or("UnknownNode")?;
        if key.is_empty() {
            return Err("EmptyKey");
        }
        self.nodes
            .get_mut(&node)
            .unwrap()
            .insert(key.to_owned(), value);
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        src: &str,
        src_coord: &[String],
        dst: &str,
        dst_coord: &[String],
    ) -> RefResult {
        let a = self.node_key(src, src_coord).ok_or("UnknownEndpoint")?;
        let b = self.node_key(dst, dst_coord).ok_or("UnknownEndpoint")?;
        if a == b {
            return Err("SelfLoop");
        }
        let key = Self::edge_key(a, b);
        if self.edges.contains_key(&key) {
            return Err("DuplicateEdge");
        }
        self.edges.insert(key, Attrs::new());
        Ok(())
    }

    fn existing_edge_key(
        &self,
        src: &str,
        src_coord: &[String],
        dst: &str,
        dst_coord: &[String],
    ) -> Option<(NodeKey, NodeKey)> {
        let a = self.node_key(src, src_coord)?;
        let b = self.node_key(dst, dst_coord)?;
        let key = Self::edge_key(a, b);
        self.edges.contains_key(&key).then_some(key)
    }

    pub fn remove_edge(
        &mut self,
        src: &str,
        src_coord: &[String],
        dst: &str,
        dst_coord: &[String],
    ) -> RefResult {
        let key = self
            .existing_edge_key(src, src_coord, dst, dst_coord)
            .ok_or("UnknownEdge")?;
        self.edges.remove(&key);
        Ok(())
    }

    pub fn update_edge(
        &mut self,
        src: &str,
        src_coord: &[String],
        dst: &str,
        dst_coord: &[String],
        key: &str,
        value: RefValue,
    ) -> RefResult {
        let edge = self
            .existing_edge_key(src, src_coord, dst, dst_coord)
            .ok_or("UnknownEdge")?;
        if key.is_empty() {
            return Err("EmptyKey");
        }
        self.edges
            .get_mut(&edge)
            .unwrap()
            .insert(key.to_owned(), value);
        Ok(())
    }

    /// Renders the canonical form from the reference state, restating the
    /// format rules: escaped space-joined fields, dimensions in creation
    /// order with raw-sorted layers, and escaped-line sorting elsewhere.
    pub fn canonical(&self) -> String {
        fn esc(s: &str) -> String {
            let mut out = String::new();
            for c in s.chars() {
                match c {
                    '\\' => out.push_str("\\\\"),
                    ' ' => out.push_str("\\s"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '=' => out.push_str("\\e"),
                    _ => out.push(c),
                }
            }
            out
        }
        fn attrs_text(attrs: &Attrs) -> String {
            let mut out = String::new();
            for (k, v) in attrs {
                out.push(' ');
                out.push_str(&esc(k));
                out.push('=');
                match v {
                    RefValue::Num(n) => out.push_str(&format!("n:{n}")),
                    RefValue::Text(t) => out.push_str(&format!("t:{}", esc(t))),
                }
            }
            out
        }
        fn endpoint_text(key: &NodeKey) -> String {
            let mut line = esc(&key.0);
            for pos in &key.1 {
                line.push(' ');
                line.push_str(&esc(pos));
            }
            line
        }

        let mut out = String::from("SCHEMA\n");
        for dim in &self.dims {
            let mut layers: Vec<&str> = dim.layers.iter().map(String::as_str).collect();
            layers.sort_unstable();
            out.push_str(&esc(&dim.name));
            for layer in layers {
                out.push(' ');
                out.push_str(&esc(layer));
            }
            out.push('\n');
        }

        out.push_str("ACTORS\n");
        let mut actors: Vec<String> = self.actors.iter().map(|a| esc(a)).collect();
        actors.sort_unstable();
        for a in actors {
            out.push_str(&a);
            out.push('\n');
        }

        out.push_str("NODES\n");
        let mut nodes: Vec<String> = self
            .nodes
            .iter()
            .map(|(key, attrs)| endpoint_text(key) + &attrs_text(attrs))
            .collect();
        nodes.sort_unstable();
        for n in nodes {
            out.push_str(&n);
            out.push('\n');
        }

        out.push_str("EDGES\n");
        let mut edges: Vec<String> = self
            .edges
            .iter()
            .map(|((a, b), attrs)| {
                format!("{} -- {}{}", endpoint_text(a), endpoint_text(b), attrs_text(attrs))
            })
            .collect();
        edges.sort_unstable();
        for e in edges {
            out.push_str(&e);
            out.push('\n');
        }
        out
    }
}

// ---- operation logs ----

#[derive(Debug, Clone)]
pub enum Op {
    CreateDimension { name: String, default_layer: String },
    DeleteDimension { name: String },
    CreateLayer { dimension: String, layer: String },
    DeleteLayer { dimension: String, layer: String },
    AddActor { name: String },
    AddNode { actor: String, coord: Vec<String> },
    RemoveNode { actor: String, coord: Vec<String> },
    UpdateNode { actor: String, coord: Vec<String>, key: String, value: RefValue },
    AddEdge { src: String, src_coord: Vec<String>, dst: String, dst_coord: Vec<String> },
    RemoveEdge { src: String, src_coord: Vec<String>, dst: String, dst_coord: Vec<String> },
    UpdateEdge {
        src: String,
        src_coord: Vec<String>,
        dst: String,
        dst_coord: Vec<String>,
        key: String,
        value: RefValue,
    },
}

pub fn error_kind<T>(result: Result<T, StoreError>) -> Option<&'static str> {
    result.err().map(|e| e.kind())
}

/// Applies one op to a store, returning the error kind if it failed.
pub fn apply_store(op: &Op, store: &mut dyn MultilayerStore) -> Option<&'static str> {
    let coord = |c: &[String]| LayerCoordinate::new(c.to_vec());
    match op {
        Op::CreateDimension { name, default_layer } => {
            error_kind(store.create_dimension(name, default_layer))
        }
        Op::DeleteDimension { name } => error_kind(store.delete_dimension(name)),
        Op::CreateLayer { dimension, layer } => error_kind(store.create_layer(dimension, layer)),
        Op::DeleteLayer { dimension, layer } => error_kind(store.delete_layer(dimension, layer)),
        Op::AddActor { name } => error_kind(store.add_actor(name)),
        Op::AddNode { actor, coord: c } => error_kind(store.add_node(actor, &coord(c))),
        Op::RemoveNode { actor, coord: c } => error_kind(store.remove_node(actor, &coord(c))),
        Op::UpdateNode { actor, coord: c, key, value } => {
            error_kind(store.update_node(actor, &coord(c), key, value.to_attribute()))
        }
        Op::AddEdge { src, src_coord, dst, dst_coord } => {
            error_kind(store.add_edge(src, &coord(src_coord), dst, &coord(dst_coord)))
        }
        Op::RemoveEdge { src, src_coord, dst, dst_coord } => {
            error_kind(store.remove_edge(src, &coord(src_coord), dst, &coord(dst_coord)))
        }
        Op::UpdateEdge { src, src_coord, dst, dst_coord, key, value } => error_kind(store.update_edge(
            src,
            &coord(src_coord),
            dst,
            &coord(dst_coord),
            key,
            value.to_attribute(),
        )),
    }
}

/// Applies one op to the reference network, returning the error kind.
pub fn apply_ref(op: &Op, net: &mut RefNet) -> Option<&'static str> {
    let r = match op {
        Op::CreateDimension { name, default_layer } => net.create_dimension(name, default_layer),
        Op::DeleteDimension { name } => net.delete_dimension(name),
        Op::CreateLayer { dimension, layer } => net.create_layer(dimension, layer),
        Op::DeleteLayer { dimension, layer } => net.delete_layer(dimension, layer),
        Op::AddActor { name } => net.add_actor(name),
        Op::AddNode { actor, coord } => net.add_node(actor, coord),
        Op::RemoveNode { actor, coord } => net.remove_node(actor, coord),
        Op::UpdateNode { actor, coord, key, value } => {
            net.update_node(actor, coord, key, value.clone())
        }
        Op::AddEdge { src, src_coord, dst, dst_coord } => {
            net.add_edge(src, src_coord, dst, dst_coord)
        }
        Op::RemoveEdge { src, src_coord, dst, dst_coord } => {
            net.remove_edge(src, src_coord, dst, dst_coord)
        }
        Op::UpdateEdge { src, src_coord, dst, dst_coord, key, value } => {
            net.update_edge(src, src_coord, dst, dst_coord, key, value.clone())
        }
    };
    r.err()
}

const DIM_POOL: [&str; 3] = ["d0", "d1", "d2"];
const LAYER_POOL: [&str; 5] = ["x0", "x1", "x2", "x3", "x4"];
const ACTOR_POOL: [&str; 12] = [
    "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9", "üser", "a space",
];
const KEY_POOL: [&str; 4] = ["k0", "k1", "size", "täg"];

pub fn random_value(rng: &mut ChaCha8Rng) -> RefValue {
    match rng.gen_range(0..6) {
        0 => RefValue::Num(rng.gen_range(-100..100) as f64 / 4.0),
        1 => RefValue::Num(rng.gen_range(0..1_000_000) as f64 * 1e-9),
        2 => RefValue::Num(f64::NEG_INFINITY),
        3 => RefValue::Text(String::new()),
        4 => RefValue::Text("5".to_owned()),
        _ => RefValue::Text(
            LAYER_POOL[rng.gen_range(0..LAYER_POOL.len())].to_owned() + " v=\\x",
        ),
    }
}

/// A coordinate that is usually valid for the tracker's current schema but
/// sometimes deliberately broken (wrong arity or unknown layer).
fn random_coord(rng: &mut ChaCha8Rng, tracker: &RefNet) -> Vec<String> {
    let arity = if rng.gen_ratio(1, 12) {
        rng.gen_range(0..4)
    } else {
        tracker.dims.len()
    };
    (0..arity)
        .map(|i| {
            let dim_layers = tracker.dims.get(i).map(|d| d.layers.as_slice());
            match dim_layers {
                Some(layers) if !layers.is_empty() && !rng.gen_ratio(1, 10) => {
                    layers[rng.gen_range(0..layers.len())].clone()
                }
                _ => LAYER_POOL[rng.gen_range(0..LAYER_POOL.len())].to_owned(),
            }
        })
        .collect()
}

fn random_node(rng: &mut ChaCha8Rng, tracker: &RefNet) -> (String, Vec<String>) {
    // usually an existing node, sometimes an arbitrary one
    if !tracker.nodes.is_empty() && !rng.gen_ratio(1, 5) {
        let pick = rng.gen_range(0..tracker.nodes.len());
        let (actor, coord) = tracker.nodes.keys().nth(pick).unwrap();
        (actor.clone(), coord.clone())
    } else {
        (
            ACTOR_POOL[rng.gen_range(0..ACTOR_POOL.len())].to_owned(),
            random_coord(rng, tracker),
        )
    }
}

fn random_key(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_ratio(1, 20) {
        String::new() // exercises the EmptyKey path
    } else {
        KEY_POOL[rng.gen_range(0..KEY_POOL.len())].to_owned()
    }
}

/// Generates a seeded op log. The generator tracks the evolving network on
/// its own `RefNet` so most ops are plausible, while a deliberate fraction
/// stays invalid to exercise every error path.
pub fn random_log(seed: u64, len: usize) -> Vec<Op> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = RefNet::default();
    let mut log = Vec::with_capacity(len);
    for step in 0..len {
        let op = loop {
            let choice = if step == 0 { 0 } else { rng.gen_range(0..100) };
            let candidate = match choice {
                // structure: rare but present
                0..=4 => Op::CreateDimension {
                    name: DIM_POOL[rng.gen_range(0..DIM_POOL.len())].to_owned(),
                    default_layer: LAYER_POOL[rng.gen_range(0..LAYER_POOL.len())].to_owned(),
                },
                5..=6 => Op::DeleteDimension {
                    name: DIM_POOL[rng.gen_range(0..DIM_POOL.len())].to_owned(),
                },
                7..=12 => Op::CreateLayer {
                    dimension: DIM_POOL[rng.gen_range(0..DIM_POOL.len())].to_owned(),
                    layer: LAYER_POOL[rng.gen_range(0..LAYER_POOL.len())].to_owned(),
                },
                13..=15 => Op::DeleteLayer {
                    dimension: DIM_POOL[rng.gen_range(0..DIM_POOL.len())].to_owned(),
                    layer: LAYER_POOL[rng.gen_range(0..LAYER_POOL.len())].to_owned(),
                },
                16..=17 => Op::AddActor {
                    name: ACTOR_POOL[rng.gen_range(0..ACTOR_POOL.len())].to_owned(),
                },
                // nodes
                18..=42 => Op::AddNode {
                    actor: ACTOR_POOL[rng.gen_range(0..ACTOR_POOL.len())].to_owned(),
                    coord: random_coord(&mut rng, &tracker),
                },
                43..=47 => {
                    let (actor, coord) = random_node(&mut rng, &tracker);
                    Op::RemoveNode { actor, coord }
                }
                48..=57 => {
                    let (actor, coord) = random_node(&mut rng, &tracker);
                    Op::UpdateNode {
                        actor,
                        coord,
                        key: random_key(&mut rng),
                        value: random_value(&mut rng),
                    }
                }
                // edges
                58..=84 => {
                    let (src, src_coord) = random_node(&mut rng, &tracker);
                    let (dst, dst_coord) = random_node(&mut rng, &tracker);
                    Op::AddEdge { src, src_coord, dst, dst_coord }
                }
                85..=89 => {
                    let (src, src_coord) = random_node(&mut rng, &tracker);
                    let (dst, dst_coord) = random_node(&mut rng, &tracker);
                    Op::RemoveEdge { src, src_coord, dst, dst_coord }
                }
                _ => {
                    let (src, src_coord) = random_node(&mut rng, &tracker);
                    let (dst, dst_coord) = random_node(&mut rng, &tracker);
                    Op::UpdateEdge {
                        src,
                        src_coord,
                        dst,
                        dst_coord,
                        key: random_key(&mut rng),
                        value: random_value(&mut rng),
                    }
                }
            };
            // keep the network non-trivial: don't let structural deletions
            // empty it out entirely
            match &candidate {
                Op::DeleteDimension { .. } | Op::DeleteLayer { .. }
                    if tracker.dims.len() == 1 && tracker.nodes.len() > 4 && rng.gen_ratio(3, 4) =>
                {
                    continue;
                }
                _ => break candidate,
            }
        };
        apply_ref(&op, &mut tracker);
        log.push(op);
    }
    log
}

/// Replays a log against a store, collecting per-op error kinds.
pub fn replay(log: &[Op], store: &mut dyn MultilayerStore) -> Vec<Option<&'static str>> {
    log.iter().map(|op| apply_store(op, store)).collect()
}

/// Builds a moderate random multilayer network directly (no error injection):
/// 1–2 dimensions, 2–3 layers each, up to `max_actors` actors with random
/// placement, attributes, and intra- plus interlayer edges. Identical calls
/// produce identical stores on every backend.
pub fn random_network(seed: u64, max_actors: usize, store: &mut dyn MultilayerStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arity = 1 + (seed % 2) as usize;
    let mut layer_grid: Vec<Vec<String>> = Vec::new();
    for d in 0..arity {
        let layers: Vec<String> = (0..rng.gen_range(2..=3))
            .map(|i| format!("x{i}"))
            .collect();
        store.create_dimension(&format!("d{d}"), &layers[0]).unwrap();
        for layer in &layers[1..] {
            store.create_layer(&format!("d{d}"), layer).unwrap();
        }
        layer_grid.push(layers);
    }

    let n = rng.gen_range(max_actors / 2..=max_actors).max(2);
    let mut placed: Vec<(String, Vec<String>)> = Vec::new();
    for v in 0..n {
        let actor = format!("a{v}");
        let spots = rng.gen_range(1..=3);
        for _ in 0..spots {
            let coord: Vec<String> = layer_grid
                .iter()
                .map(|layers| layers[rng.gen_range(0..layers.len())].clone())
                .collect();
            if store
                .add_node(&actor, &LayerCoordinate::new(coord.clone()))
                .is_ok()
            {
                placed.push((actor.clone(), coord));
            }
        }
    }
    for (actor, coord) in &placed {
        if rng.gen_ratio(1, 2) {
            let _ = store.update_node(
                actor,
                &LayerCoordinate::new(coord.clone()),
                KEY_POOL[rng.gen_range(0..KEY_POOL.len())],
                random_value(&mut rng).to_attribute(),
            );
        }
    }

    let edges = placed.len() * 2;
    for _ in 0..edges {
        let (sa, sc) = &placed[rng.gen_range(0..placed.len())];
        let (da, dc) = &placed[rng.gen_range(0..placed.len())];
        let added = store.add_edge(
            sa,
            &LayerCoordinate::new(sc.clone()),
            da,
            &LayerCoordinate::new(dc.clone()),
        );
        if added.is_ok() && rng.gen_ratio(1, 3) {
            let _ = store.update_edge(
                sa,
                &LayerCoordinate::new(sc.clone()),
                da,
                &LayerCoordinate::new(dc.clone()),
                "w",
                random_value(&mut rng).to_attribute(),
            );
        }
    }
}
