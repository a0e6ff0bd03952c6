//! Layer operators — flatten, project, diff, filter.
//!
//! Each operator is written once against the store contract, validates its
//! layer arguments before touching anything, and materializes its result as a
//! fresh layer in the same dimension. Existing layers are never modified.
//!
//! With more than one dimension, "an edge of layer l" can mean two things.
//! The binary operators (flatten, diff) take the strict reading — both
//! endpoints carry identical coordinates, differing networks only by actor —
//! while filter copies every edge whose endpoints are both in l, whatever
//! their other coordinate positions. The readings coincide for d = 1.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Result, StoreError};
use crate::model::{
    AttributeMap, AttributeValue, LayerCoordinate, LayerRef, NodeLayer,
};
use crate::predicate::{NodeContext, Predicate};
use crate::store::MultilayerStore;

/// Validates a binary operator call and returns the dimension's coordinate
/// position. Checks run strictly before any mutation.
fn check_binary(
    store: &dyn MultilayerStore,
    dimension: &str,
    source: &str,
    target: &str,
    result: &str,
) -> Result<usize> {
    let schema = store.schema();
    let pos = schema
        .dimension_index(dimension)
        .ok_or_else(|| StoreError::UnknownDimension(dimension.to_owned()))?;
    for layer in [source, target] {
        if !schema.has_layer(dimension, layer) {
            return Err(StoreError::UnknownLayer {
                dimension: dimension.to_owned(),
                layer: layer.to_owned(),
            });
        }
    }
    if source == target {
        return Err(StoreError::LayerIdentical);
    }
    if schema.has_layer(dimension, result) {
        return Err(StoreError::DuplicateLayer {
            dimension: dimension.to_owned(),
            layer: result.to_owned(),
        });
    }
    Ok(pos)
}

/// Coordinate positions other than `pos`, used to pair up nodes that agree
/// everywhere but in the operated dimension.
fn rest_of(coord: &LayerCoordinate, pos: usize) -> Vec<String> {
    coord
        .as_slice()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pos)
        .map(|(_, l)| l.clone())
        .collect()
}

/// Rebuilds a full coordinate from a rest-key by inserting `layer` at `pos`.
fn coord_at(rest: &[String], pos: usize, layer: &str) -> LayerCoordinate {
    let mut slots: Vec<String> = Vec::with_capacity(rest.len() + 1);
    slots.extend_from_slice(&rest[..pos]);
    slots.push(layer.to_owned());
    slots.extend_from_slice(&rest[pos..]);
    LayerCoordinate::new(slots)
}

/// Keeps the canonically smaller value on key collisions, so merging is
/// symmetric in its inputs.
fn merge_attrs(into: &mut AttributeMap, from: AttributeMap) {
    for (k, v) in from {
        match into.get(&k) {
            Some(cur) if cur.canonical_cmp(&v) != Ordering::Greater => {}
            _ => {
                into.insert(k, v);
            }
        }
    }
}

fn actor_pair(e: &crate::model::Edge) -> (String, String) {
    let a = e.a.actor.as_str();
    let b = e.b.actor.as_str();
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

fn write_node(
    store: &mut dyn MultilayerStore,
    actor: &str,
    coord: &LayerCoordinate,
    attrs: AttributeMap,
) -> Result<()> {
    store.add_node(actor, coord)?;
    for (k, v) in attrs {
        store.update_node(actor, coord, &k, v)?;
    }
    Ok(())
}

/// Merges two layers of one dimension into a new layer: the union of their
/// nodes, and an edge per actor pair connected in either source layer. Each
/// result edge carries a numeric "weight" attribute counting how many of the
/// two layers contributed that pair (1 or 2).
pub fn flatten_layer(
    store: &mut dyn MultilayerStore,
    dimension: &str,
    source: &str,
    target: &str,
    result: &str,
) -> Result<LayerRef> {
    let pos = check_binary(store, dimension, source, target, result)?;
    let s = store.layer_contents(dimension, source)?;
    let t = store.layer_contents(dimension, target)?;

    let mut nodes: BTreeMap<(String, Vec<String>), AttributeMap> = BTreeMap::new();
    for n in s.nodes.iter().chain(t.nodes.iter()) {
        let attrs = store.node_attributes(n.actor.as_str(), &n.coord)?;
        let key = (n.actor.as_str().to_owned(), rest_of(&n.coord, pos));
        merge_attrs(nodes.entry(key).or_default(), attrs);
    }

    let mut weights: BTreeMap<(String, String, Vec<String>), f64> = BTreeMap::new();
    for contents in [&s, &t] {
        for e in &contents.edges {
            if !e.is_intralayer() {
                continue;
            }
            let (a, b) = actor_pair(e);
            let rest = rest_of(&e.a.coord, pos);
            *weights.entry((a, b, rest)).or_insert(0.0) += 1.0;
        }
    }

    store.create_layer(dimension, result)?;
    for ((actor, rest), attrs) in nodes {
        write_node(store, &actor, &coord_at(&rest, pos, result), attrs)?;
    }
    for ((a, b, rest), w) in weights {
        let coord = coord_at(&rest, pos, result);
        store.add_edge(&a, &coord, &b, &coord)?;
        store.update_edge(&a, &coord, &b, &coord, "weight", AttributeValue::Number(w))?;
    }
    Ok(LayerRef::new(dimension, result))
}

/// One-mode projection: copies the target layer's nodes into a new layer and
/// connects two of them when some source-layer node has interlayer edges to
/// both (all non-operated coordinate positions agreeing).
pub fn project_layer(
    store: &mut dyn MultilayerStore,
    dimension: &str,
    source: &str,
    target: &str,
    result: &str,
) -> Result<LayerRef> {
    let pos = check_binary(store, dimension, source, target, result)?;
    let s = store.layer_contents(dimension, source)?;
    let t = store.layer_contents(dimension, target)?;

    let mut pairs: BTreeSet<(String, String, Vec<String>)> = BTreeSet::new();
    for w in &s.nodes {
        let rest_w = rest_of(&w.coord, pos);
        let mut mates: Vec<String> = store
            .neighbors(w.actor.as_str(), &w.coord)?
            .filter(|n| {
                n.coord.position(pos) == Some(target) && rest_of(&n.coord, pos) == rest_w
            })
            .map(|n| n.actor.as_str().to_owned())
            .collect();
        mates.sort_unstable();
        for i in 0..mates.len() {
            for j in i + 1..mates.len() {
                pairs.insert((mates[i].clone(), mates[j].clone(), rest_w.clone()));
            }
        }
    }

    let mut nodes: Vec<(NodeLayer, AttributeMap)> = Vec::with_capacity(t.nodes.len());
    for n in &t.nodes {
        let attrs = store.node_attributes(n.actor.as_str(), &n.coord)?;
        nodes.push((n.clone(), attrs));
    }

    store.create_layer(dimension, result)?;
    for (n, attrs) in nodes {
        write_node(
            store,
            n.actor.as_str(),
            &n.coord.with_position(pos, result),
            attrs,
        )?;
    }
    for (a, b, rest) in pairs {
        let coord = coord_at(&rest, pos, result);
        store.add_edge(&a, &coord, &b, &coord)?;
    }
    Ok(LayerRef::new(dimension, result))
}

/// Edge difference anchored at the source layer: copies the source layer's
/// nodes, keeping an edge only when the target layer has no edge over the
/// same actor pair (same non-operated coordinates).
pub fn diff_layer(
    store: &mut dyn MultilayerStore,
    dimension: &str,
    source: &str,
    target: &str,
    result: &str,
) -> Result<LayerRef> {
    let pos = check_binary(store, dimension, source, target, result)?;
    let s = store.layer_contents(dimension, source)?;
    let t = store.layer_contents(dimension, target)?;

    let blocked: HashSet<(String, String, Vec<String>)> = t
        .edges
        .iter()
        .filter(|e| e.is_intralayer())
        .map(|e| {
            let (a, b) = actor_pair(e);
            (a, b, rest_of(&e.a.coord, pos))
        })
        .collect();
    let kept: BTreeSet<(String, String, Vec<String>)> = s
        .edges
        .iter()
        .filter(|e| e.is_intralayer())
        .map(|e| {
            let (a, b) = actor_pair(e);
            (a, b, rest_of(&e.a.coord, pos))
        })
        .filter(|key| !blocked.contains(key))
        .collect();

    let mut nodes: Vec<(NodeLayer, AttributeMap)> = Vec::with_capacity(s.nodes.len());
    for n in &s.nodes {
        let attrs = store.node_attributes(n.actor.as_str(), &n.coord)?;
        nodes.push((n.clone(), attrs));
    }

    store.create_layer(dimension, result)?;
    for (n, attrs) in nodes {
        write_node(
            store,
            n.actor.as_str(),
            &n.coord.with_position(pos, result),
            attrs,
        )?;
    }
    for (a, b, rest) in kept {
        let coord = coord_at(&rest, pos, result);
        store.add_edge(&a, &coord, &b, &coord)?;
    }
    Ok(LayerRef::new(dimension, result))
}

/// Vertex-induced subgraph: copies the nodes of `layer` satisfying the
/// predicate into a new layer, plus every layer edge with both endpoints
/// satisfying it. Predicates see the actor name, the node's attributes, and
/// its degree within the layer.
pub fn filter_layer(
    store: &mut dyn MultilayerStore,
    layer: &LayerRef,
    predicate: &Predicate,
    result: &str,
) -> Result<LayerRef> {
    let schema = store.schema();
    let pos = schema
        .dimension_index(&layer.dimension)
        .ok_or_else(|| StoreError::UnknownDimension(layer.dimension.clone()))?;
    if !schema.has_layer(&layer.dimension, &layer.layer) {
        return Err(StoreError::UnknownLayer {
            dimension: layer.dimension.clone(),
            layer: layer.layer.clone(),
        });
    }
    if schema.has_layer(&layer.dimension, result) {
        return Err(StoreError::DuplicateLayer {
            dimension: layer.dimension.clone(),
            layer: result.to_owned(),
        });
    }
    let c = store.layer_contents(&layer.dimension, &layer.layer)?;

    let mut degree: HashMap<&NodeLayer, usize> = HashMap::with_capacity(c.nodes.len());
    for e in &c.edges {
        *degree.entry(&e.a).or_insert(0) += 1;
        *degree.entry(&e.b).or_insert(0) += 1;
    }
    let mut kept: Vec<(NodeLayer, AttributeMap)> = Vec::new();
    let mut kept_set: HashSet<NodeLayer> = HashSet::new();
    for n in &c.nodes {
        let attrs = store.node_attributes(n.actor.as_str(), &n.coord)?;
        let ctx = NodeContext {
            actor: n.actor.as_str().to_owned(),
            degree: degree.get(n).copied().unwrap_or(0),
            attributes: attrs.clone(),
        };
        if predicate.evaluate(&ctx) {
            kept.push((n.clone(), attrs));
            kept_set.insert(n.clone());
        }
    }
    let edges: Vec<(NodeLayer, NodeLayer)> = c
        .edges
        .iter()
        .filter(|e| kept_set.contains(&e.a) && kept_set.contains(&e.b))
        .map(|e| (e.a.clone(), e.b.clone()))
        .collect();

    store.create_layer(&layer.dimension, result)?;
    for (n, attrs) in kept {
        write_node(
            store,
            n.actor.as_str(),
            &n.coord.with_position(pos, result),
            attrs,
        )?;
    }
    for (a, b) in edges {
        store.add_edge(
            a.actor.as_str(),
            &a.coord.with_position(pos, result),
            b.actor.as_str(),
            &b.coord.with_position(pos, result),
        )?;
    }
    Ok(LayerRef::new(&layer.dimension, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{new_store, BackendKind};
    use crate::model::coord;
    use crate::predicate::parse_predicate;
    use crate::store::MultilayerStore;

    fn two_layer() -> Box<dyn MultilayerStore> {
        let mut s = new_store(BackendKind::Adjacency);
        s.create_dimension("social", "fb").unwrap();
        s.create_layer("social", "tw").unwrap();
        for n in ["a", "b", "c"] {
            s.add_node(n, &coord(["fb"])).unwrap();
            s.add_node(n, &coord(["tw"])).unwrap();
        }
        s
    }

    fn layer_pairs(s: &dyn MultilayerStore, layer: &str) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = s
            .layer_contents("social", layer)
            .unwrap()
            .edges
            .iter()
            .map(|e| {
                (
                    e.a.actor.as_str().to_owned(),
                    e.b.actor.as_str().to_owned(),
                )
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn flatten_unions_edges_and_weights() {
        let mut s = two_layer();
        s.add_edge("a", &coord(["fb"]), "b", &coord(["fb"])).unwrap();
        s.add_edge("b", &coord(["tw"]), "c", &coord(["tw"])).unwrap();
        s.add_edge("a", &coord(["tw"]), "b", &coord(["tw"])).unwrap();
        flatten_layer(s.as_mut(), "social", "fb", "tw", "flat").unwrap();
        assert_eq!(
            layer_pairs(s.as_ref(), "flat"),
            vec![
                ("a".to_owned(), "b".to_owned()),
                ("b".to_owned(), "c".to_owned())
            ]
        );
        let w_ab = s
            .edge_attributes("a", &coord(["flat"]), "b", &coord(["flat"]))
            .unwrap();
        let w_bc = s
            .edge_attributes("b", &coord(["flat"]), "c", &coord(["flat"]))
            .unwrap();
        assert_eq!(w_ab["weight"], AttributeValue::Number(2.0));
        assert_eq!(w_bc["weight"], AttributeValue::Number(1.0));
        // sources untouched
        assert_eq!(layer_pairs(s.as_ref(), "fb").len(), 1);
        assert_eq!(layer_pairs(s.as_ref(), "tw").len(), 2);
    }

    #[test]
    fn flatten_rejects_bad_arguments() {
        let mut s = two_layer();
        assert!(matches!(
            flatten_layer(s.as_mut(), "social", "fb", "fb", "f"),
            Err(StoreError::LayerIdentical)
        ));
        assert!(matches!(
            flatten_layer(s.as_mut(), "social", "fb", "nope", "f"),
            Err(StoreError::UnknownLayer { .. })
        ));
        assert!(matches!(
            flatten_layer(s.as_mut(), "social", "fb", "tw", "tw"),
            Err(StoreError::DuplicateLayer { .. })
        ));
        assert!(matches!(
            flatten_layer(s.as_mut(), "nope", "fb", "tw", "f"),
            Err(StoreError::UnknownDimension(_))
        ));
        // nothing was created along the way
        assert_eq!(s.schema().dimensions[0].layers.len(), 2);
    }

    #[test]
    fn project_connects_common_interlayer_neighbors() {
        let mut s = two_layer();
        // w=c@fb sees a@tw and b@tw
        s.add_edge("c", &coord(["fb"]), "a", &coord(["tw"])).unwrap();
        s.add_edge("c", &coord(["fb"]), "b", &coord(["tw"])).unwrap();
        // a@fb sees only c@tw: no pair from it
        s.add_edge("a", &coord(["fb"]), "c", &coord(["tw"])).unwrap();
        project_layer(s.as_mut(), "social", "fb", "tw", "proj").unwrap();
        assert_eq!(
            layer_pairs(s.as_ref(), "proj"),
            vec![("a".to_owned(), "b".to_owned())]
        );
        // nodes copied from the target layer
        assert_eq!(s.layer_contents("social", "proj").unwrap().node_count, 3);
    }

    #[test]
    fn project_ignores_intralayer_edges() {
        let mut s = two_layer();
        s.add_edge("a", &coord(["fb"]), "b", &coord(["fb"])).unwrap();
        project_layer(s.as_mut(), "social", "fb", "tw", "proj").unwrap();
        assert!(layer_pairs(s.as_ref(), "proj").is_empty());
    }

    #[test]
    fn diff_subtracts_actor_pairs() {
        let mut s = two_layer();
        s.add_edge("a", &coord(["fb"]), "b", &coord(["fb"])).unwrap();
        s.add_edge("b", &coord(["fb"]), "c", &coord(["fb"])).unwrap();
        s.add_edge("b", &coord(["tw"]), "c", &coord(["tw"])).unwrap();
        diff_layer(s.as_mut(), "social", "fb", "tw", "d").unwrap();
        assert_eq!(
            layer_pairs(s.as_ref(), "d"),
            vec![("a".to_owned(), "b".to_owned())]
        );
        // anchored at the source: nodes are fb's
        assert_eq!(s.layer_contents("social", "d").unwrap().node_count, 3);
    }

    #[test]
    fn filter_induces_subgraph_by_degree() {
        let mut s = two_layer();
        s.add_edge("a", &coord(["fb"]), "b", &coord(["fb"])).unwrap();
        s.add_edge("b", &coord(["fb"]), "c", &coord(["fb"])).unwrap();
        let p = parse_predicate("degree >= 2").unwrap();
        filter_layer(s.as_mut(), &LayerRef::new("social", "fb"), &p, "hubs").unwrap();
        let c = s.layer_contents("social", "hubs").unwrap();
        assert_eq!(c.node_count, 1);
        assert_eq!(c.edge_count, 0);
        assert_eq!(c.nodes[0].actor.as_str(), "b");
    }

    #[test]
    fn filter_true_copies_layer() {
        let mut s = two_layer();
        s.add_edge("a", &coord(["fb"]), "b", &coord(["fb"])).unwrap();
        s.update_node("a", &coord(["fb"]), "color", "red".into())
            .unwrap();
        let p = parse_predicate("true").unwrap();
        filter_layer(s.as_mut(), &LayerRef::new("social", "fb"), &p, "copy").unwrap();
        let c = s.layer_contents("social", "copy").unwrap();
        assert_eq!(c.node_count, 3);
        assert_eq!(c.edge_count, 1);
        let attrs = s.node_attributes("a", &coord(["copy"])).unwrap();
        assert_eq!(attrs["color"], AttributeValue::Text("red".into()));
    }

    #[test]
    fn filter_by_attribute_and_actor() {
        let mut s = two_layer();
        s.add_edge("a", &coord(["fb"]), "b", &coord(["fb"])).unwrap();
        s.update_node("a", &coord(["fb"]), "color", "red".into())
            .unwrap();
        s.update_node("b", &coord(["fb"]), "color", "red".into())
            .unwrap();
        s.update_node("c", &coord(["fb"]), "color", "blue".into())
            .unwrap();
        let p = parse_predicate("color == \"red\"").unwrap();
        filter_layer(s.as_mut(), &LayerRef::new("social", "fb"), &p, "red").unwrap();
        let c = s.layer_contents("social", "red").unwrap();
        assert_eq!(c.node_count, 2);
        assert_eq!(c.edge_count, 1);
    }

    #[test]
    fn operators_work_at_higher_arity() {
        let mut s = new_store(BackendKind::Adjacency);
        s.create_dimension("social", "fb").unwrap();
        s.create_layer("social", "tw").unwrap();
        s.create_dimension("time", "t0").unwrap();
        s.create_layer("time", "t1").unwrap();
        for n in ["a", "b"] {
            for l in ["fb", "tw"] {
                for t in ["t0", "t1"] {
                    s.add_node(n, &coord([l, t])).unwrap();
                }
            }
        }
        // same social pair, different time positions: must stay separate
        s.add_edge("a", &coord(["fb", "t0"]), "b", &coord(["fb", "t0"]))
            .unwrap();
        s.add_edge("a", &coord(["tw", "t1"]), "b", &coord(["tw", "t1"]))
            .unwrap();
        flatten_layer(s.as_mut(), "social", "fb", "tw", "flat").unwrap();
        let c = s.layer_contents("social", "flat").unwrap();
        assert_eq!(c.node_count, 4); // a,b at t0 and t1
        assert_eq!(c.edge_count, 2);
        let w = s
            .edge_attributes("a", &coord(["flat", "t0"]), "b", &coord(["flat", "t0"]))
            .unwrap();
        assert_eq!(w["weight"], AttributeValue::Number(1.0));
        // a cross-position edge inside one layer is not intralayer: flatten skips it
        s.add_edge("a", &coord(["fb", "t0"]), "b", &coord(["fb", "t1"]))
            .unwrap();
        flatten_layer(s.as_mut(), "social", "fb", "tw", "flat2").unwrap();
        assert_eq!(s.layer_contents("social", "flat2").unwrap().edge_count, 2);
    }
}
