//! Deterministic text snapshots for whole-network equality.
//!
//! Two stores hold the same network exactly when their canonical forms are
//! byte-identical, regardless of backend or insertion order. The format is an
//! equality oracle, not an interchange format (that's the io module).

use std::fmt;

use crate::model::AttributeValue;
use crate::store::MultilayerStore;

/// Sorted, escaped, line-oriented rendering of a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Injectively escapes a name so fields can be space-joined per line.
fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
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

fn value_text(v: &AttributeValue) -> String {
    match v {
        AttributeValue::Number(n) => format!("n:{n}"),
        AttributeValue::Text(t) => format!("t:{}", esc(t)),
    }
}

fn attr_suffix(attrs: &crate::model::AttributeMap) -> String {
    let mut out = String::new();
    for (k, v) in attrs {
        out.push(' ');
        out.push_str(&esc(k));
        out.push('=');
        out.push_str(&value_text(v));
    }
    out
}

/// Renders the full network state: schema (dimensions in order, layers
/// sorted), actors, node-layers, and normalized edges, each section sorted.
pub fn snapshot_canonical(store: &dyn MultilayerStore) -> CanonicalForm {
    let mut out = String::new();

    out.push_str("SCHEMA\n");
    for dim in &store.schema().dimensions {
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
    let mut actors: Vec<String> = store.actors().map(|a| esc(a.as_str())).collect();
    actors.sort_unstable();
    for a in actors {
        out.push_str(&a);
        out.push('\n');
    }

    out.push_str("NODES\n");
    let mut nodes: Vec<String> = store
        .node_layers()
        .map(|n| {
            let attrs = store
                .node_attributes(n.actor.as_str(), &n.coord)
                .unwrap_or_default();
            let mut line = esc(n.actor.as_str());
            for pos in n.coord.positions() {
                line.push(' ');
                line.push_str(&esc(pos));
            }
            line.push_str(&attr_suffix(&attrs));
            line
        })
        .collect();
    nodes.sort_unstable();
    for n in nodes {
        out.push_str(&n);
        out.push('\n');
    }

    out.push_str("EDGES\n");
    let mut edges: Vec<String> = store
        .edges()
        .map(|e| {
            // Edge::new already normalized endpoint order
            let mut line = esc(e.a.actor.as_str());
            for pos in e.a.coord.positions() {
                line.push(' ');
                line.push_str(&esc(pos));
            }
            line.push_str(" --");
            line.push(' ');
            line.push_str(&esc(e.b.actor.as_str()));
            for pos in e.b.coord.positions() {
                line.push(' ');
                line.push_str(&esc(pos));
            }
            line.push_str(&attr_suffix(&e.attributes));
            line
        })
        .collect();
    edges.sort_unstable();
    for e in edges {
        out.push_str(&e);
        out.push('\n');
    }

    CanonicalForm(out)
}
