//! Line-oriented text serialization for multilayer networks.
//!
//! A document holds up to four sections, each at most once and in this
//! order: `#DIMENSIONS`, `#ACTORS`, `#NODES`, `#EDGES`. Records are
//! comma-separated; lines starting with `%` are comments. Record shapes:
//!
//! ```text
//! #DIMENSIONS
//! dimension,layer1,layer2
//! #ACTORS
//! actor
//! #NODES
//! actor,layer_1,...,layer_d,key=value,...
//! #EDGES
//! actor_s,s_1,...,s_d,actor_t,t_1,...,t_d,key=value,...
//! ```
//!
//! Names containing separators (comma, quote, `=`, newline, …) are written
//! double-quoted with backslash escapes, so every name round-trips. Attribute
//! values keep their type: numbers are written bare in shortest round-trip
//! decimal form, text is always quoted — `size=5` and `size="5"` stay
//! distinct. The writer emits records in sorted order and is a pure function
//! of network content, so writing is byte-deterministic; `#ACTORS` is only
//! needed to carry actors that have no node-layers.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::StoreError;
use crate::model::{AttributeMap, AttributeValue, Edge, LayerCoordinate, NodeLayer};
use crate::store::MultilayerStore;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("write failed: {0}")]
    SinkFailure(#[from] std::io::Error),
    #[error("read failed: {0}")]
    SourceFailure(std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} coordinate(s) per endpoint")]
    ArityMismatch { line: usize, expected: usize },
    #[error("line {line}: duplicate record")]
    DuplicateRecord { line: usize },
    #[error("store must be empty before loading a document")]
    NonEmptyStore,
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

// ---- field encoding ----

fn needs_quoting(name: &str) -> bool {
    name.is_empty()
        || name.starts_with(' ')
        || name.ends_with(' ')
        || name
            .chars()
            .any(|c| matches!(c, ',' | '"' | '=' | '#' | '%' | '\n' | '\t' | '\r'))
}

fn write_quoted(out: &mut String, name: &str) {
    out.push('"');
    for c in name.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('"');
}

fn encode_name(out: &mut String, name: &str) {
    if needs_quoting(name) {
        write_quoted(out, name);
    } else {
        out.push_str(name);
    }
}

fn encode_attr(out: &mut String, key: &str, value: &AttributeValue) {
    encode_name(out, key);
    out.push('=');
    match value {
        AttributeValue::Number(n) => out.push_str(&n.to_string()),
        AttributeValue::Text(t) => write_quoted(out, t),
    }
}

// ---- field decoding ----

/// Splits a record line into raw fields on commas outside quoted spans.
/// Backslash escapes inside quotes are kept verbatim for the per-field
/// decoders; unbalanced quotes are rejected here.
fn split_fields(line: &str, line_no: usize) -> Result<Vec<String>, IoError> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars();
    let mut in_quotes = false;
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                cur.push(c);
            }
            '\\' if in_quotes => {
                cur.push(c);
                match chars.next() {
                    Some(next) => cur.push(next),
                    None => return Err(parse_err(line_no, "dangling escape at end of line")),
                }
            }
            ',' if !in_quotes => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if in_quotes {
        return Err(parse_err(line_no, "unterminated quoted field"));
    }
    fields.push(cur);
    Ok(fields)
}

/// Decodes a quoted span that must cover the whole raw field.
fn decode_quoted(raw: &str, line_no: usize) -> Result<String, IoError> {
    let inner = raw
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| parse_err(line_no, "malformed quoted field"))?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                other => {
                    return Err(parse_err(
                        line_no,
                        format!("unknown escape \\{}", other.map(String::from).unwrap_or_default()),
                    ))
                }
            },
            '"' => return Err(parse_err(line_no, "stray quote inside quoted field")),
            _ => out.push(c),
        }
    }
    Ok(out)
}

fn decode_name(raw: &str, line_no: usize) -> Result<String, IoError> {
    if raw.starts_with('"') {
        decode_quoted(raw, line_no)
    } else if raw.contains('"') {
        Err(parse_err(line_no, "quote in the middle of a bare field"))
    } else {
        Ok(raw.to_owned())
    }
}

/// Position of the first `=` outside quoted spans, if any. Fields past the
/// coordinate positions must be attributes and are recognized by this.
fn attr_split_point(raw: &str) -> Option<usize> {
    let mut in_quotes = false;
    let mut skip_next = false;
    for (i, c) in raw.char_indices() {
        if skip_next {
            skip_next = false;
            continue;
        }
        match c {
            '"' => in_quotes = !in_quotes,
            '\\' if in_quotes => skip_next = true,
            '=' if !in_quotes => return Some(i),
            _ => {}
        }
    }
    None
}

fn decode_attr(raw: &str, line_no: usize) -> Result<(String, AttributeValue), IoError> {
    let split = attr_split_point(raw)
        .ok_or_else(|| parse_err(line_no, "expected key=value attribute field"))?;
    let key = decode_name(&raw[..split], line_no)?;
    let val_raw = &raw[split + 1..];
    let value = if val_raw.starts_with('"') {
        AttributeValue::Text(decode_quoted(val_raw, line_no)?)
    } else {
        let n: f64 = val_raw.parse().map_err(|_| {
            parse_err(
                line_no,
                "attribute value must be a number or a quoted string",
            )
        })?;
        AttributeValue::Number(n)
    };
    Ok((key, value))
}

// ---- writing ----

fn push_record_attrs(out: &mut String, attrs: &AttributeMap) {
    for (key, value) in attrs {
        out.push(',');
        encode_attr(out, key, value);
    }
}

fn push_endpoint(out: &mut String, node: &NodeLayer) {
    encode_name(out, node.actor.as_str());
    for pos in node.coord.positions() {
        out.push(',');
        encode_name(out, pos);
    }
}

/// Serializes the full network to `sink` in deterministic sorted order.
pub fn write_mln(store: &dyn MultilayerStore, sink: &mut dyn Write) -> Result<(), IoError> {
    let mut doc = String::new();
    doc.push_str("#DIMENSIONS\n");
    for dim in &store.schema().dimensions {
        let mut layers: Vec<&str> = dim.layers.iter().map(String::as_str).collect();
        layers.sort_unstable();
        encode_name(&mut doc, &dim.name);
        for layer in layers {
            doc.push(',');
            encode_name(&mut doc, layer);
        }
        doc.push('\n');
    }

    let actors: BTreeSet<String> = store.actors().map(|a| a.as_str().to_owned()).collect();
    if !actors.is_empty() {
        doc.push_str("#ACTORS\n");
        for actor in &actors {
            encode_name(&mut doc, actor);
            doc.push('\n');
        }
    }

    let mut nodes: Vec<NodeLayer> = store.node_layers().collect();
    nodes.sort_unstable();
    if !nodes.is_empty() {
        doc.push_str("#NODES\n");
        for node in &nodes {
            push_endpoint(&mut doc, node);
            let attrs = store
                .node_attributes(node.actor.as_str(), &node.coord)
                .expect("listed node must resolve");
            push_record_attrs(&mut doc, &attrs);
            doc.push('\n');
        }
    }

    let mut edges: Vec<Edge> = store.edges().collect();
    edges.sort_unstable_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    if !edges.is_empty() {
        doc.push_str("#EDGES\n");
        for edge in &edges {
            push_endpoint(&mut doc, &edge.a);
            doc.push(',');
            push_endpoint(&mut doc, &edge.b);
            push_record_attrs(&mut doc, &edge.attributes);
            doc.push('\n');
        }
    }

    sink.write_all(doc.as_bytes())?;
    Ok(())
}

/// [`write_mln`] into a `String`.
pub fn write_mln_string(store: &dyn MultilayerStore) -> Result<String, IoError> {
    let mut buf = Vec::new();
    write_mln(store, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serialized document is UTF-8"))
}

// ---- reading ----

#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Section {
    Preamble,
    Dimensions,
    Actors,
    Nodes,
    Edges,
}

fn store_err(err: StoreError, line: usize) -> IoError {
    match err {
        StoreError::DuplicateDimension(_)
        | StoreError::DuplicateLayer { .. }
        | StoreError::DuplicateNode { .. }
        | StoreError::DuplicateEdge => IoError::DuplicateRecord { line },
        other => parse_err(line, other.to_string()),
    }
}

/// Splits record fields into `d`-ary coordinate groups plus trailing
/// attributes. `groups` is 1 for node records, 2 for edge records.
fn split_record<'a>(
    fields: &'a [String],
    groups: usize,
    arity: usize,
    line_no: usize,
) -> Result<(Vec<(&'a str, Vec<&'a str>)>, &'a [String]), IoError> {
    let head = groups * (1 + arity);
    let mismatch = IoError::ArityMismatch {
        line: line_no,
        expected: arity,
    };
    if fields.len() < head {
        return Err(mismatch);
    }
    // every trailing field must be an attribute; a bare leftover means the
    // coordinate count does not match the declared dimensions
    if fields[head..].iter().any(|f| attr_split_point(f).is_none()) {
        return Err(mismatch);
    }
    let mut endpoints = Vec::with_capacity(groups);
    for g in 0..groups {
        let base = g * (1 + arity);
        let actor = fields[base].as_str();
        let coord = fields[base + 1..base + 1 + arity]
            .iter()
            .map(String::as_str)
            .collect();
        endpoints.push((actor, coord));
    }
    Ok((endpoints, &fields[head..]))
}

fn decode_coord(raw: &[&str], line_no: usize) -> Result<LayerCoordinate, IoError> {
    let mut positions = Vec::with_capacity(raw.len());
    for part in raw {
        positions.push(decode_name(part, line_no)?);
    }
    Ok(LayerCoordinate::new(positions))
}

/// Loads a document into an empty store.
pub fn read_mln(source: impl BufRead, store: &mut dyn MultilayerStore) -> Result<(), IoError> {
    if !store.is_empty() {
        return Err(IoError::NonEmptyStore);
    }
    let mut section = Section::Preamble;
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(IoError::SourceFailure)?;
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let next = match header {
                "DIMENSIONS" => Section::Dimensions,
                "ACTORS" => Section::Actors,
                "NODES" => Section::Nodes,
                "EDGES" => Section::Edges,
                other => return Err(parse_err(line_no, format!("unknown section #{other}"))),
            };
            if next <= section {
                return Err(parse_err(
                    line_no,
                    format!("section #{header} repeated or out of order"),
                ));
            }
            section = next;
            continue;
        }

        let fields = split_fields(&line, line_no)?;
        match section {
            Section::Preamble => {
                return Err(parse_err(line_no, "record before any section header"))
            }
            Section::Dimensions => {
                if fields.len() < 2 {
                    return Err(parse_err(
                        line_no,
                        "dimension record needs a name and at least one layer",
                    ));
                }
                let dim = decode_name(&fields[0], line_no)?;
                let first = decode_name(&fields[1], line_no)?;
                store
                    .create_dimension(&dim, &first)
                    .map_err(|e| store_err(e, line_no))?;
                for raw in &fields[2..] {
                    let layer = decode_name(raw, line_no)?;
                    store
                        .create_layer(&dim, &layer)
                        .map_err(|e| store_err(e, line_no))?;
                }
            }
            Section::Actors => {
                if fields.len() != 1 {
                    return Err(parse_err(line_no, "actor record must be a single name"));
                }
                let actor = decode_name(&fields[0], line_no)?;
                store.add_actor(&actor).map_err(|e| store_err(e, line_no))?;
            }
            Section::Nodes => {
                let arity = store.schema().arity();
                let (endpoints, attrs) = split_record(&fields, 1, arity, line_no)?;
                let actor = decode_name(endpoints[0].0, line_no)?;
                let coord = decode_coord(&endpoints[0].1, line_no)?;
                store
                    .add_node(&actor, &coord)
                    .map_err(|e| store_err(e, line_no))?;
                for raw in attrs {
                    let (key, value) = decode_attr(raw, line_no)?;
                    store
                        .update_node(&actor, &coord, &key, value)
                        .map_err(|e| store_err(e, line_no))?;
                }
            }
            Section::Edges => {
                let arity = store.schema().arity();
                let (endpoints, attrs) = split_record(&fields, 2, arity, line_no)?;
                let src = decode_name(endpoints[0].0, line_no)?;
                let src_coord = decode_coord(&endpoints[0].1, line_no)?;
                let dst = decode_name(endpoints[1].0, line_no)?;
                let dst_coord = decode_coord(&endpoints[1].1, line_no)?;
                store
                    .add_edge(&src, &src_coord, &dst, &dst_coord)
                    .map_err(|e| store_err(e, line_no))?;
                for raw in attrs {
                    let (key, value) = decode_attr(raw, line_no)?;
                    store
                        .update_edge(&src, &src_coord, &dst, &dst_coord, &key, value)
                        .map_err(|e| store_err(e, line_no))?;
                }
            }
        }
    }
    Ok(())
}

/// [`read_mln`] from an in-memory string.
pub fn read_mln_str(text: &str, store: &mut dyn MultilayerStore) -> Result<(), IoError> {
    read_mln(text.as_bytes(), store)
}
