//! Line-oriented text format for CCD graphs.
//!
//! ```text
//! ccd 1
//! model ccd1
//! sample-size 10
//! taxon A
//! ...
//! vertex <hex clade> <context> <weight> <count>
//! split <parent> <left child> <right child> <ccp> <count>
//! ```
//!
//! Vertices are written sorted by (size, clade, context) and numbered from 0
//! in that order; splits refer to those numbers and are sorted by (parent,
//! left child). Contexts are `-`, `root` or the sibling clade in hex. Floats
//! use the shortest representation that round-trips.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::graph::{CcdGraph, Context, Model, VertexId};
use crate::trees::{Clade, TaxonSet};
use crate::{Error, Result};

const HEADER: &str = "ccd 1";

pub(crate) fn context_to_str(context: &Context, n: usize) -> String {
    match context {
        Context::Free => "-".to_string(),
        Context::Root => "root".to_string(),
        Context::Sibling(c) => c.to_hex(n),
    }
}

pub(crate) fn context_from_str(s: &str, n: usize) -> Option<Context> {
    match s {
        "-" => Some(Context::Free),
        "root" => Some(Context::Root),
        hex => Clade::from_hex(hex, n).ok().map(Context::Sibling),
    }
}

pub fn write_ccd(g: &CcdGraph) -> String {
    let n = g.taxa.len();
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "model {}", g.model).unwrap();
    writeln!(out, "sample-size {}", g.sample_size).unwrap();
    for label in g.taxa.labels() {
        writeln!(out, "taxon {label}").unwrap();
    }
    let mut vertices: Vec<VertexId> = g.vertex_ids().collect();
    vertices.sort_by(|a, b| {
        let (x, y) = (g.vertex(*a), g.vertex(*b));
        (x.clade.len(), &x.clade, &x.context).cmp(&(y.clade.len(), &y.clade, &y.context))
    });
    let mut number = HashMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        number.insert(v, i);
        let r = g.vertex(v);
        let context = context_to_str(&r.context, n);
        writeln!(out, "vertex {} {} {:e} {}", r.clade.to_hex(n), context, r.weight, r.count).unwrap();
    }
    let mut splits: Vec<(usize, usize, usize, f64, u64)> = g
        .split_ids()
        .map(|s| {
            let r = g.split(s);
            (number[&r.parent], number[&r.children[0]], number[&r.children[1]], r.ccp, r.count)
        })
        .collect();
    splits.sort_by_key(|x| (x.0, x.1));
    for (p, a, b, ccp, count) in splits {
        writeln!(out, "split {p} {a} {b} {ccp:e} {count}").unwrap();
    }
    out
}

pub fn read_ccd(text: &str) -> Result<CcdGraph> {
    let err = |line: usize, message: &str| Error::Format { line, message: message.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((i, _)) => return Err(err(i, "missing 'ccd 1' header")),
        None => return Err(Error::EmptyInput("empty CCD file".into())),
    }
    let mut model = None;
    let mut sample_size = 0u64;
    let mut labels = Vec::new();
    let mut graph: Option<CcdGraph> = None;
    let mut ids: Vec<VertexId> = Vec::new();

    for (i, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |k: usize| -> Result<u64> { fields.get(k).and_then(|f| f.parse().ok()).ok_or_else(|| err(i, "bad integer")) };
        let float = |k: usize| -> Result<f64> { fields.get(k).and_then(|f| f.parse().ok()).ok_or_else(|| err(i, "bad number")) };
        match fields[0] {
            "model" if graph.is_none() => model = Some(fields.get(1).ok_or_else(|| err(i, "missing model"))?.parse::<Model>()?),
            "sample-size" if graph.is_none() => sample_size = num(1)?,
            "taxon" if graph.is_none() => labels.push(line["taxon".len()..].trim().to_string()),
            "vertex" => {
                if graph.is_none() {
                    let model = model.ok_or_else(|| err(i, "model must precede vertices"))?;
                    let taxa = TaxonSet::new(labels.clone())?;
                    graph = Some(CcdGraph::empty(model, taxa, sample_size));
                }
                let g = graph.as_mut().unwrap();
                let n = g.taxa.len();
                if fields.len() != 5 {
                    return Err(err(i, "vertex line needs 4 fields"));
                }
                let clade = Clade::from_hex(fields[1], n).map_err(|_| err(i, "bad clade"))?;
                let context = context_from_str(fields[2], n).ok_or_else(|| err(i, "bad context"))?;
                if clade.is_empty() {
                    return Err(err(i, "empty clade"));
                }
                let existing = g.vertex_index.len();
                let v = g.vertex_or_insert(clade, context);
                if g.vertex_index.len() == existing && v != g.root {
                    return Err(err(i, "duplicate vertex"));
                }
                g.vertices[v.0].weight = float(3)?;
                g.vertices[v.0].count = num(4)?;
                ids.push(v);
            }
            "split" => {
                let g = graph.as_mut().ok_or_else(|| err(i, "split before vertices"))?;
                if fields.len() != 6 {
                    return Err(err(i, "split line needs 5 fields"));
                }
                let vertex = |k: usize| -> Result<VertexId> {
                    let idx = num(k)? as usize;
                    ids.get(idx).copied().ok_or_else(|| err(i, "unknown vertex number"))
                };
                let (p, a, b) = (vertex(1)?, vertex(2)?, vertex(3)?);
                let before = g.split_index.len();
                let s = g.split_or_insert(p, a, b);
                if g.split_index.len() == before {
                    return Err(err(i, "duplicate split"));
                }
                g.splits[s.0].ccp = float(4)?;
                g.splits[s.0].count = num(5)?;
            }
            _ => return Err(err(i, &format!("unexpected line '{line}'"))),
        }
    }
    let mut g = graph.ok_or_else(|| Error::EmptyInput("CCD file has no vertices".into()))?;
    g.validate().map_err(|e| Error::Format { line: 0, message: e.to_string() })?;
    g.rebuild_order();
    g.update_probabilities();
    Ok(g)
}
