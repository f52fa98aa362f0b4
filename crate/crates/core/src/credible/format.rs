//! Text formats for credible-set indexes.
//!
//! Every file starts with `credible 1` and a `method` line. Floats are
//! written with 17 significant digits and infinite levels as `inf`. The
//! probability and CCD formats refer to a CCD graph stored separately.

use std::fmt::Write as _;
use std::sync::Arc;

use super::credible_ccd::{RemovalStep, Unit};
use super::{CredibleCcd, FrequencyIndex, LevelGrid, Method, ProbabilityIndex};
use crate::ccd::{context_from_str, context_to_str, CcdGraph, Removed, SplitId, VertexId};
use crate::trees::{parse_newick, Clade, Tree};
use crate::{Error, Result};

const HEADER: &str = "credible 1";

fn float(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn header(method: Method) -> String {
    format!("{HEADER}\nmethod {method}\n")
}

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, method: Method) -> Result<Self> {
        let mut inner: Box<dyn Iterator<Item = (usize, &str)>> =
            Box::new(text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()));
        match inner.next() {
            Some((_, HEADER)) => {}
            Some((i, _)) => return Err(format_err(i, "missing 'credible 1' header")),
            None => return Err(Error::EmptyInput("empty credible-set file".into())),
        }
        match inner.next() {
            Some((i, l)) => {
                let found: Method = l.strip_prefix("method ").ok_or_else(|| format_err(i, "missing method"))?.parse()?;
                if found != method {
                    return Err(format_err(i, &format!("expected method {method}, found {found}")));
                }
            }
            None => return Err(format_err(1, "missing method")),
        }
        Ok(Lines { inner })
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        self.inner.next()
    }
}

fn format_err(line: usize, message: &str) -> Error {
    Error::Format { line, message: message.to_string() }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse().map_err(|_| format_err(line, &format!("bad number '{s}'")))
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| format_err(line, &format!("bad integer '{s}'")))
}

pub fn write_frequency_index(idx: &FrequencyIndex) -> String {
    let mut out = header(Method::Frequency);
    for (&a, &(rank, count)) in idx.grid().levels().iter().zip(idx.thresholds()) {
        writeln!(out, "level {} {rank} {count}", float(a)).unwrap();
    }
    for (t, c) in idx.ranked() {
        writeln!(out, "tree {c} {}", t.to_newick()).unwrap();
    }
    out
}

pub fn read_frequency_index(text: &str) -> Result<FrequencyIndex> {
    let mut levels = Vec::new();
    let mut stored = Vec::new();
    let mut ranked: Vec<(Tree, u64)> = Vec::new();
    for (i, line) in Lines::new(text, Method::Frequency)? {
        let mut fields = line.splitn(3, ' ');
        match (fields.next(), fields.next(), fields.next()) {
            (Some("level"), Some(a), Some(rest)) => {
                let (rank, count) = rest.split_once(' ').ok_or_else(|| format_err(i, "level line needs 3 fields"))?;
                levels.push(parse_f64(a, i)?);
                stored.push((parse_usize(rank, i)?, parse_usize(count, i)? as u64));
            }
            (Some("tree"), Some(c), Some(newick)) => {
                let taxa = ranked.first().map(|(t, _)| t.taxa().clone());
                let tree = parse_newick(newick, taxa.as_ref())?;
                ranked.push((tree, parse_usize(c, i)? as u64));
            }
            _ => return Err(format_err(i, &format!("unexpected line '{line}'"))),
        }
    }
    if ranked.is_empty() {
        return Err(Error::EmptyInput("frequency index lists no trees".into()));
    }
    if ranked.windows(2).any(|w| w[0].1 < w[1].1) {
        return Err(format_err(0, "trees are not sorted by frequency"));
    }
    let idx = FrequencyIndex::from_ranked(ranked, LevelGrid::new(levels)?);
    if idx.thresholds() != stored.as_slice() {
        return Err(format_err(0, "stored thresholds do not match the listed trees"));
    }
    Ok(idx)
}

pub fn write_probability_index(idx: &ProbabilityIndex) -> String {
    let mut out = header(Method::Probability);
    writeln!(out, "k {}", idx.k()).unwrap();
    for (&a, &p) in idx.grid().levels().iter().zip(idx.thresholds()) {
        writeln!(out, "level {} {}", float(a), float(p)).unwrap();
    }
    out
}

pub fn read_probability_index(text: &str, graph: Arc<CcdGraph>) -> Result<ProbabilityIndex> {
    let mut k = 0;
    let mut levels = Vec::new();
    let mut thresholds = Vec::new();
    for (i, line) in Lines::new(text, Method::Probability)? {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["k", v] => k = parse_usize(v, i)?,
            ["level", a, p] => {
                levels.push(parse_f64(a, i)?);
                thresholds.push(parse_f64(p, i)?);
            }
            _ => return Err(format_err(i, &format!("unexpected line '{line}'"))),
        }
    }
    if thresholds.windows(2).any(|w| w[0] < w[1]) {
        return Err(format_err(0, "thresholds must not increase"));
    }
    Ok(ProbabilityIndex::from_parts(graph, LevelGrid::new(levels)?, k, thresholds))
}

fn vertex_key(g: &CcdGraph, v: VertexId) -> String {
    let n = g.taxa().len();
    let r = g.vertex(v);
    format!("{} {}", r.clade.to_hex(n), context_to_str(&r.context, n))
}

fn split_key(g: &CcdGraph, s: SplitId) -> String {
    let r = g.split(s);
    format!("{} {}", vertex_key(g, r.parent), g.vertex(r.children[0]).clade.to_hex(g.taxa().len()))
}

pub fn write_credible_ccd(c: &CredibleCcd) -> String {
    let g = c.graph();
    let mut out = header(Method::Ccd);
    writeln!(out, "model {}", g.model()).unwrap();
    writeln!(out, "final {}", float(c.final_mass())).unwrap();
    for step in c.steps() {
        let unit = match step.unit {
            Unit::Clade(v) => format!("clade {}", vertex_key(g, v)),
            Unit::Split(s) => format!("split {}", split_key(g, s)),
        };
        writeln!(out, "step {} {} {unit}", float(step.mass), float(step.probability)).unwrap();
    }
    for v in g.vertex_ids() {
        writeln!(out, "clade {} {}", vertex_key(g, v), float(c.vertex_level(v))).unwrap();
    }
    for s in g.split_ids() {
        writeln!(out, "split {} {}", split_key(g, s), float(c.split_level(s))).unwrap();
    }
    out
}

pub fn read_credible_ccd(text: &str, graph: Arc<CcdGraph>) -> Result<CredibleCcd> {
    let g = graph.clone();
    let n = g.taxa().len();
    let vertex = |hex: &str, ctx: &str, i: usize| -> Result<VertexId> {
        let clade = Clade::from_hex(hex, n).map_err(|_| format_err(i, "bad clade"))?;
        let ctx = context_from_str(ctx, n).ok_or_else(|| format_err(i, "bad context"))?;
        g.find_vertex(&clade, &ctx).ok_or_else(|| format_err(i, "clade not in the CCD"))
    };
    let split = |hex: &str, ctx: &str, left: &str, i: usize| -> Result<SplitId> {
        let v = vertex(hex, ctx, i)?;
        let left = Clade::from_hex(left, n).map_err(|_| format_err(i, "bad clade"))?;
        g.find_split(v, &left).ok_or_else(|| format_err(i, "split not in the CCD"))
    };
    let mut vertex_levels = vec![f64::NAN; g.vertices.len()];
    let mut split_levels = vec![f64::NAN; g.splits.len()];
    let mut steps = Vec::new();
    let mut final_mass = None;
    for (i, line) in Lines::new(text, Method::Ccd)? {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["model", m] => {
                if m.parse::<crate::ccd::Model>()? != g.model() {
                    return Err(format_err(i, "model does not match the CCD"));
                }
            }
            ["final", m] => final_mass = Some(parse_f64(m, i)?),
            ["step", mass, p, "clade", hex, ctx] => steps.push(RemovalStep {
                unit: Unit::Clade(vertex(hex, ctx, i)?),
                probability: parse_f64(p, i)?,
                mass: parse_f64(mass, i)?,
                removed: Removed::default(),
            }),
            ["step", mass, p, "split", hex, ctx, left] => steps.push(RemovalStep {
                unit: Unit::Split(split(hex, ctx, left, i)?),
                probability: parse_f64(p, i)?,
                mass: parse_f64(mass, i)?,
                removed: Removed::default(),
            }),
            ["clade", hex, ctx, level] => vertex_levels[vertex(hex, ctx, i)?.0] = parse_f64(level, i)?,
            ["split", hex, ctx, left, level] => split_levels[split(hex, ctx, left, i)?.0] = parse_f64(level, i)?,
            _ => return Err(format_err(i, &format!("unexpected line '{line}'"))),
        }
    }
    if vertex_levels.iter().chain(&split_levels).any(|l| l.is_nan()) {
        return Err(format_err(0, "levels missing for part of the CCD"));
    }
    let mut c = CredibleCcd::from_levels(graph, vertex_levels, split_levels);
    c.set_steps(steps, final_mass.ok_or_else(|| format_err(0, "missing final mass"))?);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccd::Model;
    use crate::credible::CredibleSet;
    use crate::trees::{random::random_tree, TaxonSet, TreeSample};

    fn sample() -> TreeSample {
        let taxa = TaxonSet::new((0..7).map(|i| format!("t{i}"))).unwrap();
        let mut rng = crate::seeded_rng(11);
        let base: Vec<Tree> = (0..4).map(|_| random_tree(&taxa, &mut rng)).collect();
        TreeSample::from_trees((0..40).map(|i| base[(i * i) % 4].clone())).unwrap()
    }

    #[test]
    fn frequency_round_trip() {
        let s = sample();
        let idx = FrequencyIndex::build(&s, LevelGrid::uniform(20)).unwrap();
        let text = write_frequency_index(&idx);
        let back = read_frequency_index(&text).unwrap();
        assert_eq!(write_frequency_index(&back), text);
        for t in s.iter() {
            assert_eq!(idx.level(t), back.level(t));
        }
    }

    #[test]
    fn probability_round_trip() {
        let s = sample();
        let g = Arc::new(CcdGraph::build(&s, Model::Ccd1).unwrap());
        let idx = ProbabilityIndex::build(g.clone(), 500, LevelGrid::uniform(50), &mut crate::seeded_rng(2)).unwrap();
        let back = read_probability_index(&write_probability_index(&idx), g).unwrap();
        assert_eq!(back.thresholds(), idx.thresholds());
    }

    #[test]
    fn credible_ccd_round_trip() {
        let s = sample();
        for model in [Model::Ccd0, Model::Ccd1, Model::Ccd2] {
            let g = Arc::new(CcdGraph::build(&s, model).unwrap());
            let c = CredibleCcd::build(g.clone()).unwrap();
            let text = write_credible_ccd(&c);
            let back = read_credible_ccd(&text, g).unwrap();
            assert_eq!(write_credible_ccd(&back), text);
            for t in s.iter() {
                assert_eq!(c.level(t), back.level(t));
            }
            let alpha = c.steps().last().map_or(1.0, |s| s.mass);
            let a = c.materialize(alpha).unwrap();
            let b = back.materialize(alpha).unwrap();
            assert_eq!(crate::ccd::write_ccd(&a), crate::ccd::write_ccd(&b));
        }
        assert!(read_credible_ccd("credible 1\nmethod frequency\n", Arc::new(CcdGraph::build(&s, Model::Ccd1).unwrap())).is_err());
    }
}
