use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::trees::{Clade, TaxonSet, Tree, TreeSample};
use crate::{Error, Result};

/// The CCD parametrisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    /// Clade weights, normalised globally.
    Ccd0,
    /// Clade split probabilities conditional on the parent clade.
    Ccd1,
    /// Clade split probabilities conditional on the parent clade and its sibling.
    Ccd2,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Ccd0 => "ccd0",
            Model::Ccd1 => "ccd1",
            Model::Ccd2 => "ccd2",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ccd0" => Ok(Model::Ccd0),
            "ccd1" => Ok(Model::Ccd1),
            "ccd2" => Ok(Model::Ccd2),
            _ => Err(Error::InvalidArgument(format!("unknown model '{s}'"))),
        }
    }
}

/// What a vertex is conditioned on besides its clade.
///
/// CCD0 and CCD1 vertices are plain clades (`Free`). CCD2 vertices are
/// clades paired with their sibling clade, or `Root` for the full taxon set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    Free,
    Root,
    Sibling(Clade),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitId(pub usize);

/// A clade vertex of the CCD graph.
#[derive(Clone, Debug)]
pub struct CladeRecord {
    pub clade: Clade,
    pub context: Context,
    /// Clade weight `w(C)` (CCD0 only; 1 elsewhere).
    pub weight: f64,
    /// `ln Z(C)` of the CCD0 partition function.
    pub log_partition: f64,
    /// Probability that a tree drawn from the CCD contains this vertex.
    pub probability: f64,
    /// Number of sampled trees containing this vertex.
    pub count: u64,
    pub(crate) splits: Vec<SplitId>,
    pub(crate) parents: Vec<SplitId>,
    pub(crate) alive: bool,
}

impl CladeRecord {
    pub fn is_leaf(&self) -> bool {
        self.clade.len() == 1
    }
}

/// A clade split vertex of the CCD graph.
#[derive(Clone, Debug)]
pub struct SplitRecord {
    pub parent: VertexId,
    /// Child vertices; the first has the smaller clade.
    pub children: [VertexId; 2],
    /// Conditional clade probability.
    pub ccp: f64,
    pub count: u64,
    /// Probability that a tree drawn from the CCD contains this split.
    pub probability: f64,
    pub(crate) alive: bool,
}

/// Vertices and splits deleted by one cascading removal.
#[derive(Clone, Debug, Default)]
pub struct Removed {
    pub vertices: Vec<VertexId>,
    pub splits: Vec<SplitId>,
}

/// The bipartite clade / clade-split graph of a conditional clade distribution.
///
/// Built graphs are immutable from the outside; the credible-set module
/// works on private copies when it prunes vertices.
#[derive(Clone, Debug)]
pub struct CcdGraph {
    pub(crate) model: Model,
    pub(crate) taxa: Arc<TaxonSet>,
    pub(crate) vertices: Vec<CladeRecord>,
    pub(crate) splits: Vec<SplitRecord>,
    pub(crate) vertex_index: HashMap<(Clade, Context), VertexId>,
    pub(crate) split_index: HashMap<(VertexId, Clade), SplitId>,
    pub(crate) root: VertexId,
    pub(crate) sample_size: u64,
    /// All vertex ids by increasing clade size; dead ids are skipped on use.
    pub(crate) order: Vec<VertexId>,
}

impl CcdGraph {
    pub(crate) fn empty(model: Model, taxa: Arc<TaxonSet>, sample_size: u64) -> Self {
        let n = taxa.len();
        let root_context = if model == Model::Ccd2 { Context::Root } else { Context::Free };
        let mut g = CcdGraph {
            model,
            taxa,
            vertices: Vec::new(),
            splits: Vec::new(),
            vertex_index: HashMap::new(),
            split_index: HashMap::new(),
            root: VertexId(0),
            sample_size,
            order: Vec::new(),
        };
        g.root = g.vertex_or_insert(Clade::full(n), root_context);
        g
    }

    pub(crate) fn vertex_or_insert(&mut self, clade: Clade, context: Context) -> VertexId {
        let key = (clade, context);
        if let Some(&v) = self.vertex_index.get(&key) {
            return v;
        }
        let id = VertexId(self.vertices.len());
        self.vertices.push(CladeRecord {
            clade: key.0.clone(),
            context: key.1.clone(),
            weight: 1.0,
            log_partition: 0.0,
            probability: 0.0,
            count: 0,
            splits: Vec::new(),
            parents: Vec::new(),
            alive: true,
        });
        self.vertex_index.insert(key, id);
        id
    }

    pub(crate) fn split_or_insert(&mut self, parent: VertexId, a: VertexId, b: VertexId) -> SplitId {
        let (a, b) = if self.vertices[a.0].clade <= self.vertices[b.0].clade { (a, b) } else { (b, a) };
        let key = (parent, self.vertices[a.0].clade.clone());
        if let Some(&s) = self.split_index.get(&key) {
            return s;
        }
        let id = SplitId(self.splits.len());
        self.splits.push(SplitRecord { parent, children: [a, b], ccp: 0.0, count: 0, probability: 0.0, alive: true });
        self.vertices[parent.0].splits.push(id);
        self.vertices[a.0].parents.push(id);
        self.vertices[b.0].parents.push(id);
        self.split_index.insert(key, id);
        id
    }

    pub(crate) fn rebuild_order(&mut self) {
        let mut order: Vec<VertexId> = (0..self.vertices.len()).map(VertexId).collect();
        order.sort_by_key(|v| (self.vertices[v.0].clade.len(), v.0));
        self.order = order;
    }

    /// Builds a CCD of the given model from the sample frequencies of
    /// clades and clade splits.
    pub fn build(sample: &TreeSample, model: Model) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput("cannot build a CCD from an empty sample".into()));
        }
        match model {
            Model::Ccd0 => Self::build_ccd0(sample),
            Model::Ccd1 | Model::Ccd2 => Self::build_conditional(sample, model),
        }
    }

    fn build_conditional(sample: &TreeSample, model: Model) -> Result<Self> {
        let m = sample.len() as u64;
        let mut g = CcdGraph::empty(model, sample.taxa().clone(), m);
        for (tree, f) in sample.unique() {
            g.vertices[g.root.0].count += f;
            for s in tree.splits() {
                let (ctx, lctx, rctx) = match model {
                    Model::Ccd2 => (
                        s.sibling.map_or(Context::Root, |c| Context::Sibling(c.clone())),
                        Context::Sibling(s.right.clone()),
                        Context::Sibling(s.left.clone()),
                    ),
                    _ => (Context::Free, Context::Free, Context::Free),
                };
                let p = g.vertex_or_insert(s.parent.clone(), ctx);
                let a = g.vertex_or_insert(s.left.clone(), lctx);
                let b = g.vertex_or_insert(s.right.clone(), rctx);
                g.vertices[a.0].count += f;
                g.vertices[b.0].count += f;
                let sid = g.split_or_insert(p, a, b);
                g.splits[sid.0].count += f;
            }
        }
        for s in &mut g.splits {
            s.ccp = s.count as f64 / g.vertices[s.parent.0].count as f64;
        }
        g.rebuild_order();
        g.update_probabilities();
        Ok(g)
    }

    fn build_ccd0(sample: &TreeSample) -> Result<Self> {
        let m = sample.len() as u64;
        let mut counts: indexmap::IndexMap<Clade, u64> = indexmap::IndexMap::new();
        for (tree, f) in sample.unique() {
            for c in tree.clades() {
                *counts.entry(c.clone()).or_insert(0) += f;
            }
        }
        let weights = counts.into_iter().map(|(c, f)| (c, f as f64 / m as f64, f));
        Self::from_weighted_clades(sample.taxa().clone(), weights, m)
    }

    /// CCD0 over the given clades (size >= 2) with their weights.
    ///
    /// Every pair of vertex clades partitioning another vertex clade becomes
    /// a split; clades that cannot be part of any tree are dropped. Leaves
    /// carry weight 1.
    pub fn from_clade_weights(taxa: Arc<TaxonSet>, weights: impl IntoIterator<Item = (Clade, f64)>) -> Result<Self> {
        Self::from_weighted_clades(taxa, weights.into_iter().map(|(c, w)| (c, w, 0)), 0)
    }

    fn from_weighted_clades(
        taxa: Arc<TaxonSet>,
        weights: impl IntoIterator<Item = (Clade, f64, u64)>,
        sample_size: u64,
    ) -> Result<Self> {
        let n = taxa.len();
        let mut g = CcdGraph::empty(Model::Ccd0, taxa, sample_size);
        for i in 0..n {
            let v = g.vertex_or_insert(Clade::singleton(n, i), Context::Free);
            g.vertices[v.0].count = sample_size;
        }
        for (clade, w, count) in weights {
            if clade.len() < 2 || !(w > 0.0) {
                continue;
            }
            let v = g.vertex_or_insert(clade, Context::Free);
            g.vertices[v.0].weight = w;
            g.vertices[v.0].count = count;
        }
        g.rebuild_order();

        // amalgamation: children whose lowest taxon equals the parent's lowest taxon
        let mut by_lowest: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &v in &g.order {
            let low = g.vertices[v.0].clade.lowest().unwrap();
            by_lowest[low].push(v);
        }
        let order = g.order.clone();
        for &v in &order {
            let clade = g.vertices[v.0].clade.clone();
            if clade.len() < 2 {
                continue;
            }
            let low = clade.lowest().unwrap();
            for &d in &by_lowest[low] {
                let dc = &g.vertices[d.0].clade;
                if dc.len() >= clade.len() {
                    break;
                }
                if !dc.is_subset(&clade) {
                    continue;
                }
                let rest = clade.difference(dc);
                if let Some(&r) = g.vertex_index.get(&(rest, Context::Free)) {
                    g.split_or_insert(v, d, r);
                }
            }
        }

        // drop clades that are not part of any tree
        let mut removed = Removed::default();
        let dead_ends: Vec<VertexId> = g
            .order
            .iter()
            .copied()
            .filter(|&v| {
                let r = &g.vertices[v.0];
                (!r.is_leaf() && r.splits.is_empty()) || (v != g.root && r.parents.is_empty())
            })
            .collect();
        for v in dead_ends {
            g.delete_vertex(v, &mut removed)
                .map_err(|_| Error::DegenerateModel("clade weights do not support a single tree".into()))?;
        }
        g.compact();
        g.normalize_ccd0()?;
        g.update_probabilities();
        Ok(g)
    }

    /// Drops dead vertices and splits and renumbers ids.
    pub(crate) fn compact(&mut self) {
        let mut vmap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.alive {
                vmap[i] = vertices.len();
                let mut v = v.clone();
                v.splits.clear();
                v.parents.clear();
                vertices.push(v);
            }
        }
        let mut splits = Vec::new();
        for s in self.splits.iter().filter(|s| s.alive) {
            let id = SplitId(splits.len());
            let mut s = s.clone();
            s.parent = VertexId(vmap[s.parent.0]);
            s.children = [VertexId(vmap[s.children[0].0]), VertexId(vmap[s.children[1].0])];
            vertices[s.parent.0].splits.push(id);
            vertices[s.children[0].0].parents.push(id);
            vertices[s.children[1].0].parents.push(id);
            splits.push(s);
        }
        self.vertex_index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| ((v.clade.clone(), v.context.clone()), VertexId(i)))
            .collect();
        self.split_index = splits
            .iter()
            .enumerate()
            .map(|(i, s)| ((s.parent, vertices[s.children[0].0].clade.clone()), SplitId(i)))
            .collect();
        self.root = VertexId(vmap[self.root.0]);
        self.vertices = vertices;
        self.splits = splits;
        self.rebuild_order();
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    /// Number of trees the graph was estimated from.
    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    pub fn vertex(&self, v: VertexId) -> &CladeRecord {
        &self.vertices[v.0]
    }

    pub fn split(&self, s: SplitId) -> &SplitRecord {
        &self.splits[s.0]
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId).filter(|v| self.vertices[v.0].alive)
    }

    pub fn split_ids(&self) -> impl Iterator<Item = SplitId> + '_ {
        (0..self.splits.len()).map(SplitId).filter(|s| self.splits[s.0].alive)
    }

    /// Live vertices by increasing clade size.
    pub fn topological_order(&self) -> impl DoubleEndedIterator<Item = VertexId> + '_ {
        self.order.iter().copied().filter(|v| self.vertices[v.0].alive)
    }

    /// Clade splits of a vertex.
    pub fn splits_of(&self, v: VertexId) -> &[SplitId] {
        &self.vertices[v.0].splits
    }

    /// Splits that have `v` as a child.
    pub fn parents_of(&self, v: VertexId) -> &[SplitId] {
        &self.vertices[v.0].parents
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_index.len()
    }

    pub fn n_splits(&self) -> usize {
        self.split_index.len()
    }

    /// Number of distinct clades (contexts collapsed), leaves included.
    pub fn n_clades(&self) -> usize {
        if self.model != Model::Ccd2 {
            return self.n_vertices();
        }
        let distinct: std::collections::HashSet<&Clade> = self.vertex_ids().map(|v| &self.vertices[v.0].clade).collect();
        distinct.len()
    }

    /// Vertices plus splits plus edges (three per split).
    pub fn size(&self) -> usize {
        self.n_vertices() + 4 * self.n_splits()
    }

    pub fn find_vertex(&self, clade: &Clade, context: &Context) -> Option<VertexId> {
        self.vertex_index.get(&(clade.clone(), context.clone())).copied()
    }

    /// The split of `v` whose smaller child is `left`.
    pub fn find_split(&self, v: VertexId, left: &Clade) -> Option<SplitId> {
        self.split_index.get(&(v, left.clone())).copied()
    }

    /// Vertex ids of `clade` across all contexts.
    pub fn vertices_of_clade<'a>(&'a self, clade: &'a Clade) -> Box<dyn Iterator<Item = VertexId> + 'a> {
        match self.model {
            Model::Ccd2 => Box::new(self.vertex_ids().filter(move |v| &self.vertices[v.0].clade == clade)),
            _ => Box::new(self.find_vertex(clade, &Context::Free).into_iter()),
        }
    }

    /// True when every live non-leaf vertex has exactly one split.
    pub fn is_single_tree(&self) -> bool {
        self.vertex_ids().all(|v| {
            let r = &self.vertices[v.0];
            r.is_leaf() || r.splits.len() == 1
        })
    }

    /// Unlinks a split and queues vertices left without splits or parents.
    fn detach_split(&mut self, s: SplitId, removed: &mut Removed, queue: &mut Vec<VertexId>) {
        if !self.splits[s.0].alive {
            return;
        }
        self.splits[s.0].alive = false;
        removed.splits.push(s);
        let SplitRecord { parent, children, .. } = self.splits[s.0].clone();
        let left = self.vertices[children[0].0].clade.clone();
        self.split_index.remove(&(parent, left));
        let p = &mut self.vertices[parent.0];
        p.splits.retain(|&x| x != s);
        if p.alive && p.splits.is_empty() {
            queue.push(parent);
        }
        for c in children {
            let r = &mut self.vertices[c.0];
            r.parents.retain(|&x| x != s);
            if r.alive && r.parents.is_empty() && c != self.root {
                queue.push(c);
            }
        }
    }

    fn delete_queue(&mut self, mut queue: Vec<VertexId>, removed: &mut Removed) -> Result<()> {
        while let Some(v) = queue.pop() {
            if !self.vertices[v.0].alive {
                continue;
            }
            let r = &self.vertices[v.0];
            if v == self.root {
                return Err(Error::StructuralViolation("removal would delete the root clade".into()));
            }
            if r.is_leaf() && r.context == Context::Free {
                return Err(Error::StructuralViolation("removal would delete a leaf clade".into()));
            }
            let key = (r.clade.clone(), r.context.clone());
            self.vertices[v.0].alive = false;
            self.vertex_index.remove(&key);
            removed.vertices.push(v);
            let incident: Vec<SplitId> =
                self.vertices[v.0].parents.iter().chain(&self.vertices[v.0].splits).copied().collect();
            for s in incident {
                self.detach_split(s, removed, &mut queue);
            }
        }
        Ok(())
    }

    /// Removes a vertex and everything that no longer lies on a complete tree.
    pub(crate) fn delete_vertex(&mut self, v: VertexId, removed: &mut Removed) -> Result<()> {
        self.delete_queue(vec![v], removed)
    }

    /// Removes a split and everything that no longer lies on a complete tree.
    pub(crate) fn delete_split(&mut self, s: SplitId, removed: &mut Removed) -> Result<()> {
        let mut queue = Vec::new();
        self.detach_split(s, removed, &mut queue);
        self.delete_queue(queue, removed)
    }

    /// Checks the structural invariants; used by tests and after removals.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::StructuralViolation(m));
        if !self.vertices[self.root.0].alive {
            return bad("root missing".into());
        }
        for v in self.vertex_ids() {
            let r = &self.vertices[v.0];
            if !r.is_leaf() && r.splits.is_empty() {
                return bad(format!("clade {:?} has no split", r.clade));
            }
            if r.is_leaf() && !r.splits.is_empty() {
                return bad(format!("leaf {:?} has a split", r.clade));
            }
            if v != self.root && r.parents.is_empty() {
                return bad(format!("clade {:?} is unreachable", r.clade));
            }
        }
        for s in self.split_ids() {
            let r = &self.splits[s.0];
            let p = &self.vertices[r.parent.0];
            let [a, b] = r.children.map(|c| &self.vertices[c.0]);
            if !(p.alive && a.alive && b.alive) {
                return bad("split references a removed clade".into());
            }
            if !a.clade.is_disjoint(&b.clade) || a.clade.union(&b.clade) != p.clade {
                return bad(format!("split of {:?} does not partition it", p.clade));
            }
        }
        Ok(())
    }

    /// Sets every vertex's and split's model probability with a top-down
    /// pass: the root is reached with probability 1 and each split passes
    /// `reach(parent) * ccp` to both children.
    pub(crate) fn update_probabilities(&mut self) {
        let mut reach = vec![0.0f64; self.vertices.len()];
        reach[self.root.0] = 1.0;
        let order: Vec<VertexId> = self.topological_order().rev().collect();
        for v in order {
            let r = reach[v.0];
            self.vertices[v.0].probability = r;
            for i in 0..self.vertices[v.0].splits.len() {
                let s = self.vertices[v.0].splits[i];
                let sp = r * self.splits[s.0].ccp;
                self.splits[s.0].probability = sp;
                for c in self.splits[s.0].children {
                    reach[c.0] += sp;
                }
            }
        }
    }

    /// Natural-log number of subtrees below each vertex and of tree
    /// completions above it. Dead vertices get `-inf`.
    pub(crate) fn log_tree_counts(&self) -> (Vec<f64>, Vec<f64>) {
        let nv = self.vertices.len();
        let mut inside = vec![f64::NEG_INFINITY; nv];
        for v in self.topological_order() {
            let r = &self.vertices[v.0];
            inside[v.0] = if r.is_leaf() {
                0.0
            } else {
                log_sum_exp(r.splits.iter().map(|s| {
                    let [a, b] = self.splits[s.0].children;
                    inside[a.0] + inside[b.0]
                }))
            };
        }
        let mut outside = vec![f64::NEG_INFINITY; nv];
        outside[self.root.0] = 0.0;
        let order: Vec<VertexId> = self.topological_order().rev().collect();
        for v in order {
            for s in &self.vertices[v.0].splits {
                let [a, b] = self.splits[s.0].children;
                outside[a.0] = log_add(outside[a.0], outside[v.0] + inside[b.0]);
                outside[b.0] = log_add(outside[b.0], outside[v.0] + inside[a.0]);
            }
        }
        (inside, outside)
    }

    /// Natural log of the number of trees the graph represents.
    pub fn log_tree_count(&self) -> f64 {
        self.log_tree_counts().0[self.root.0]
    }
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Convenience for the context a tree's split parent has under `model`.
pub(crate) fn context_for(model: Model, sibling: Option<&Clade>) -> Context {
    match model {
        Model::Ccd2 => sibling.map_or(Context::Root, |c| Context::Sibling(c.clone())),
        _ => Context::Free,
    }
}

impl CcdGraph {
    /// Split ids used by `tree`, or `None` if any clade, context or split
    /// is missing from the graph.
    pub fn tree_split_ids(&self, tree: &Tree) -> Option<Vec<SplitId>> {
        if !tree.taxa().same_as(&self.taxa) {
            return None;
        }
        tree.splits()
            .map(|s| {
                let v = self.find_vertex(s.parent, &context_for(self.model, s.sibling))?;
                self.find_split(v, s.left)
            })
            .collect()
    }
}
