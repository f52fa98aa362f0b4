use std::sync::Arc;

use rand::RngCore;

use super::{CredibleSet, Level};
use crate::ccd::{CcdGraph, Context, Model, Removed, SplitId, VertexId};
use crate::trees::{Clade, CladeSplit, Tree};
use crate::{Error, Result};

/// Units with probability within this factor of the minimum count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// What one removal iteration picks: a clade (CCD0) or a clade split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Clade(VertexId),
    Split(SplitId),
}

/// One iteration of the removal loop.
#[derive(Clone, Debug)]
pub struct RemovalStep {
    pub unit: Unit,
    /// Probability of `unit` in the CCD it was removed from.
    pub probability: f64,
    /// Mass of the original distribution left before this step; the
    /// credible level of everything removed in it.
    pub mass: f64,
    pub removed: Removed,
}

/// Nested credible CCDs obtained by greedily removing the least probable
/// clade (CCD0) or clade split (CCD1, CCD2) until one tree is left.
///
/// Ids refer to the original graph.
#[derive(Clone, Debug)]
pub struct CredibleCcd {
    graph: Arc<CcdGraph>,
    steps: Vec<RemovalStep>,
    vertex_levels: Vec<f64>,
    split_levels: Vec<f64>,
    final_mass: f64,
}

fn unit_probability(g: &CcdGraph, unit: Unit) -> f64 {
    match unit {
        Unit::Clade(v) => g.vertex(v).probability,
        Unit::Split(s) => g.split(s).probability,
    }
}

/// Next unit to remove: least probable, then fewest trees, then smallest key.
fn next_unit(g: &CcdGraph) -> Option<(Unit, f64)> {
    let units: Vec<Unit> = match g.model() {
        Model::Ccd0 => g
            .vertex_ids()
            .filter(|&v| v != g.root() && !g.vertex(v).is_leaf())
            .map(Unit::Clade)
            .collect(),
        _ => g.split_ids().map(Unit::Split).collect(),
    };
    let candidates: Vec<(Unit, f64)> = units
        .into_iter()
        .map(|u| (u, unit_probability(g, u)))
        .filter(|&(_, p)| p < 1.0 - 1e-12)
        .collect();
    let min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tied: Vec<(Unit, f64)> = candidates.into_iter().filter(|c| c.1 <= min * (1.0 + TIE_TOLERANCE)).collect();
    if tied.len() <= 1 {
        return tied.into_iter().next();
    }
    let (inside, outside) = g.log_tree_counts();
    let trees = |u: Unit| match u {
        Unit::Clade(v) => inside[v.0] + outside[v.0],
        Unit::Split(s) => {
            let r = g.split(s);
            outside[r.parent.0] + inside[r.children[0].0] + inside[r.children[1].0]
        }
    };
    let fewest = tied.iter().map(|c| trees(c.0)).fold(f64::INFINITY, f64::min);
    tied.into_iter()
        .filter(|c| trees(c.0) <= fewest + 1e-9)
        .min_by(|a, b| unit_key(g, a.0).cmp(&unit_key(g, b.0)))
}

fn unit_key(g: &CcdGraph, unit: Unit) -> (Clade, Context, Clade) {
    match unit {
        Unit::Clade(v) => {
            let r = g.vertex(v);
            (r.clade.clone(), r.context.clone(), Clade::empty(0))
        }
        Unit::Split(s) => {
            let r = g.split(s);
            let p = g.vertex(r.parent);
            (p.clade.clone(), p.context.clone(), g.vertex(r.children[0]).clade.clone())
        }
    }
}

/// Removes `unit` with its cascade and renormalises the remaining graph.
fn remove_unit(g: &mut CcdGraph, unit: Unit) -> Result<Removed> {
    let mut removed = Removed::default();
    match unit {
        Unit::Clade(v) => g.delete_vertex(v, &mut removed)?,
        Unit::Split(s) => g.delete_split(s, &mut removed)?,
    }
    match g.model() {
        Model::Ccd0 => g.normalize_ccd0()?,
        _ => g.propagate_removal(),
    }
    g.update_probabilities();
    Ok(removed)
}

impl CcdGraph {
    /// Bottom-up: every clade whose split ccps sum to `p` rescales them to
    /// sum to 1 and multiplies the ccps of its parent splits by `p`.
    pub(crate) fn propagate_removal(&mut self) {
        let order: Vec<VertexId> = self.topological_order().collect();
        for v in order {
            if self.vertices[v.0].is_leaf() {
                continue;
            }
            let p: f64 = self.vertices[v.0].splits.iter().map(|s| self.splits[s.0].ccp).sum();
            if p == 1.0 {
                continue;
            }
            for i in 0..self.vertices[v.0].splits.len() {
                let s = self.vertices[v.0].splits[i];
                self.splits[s.0].ccp /= p;
            }
            for i in 0..self.vertices[v.0].parents.len() {
                let s = self.vertices[v.0].parents[i];
                self.splits[s.0].ccp *= p;
            }
        }
    }
}

impl CredibleCcd {
    pub fn build(graph: Arc<CcdGraph>) -> Result<Self> {
        let mut work = (*graph).clone();
        let mut mass = 1.0f64;
        let mut steps = Vec::new();
        let mut vertex_levels = vec![f64::NAN; work.vertices.len()];
        let mut split_levels = vec![f64::NAN; work.splits.len()];
        while let Some((unit, p)) = next_unit(&work) {
            let removed = remove_unit(&mut work, unit)?;
            for v in &removed.vertices {
                vertex_levels[v.0] = mass;
            }
            for s in &removed.splits {
                split_levels[s.0] = mass;
            }
            steps.push(RemovalStep { unit, probability: p, mass, removed });
            mass *= 1.0 - p;
        }
        for l in vertex_levels.iter_mut().chain(split_levels.iter_mut()) {
            if l.is_nan() {
                *l = mass;
            }
        }
        Ok(CredibleCcd { graph, steps, vertex_levels, split_levels, final_mass: mass })
    }

    pub(crate) fn from_levels(graph: Arc<CcdGraph>, vertex_levels: Vec<f64>, split_levels: Vec<f64>) -> Self {
        let final_mass = vertex_levels.iter().chain(&split_levels).copied().fold(1.0, f64::min);
        CredibleCcd { graph, steps: Vec::new(), vertex_levels, split_levels, final_mass }
    }

    pub(crate) fn set_steps(&mut self, steps: Vec<RemovalStep>, final_mass: f64) {
        self.steps = steps;
        self.final_mass = final_mass;
    }

    pub fn graph(&self) -> &Arc<CcdGraph> {
        &self.graph
    }

    /// Removal iterations in order; empty for an annotation read from text.
    pub fn steps(&self) -> &[RemovalStep] {
        &self.steps
    }

    /// Mass left when a single tree remains.
    pub fn final_mass(&self) -> f64 {
        self.final_mass
    }

    pub fn vertex_level(&self, v: VertexId) -> f64 {
        self.vertex_levels[v.0]
    }

    pub fn split_level(&self, s: SplitId) -> f64 {
        self.split_levels[s.0]
    }

    /// Credible level of a clade, across all its contexts.
    pub fn clade_level(&self, clade: &Clade) -> Level {
        self.graph
            .vertices_of_clade(clade)
            .map(|v| Level(self.vertex_levels[v.0]))
            .fold(Level::INFINITE, |a, b| if b < a { b } else { a })
    }

    /// Credible level of a clade split, across all contexts of its parent.
    pub fn clade_split_level(&self, split: &CladeSplit) -> Level {
        self.graph
            .vertices_of_clade(&split.parent)
            .filter_map(|v| self.graph.find_split(v, &split.left))
            .map(|s| Level(self.split_levels[s.0]))
            .fold(Level::INFINITE, |a, b| if b < a { b } else { a })
    }

    /// The credible CCD for level `alpha`: the first CCD of the removal
    /// sequence whose mass is at most `alpha`. It holds exactly the trees
    /// whose level is at most `alpha`.
    pub fn materialize(&self, alpha: f64) -> Result<CcdGraph> {
        if alpha < self.final_mass {
            return Err(Error::InvalidArgument(format!(
                "level {alpha} is below the smallest credible level {}",
                self.final_mass
            )));
        }
        let mut work = (*self.graph).clone();
        for step in &self.steps {
            if step.mass <= alpha {
                break;
            }
            remove_unit(&mut work, step.unit)?;
        }
        work.compact();
        Ok(work)
    }
}

impl CredibleSet for CredibleCcd {
    fn level(&self, tree: &Tree) -> Level {
        let g = &self.graph;
        if !tree.taxa().same_as(g.taxa()) {
            return Level::INFINITE;
        }
        let mut level = Level(self.final_mass);
        match g.model() {
            Model::Ccd0 => {
                for c in tree.clades() {
                    match g.find_vertex(c, &Context::Free) {
                        Some(v) => level = Level(level.0.max(self.vertex_levels[v.0])),
                        None => return Level::INFINITE,
                    }
                }
                if g.tree_split_ids(tree).is_none() {
                    return Level::INFINITE;
                }
            }
            _ => match g.tree_split_ids(tree) {
                Some(ids) => {
                    for s in ids {
                        level = Level(level.0.max(self.split_levels[s.0]));
                    }
                }
                None => return Level::INFINITE,
            },
        }
        level
    }

    fn draw(&self, rng: &mut dyn RngCore) -> Tree {
        self.graph.sample_tree(rng)
    }

    fn sample_within(&self, alpha: f64, rng: &mut dyn RngCore, _max_attempts: u64) -> Result<Tree> {
        Ok(self.materialize(alpha)?.sample_tree(rng))
    }

    fn sample_many_within(&self, alpha: f64, n: usize, rng: &mut dyn RngCore, _max_attempts: u64) -> Result<Vec<Tree>> {
        let g = self.materialize(alpha)?;
        Ok((0..n).map(|_| g.sample_tree(rng)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{parse_newick, TreeSample};

    fn build(newicks: &[(&str, u64)], model: Model) -> (CredibleCcd, Vec<Tree>) {
        let mut trees = Vec::new();
        let mut taxa = None;
        for &(s, k) in newicks {
            let t = parse_newick(s, taxa.as_ref()).unwrap();
            taxa = Some(t.taxa().clone());
            trees.push((t, k));
        }
        let sample = TreeSample::from_counts(trees.clone()).unwrap();
        let g = Arc::new(CcdGraph::build(&sample, model).unwrap());
        (CredibleCcd::build(g).unwrap(), trees.into_iter().map(|t| t.0).collect())
    }

    #[test]
    fn single_tree_has_no_steps() {
        let (c, ts) = build(&[("((A,B),(C,D));", 4)], Model::Ccd1);
        assert!(c.steps().is_empty());
        assert_eq!(c.final_mass(), 1.0);
        assert_eq!(c.level(&ts[0]), Level(1.0));
    }

    #[test]
    fn one_choice_point() {
        let (c, ts) = build(&[("((A,B),C);", 3), ("(A,(B,C));", 1)], Model::Ccd1);
        assert_eq!(c.steps().len(), 1);
        assert_eq!(c.steps()[0].mass, 1.0);
        assert!((c.final_mass() - 0.75).abs() < 1e-15);
        assert_eq!(c.level(&ts[1]), Level(1.0));
        assert!((c.level(&ts[0]).0 - 0.75).abs() < 1e-15);
        let d = c.materialize(0.8).unwrap();
        assert!(d.is_single_tree());
        assert_eq!(d.tree_probability(&ts[0]), 1.0);
        assert!(c.materialize(0.5).is_err());
    }

    #[test]
    fn ccd0_levels_cover_removed_clades() {
        let (c, ts) = build(
            &[("((A,B),((C,D),E));", 5), ("(((A,B),C),(D,E));", 3), ("((A,(B,C)),(D,E));", 2)],
            Model::Ccd0,
        );
        let masses: Vec<f64> = c.steps().iter().map(|s| s.mass).collect();
        assert!(masses.windows(2).all(|w| w[0] >= w[1]));
        let levels: Vec<Level> = ts.iter().map(|t| c.level(t)).collect();
        assert!(levels.iter().all(|l| !l.is_infinite()));
        let foreign = parse_newick("((A,C),(B,(D,E)));", Some(ts[0].taxa())).unwrap();
        assert_eq!(c.level(&foreign), Level::INFINITE);
    }
}
