use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{CredibleSet, Level, LevelGrid};
use crate::ccd::CcdGraph;
use crate::trees::Tree;
use crate::{Error, Result};

/// Probability-based credible sets: thresholds on CCD tree probabilities
/// estimated from `k` trees drawn from the CCD.
#[derive(Clone, Debug)]
pub struct ProbabilityIndex {
    graph: Arc<CcdGraph>,
    grid: LevelGrid,
    sorted: Vec<f64>,
    thresholds: Vec<f64>,
}

/// 1-based index `ceil(alpha * k)`, robust to `alpha * k` landing a hair
/// above an integer.
fn threshold_rank(alpha: f64, k: usize) -> usize {
    ((alpha * k as f64 - 1e-9).ceil() as usize).clamp(1, k)
}

impl ProbabilityIndex {
    pub fn build<R: Rng + ?Sized>(graph: Arc<CcdGraph>, k: usize, grid: LevelGrid, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        let mut probs: Vec<f64> = (0..k).map(|_| graph.tree_probability(&graph.sample_tree(rng))).collect();
        probs.sort_by(|a, b| b.total_cmp(a));
        Ok(Self::from_sorted(graph, probs, grid))
    }

    /// Index over given tree probabilities, already sorted decreasingly.
    pub fn from_sorted(graph: Arc<CcdGraph>, sorted: Vec<f64>, grid: LevelGrid) -> Self {
        let k = sorted.len();
        let thresholds = grid.levels().iter().map(|&a| sorted[threshold_rank(a, k) - 1]).collect();
        ProbabilityIndex { graph, grid, sorted, thresholds }
    }

    pub(crate) fn from_parts(graph: Arc<CcdGraph>, grid: LevelGrid, k: usize, thresholds: Vec<f64>) -> Self {
        ProbabilityIndex { graph, grid, sorted: Vec::with_capacity(k), thresholds }
    }

    pub fn graph(&self) -> &Arc<CcdGraph> {
        &self.graph
    }

    pub fn grid(&self) -> &LevelGrid {
        &self.grid
    }

    /// Number of trees drawn, or 0 for an index read back from text.
    pub fn k(&self) -> usize {
        self.sorted.len()
    }

    /// Drawn tree probabilities, decreasing.
    pub fn sorted_probabilities(&self) -> &[f64] {
        &self.sorted
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Credible level of a tree with CCD probability `p`.
    pub fn level_of_probability(&self, p: f64) -> Level {
        if !(p > 0.0) {
            return Level::INFINITE;
        }
        let i = self.thresholds.partition_point(|&t| p < t);
        self.grid.levels().get(i).map_or(Level::INFINITE, |&a| Level(a))
    }
}

impl CredibleSet for ProbabilityIndex {
    fn level(&self, tree: &Tree) -> Level {
        self.level_of_probability(self.graph.tree_probability(tree))
    }

    fn draw(&self, rng: &mut dyn RngCore) -> Tree {
        self.graph.sample_tree(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccd::Model;
    use crate::trees::{parse_newick, TreeSample};

    fn graph() -> Arc<CcdGraph> {
        let a = parse_newick("(((A,B),C),D);", None).unwrap();
        let b = parse_newick("((A,(B,C)),D);", Some(a.taxa())).unwrap();
        let sample = TreeSample::from_counts([(a, 3), (b, 1)]).unwrap();
        Arc::new(CcdGraph::build(&sample, Model::Ccd1).unwrap())
    }

    #[test]
    fn index_arithmetic() {
        assert_eq!(threshold_rank(0.5, 4), 2);
        assert_eq!(threshold_rank(0.95, 10000), 9500);
        assert_eq!(threshold_rank(0.001, 10), 1);
        let idx = ProbabilityIndex::from_sorted(graph(), vec![0.4, 0.3, 0.2, 0.1], LevelGrid::new(vec![0.5, 1.0]).unwrap());
        assert_eq!(idx.thresholds(), &[0.3, 0.1]);
        assert_eq!(idx.level_of_probability(0.3), Level(0.5));
        assert_eq!(idx.level_of_probability(0.29), Level(1.0));
        assert_eq!(idx.level_of_probability(0.05), Level::INFINITE);
        assert_eq!(idx.level_of_probability(0.0), Level::INFINITE);
    }

    #[test]
    fn single_tree_thresholds_are_one() {
        let a = parse_newick("((A,B),C);", None).unwrap();
        let g = Arc::new(CcdGraph::build(&TreeSample::from_trees([a.clone()]).unwrap(), Model::Ccd1).unwrap());
        let idx = ProbabilityIndex::build(g, 50, LevelGrid::default(), &mut crate::seeded_rng(1)).unwrap();
        assert!(idx.thresholds().iter().all(|&t| t == 1.0));
        assert_eq!(idx.level(&a), Level(0.001));
    }
}
