use std::sync::Arc;

use indexmap::IndexMap;

use super::{TaxonSet, Tree};
use crate::{Error, Result};

/// A multiset of trees on one taxon set, e.g. an MCMC sample after burn-in.
///
/// Unique topologies are kept once with their frequency; the original
/// sequence is kept as indices into the unique list.
#[derive(Clone, Debug)]
pub struct TreeSample {
    taxa: Arc<TaxonSet>,
    unique: IndexMap<Tree, u64>,
    sequence: Vec<usize>,
}

impl TreeSample {
    pub fn from_trees(trees: impl IntoIterator<Item = Tree>) -> Result<Self> {
        let mut iter = trees.into_iter().peekable();
        let taxa = match iter.peek() {
            Some(t) => t.taxa().clone(),
            None => return Err(Error::EmptyInput("tree sample is empty".into())),
        };
        let mut unique: IndexMap<Tree, u64> = IndexMap::new();
        let mut sequence = Vec::new();
        for tree in iter {
            if !tree.taxa().same_as(&taxa) {
                return Err(Error::Taxon("trees in a sample must share one taxon set".into()));
            }
            let entry = unique.entry(tree);
            let idx = entry.index();
            *entry.or_insert(0) += 1;
            sequence.push(idx);
        }
        Ok(TreeSample { taxa, unique, sequence })
    }

    /// Sample with explicit multiplicities; zero counts are dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (Tree, u64)>) -> Result<Self> {
        let mut trees = Vec::new();
        for (tree, count) in counts {
            trees.extend(std::iter::repeat_n(tree, count as usize));
        }
        Self::from_trees(trees)
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    /// Total number of trees `m`, counting multiplicity.
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// The `i`-th tree of the original sequence.
    pub fn tree(&self, i: usize) -> &Tree {
        self.unique.get_index(self.sequence[i]).unwrap().0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tree> + '_ {
        self.sequence.iter().map(|&i| self.unique.get_index(i).unwrap().0)
    }

    /// Unique topologies with frequencies, in order of first appearance.
    pub fn unique(&self) -> impl ExactSizeIterator<Item = (&Tree, u64)> + '_ {
        self.unique.iter().map(|(t, &c)| (t, c))
    }

    pub fn n_unique(&self) -> usize {
        self.unique.len()
    }

    pub fn frequency(&self, tree: &Tree) -> u64 {
        self.unique.get(tree).copied().unwrap_or(0)
    }
}
