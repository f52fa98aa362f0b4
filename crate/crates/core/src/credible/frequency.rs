use std::collections::HashMap;

use rand::{Rng, RngCore};

use super::{CredibleSet, Level, LevelGrid};
use crate::trees::{Tree, TreeSample};
use crate::{Error, Result};

/// Frequency-based credible sets over a tree sample.
///
/// The `alpha` set holds every tree at least as frequent as the tree at
/// which the cumulative frequency first reaches `alpha`.
#[derive(Clone, Debug)]
pub struct FrequencyIndex {
    grid: LevelGrid,
    ranked: Vec<(Tree, u64)>,
    rank_of: HashMap<Tree, usize>,
    cumulative: Vec<u64>,
    total: u64,
    /// Per level: 0-based rank and count of the last tree needed.
    thresholds: Vec<(usize, u64)>,
}

impl FrequencyIndex {
    pub fn build(sample: &TreeSample, grid: LevelGrid) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput("empty tree sample".into()));
        }
        let mut ranked: Vec<(Tree, u64)> = sample.unique().map(|(t, c)| (t.clone(), c)).collect();
        // stable: equal counts keep order of first appearance
        ranked.sort_by(|a, b| b.1.cmp(&a.1));
        Ok(Self::from_ranked(ranked, grid))
    }

    pub(crate) fn from_ranked(ranked: Vec<(Tree, u64)>, grid: LevelGrid) -> Self {
        let mut cumulative = Vec::with_capacity(ranked.len());
        let mut acc = 0u64;
        for (_, c) in &ranked {
            acc += c;
            cumulative.push(acc);
        }
        let total = acc;
        let thresholds = grid
            .levels()
            .iter()
            .map(|&alpha| {
                let target = alpha * total as f64 * (1.0 - 1e-12);
                let rank = cumulative.partition_point(|&c| (c as f64) < target).min(ranked.len() - 1);
                (rank, ranked[rank].1)
            })
            .collect();
        let rank_of = ranked.iter().enumerate().map(|(i, (t, _))| (t.clone(), i)).collect();
        FrequencyIndex { grid, ranked, rank_of, cumulative, total, thresholds }
    }

    pub fn grid(&self) -> &LevelGrid {
        &self.grid
    }

    /// Unique trees by decreasing frequency.
    pub fn ranked(&self) -> &[(Tree, u64)] {
        &self.ranked
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Per-level rank (0-based) and count of the threshold tree.
    pub fn thresholds(&self) -> &[(usize, u64)] {
        &self.thresholds
    }

    pub fn frequency(&self, tree: &Tree) -> u64 {
        self.rank_of.get(tree).map_or(0, |&i| self.ranked[i].1)
    }

    /// Trees in the `alpha` set for the grid level at or above `alpha`.
    pub fn set_at(&self, alpha: f64) -> &[(Tree, u64)] {
        let i = self.grid.levels().partition_point(|&a| a < alpha).min(self.grid.len() - 1);
        let count = self.thresholds[i].1;
        let end = self.ranked.partition_point(|(_, c)| *c >= count);
        &self.ranked[..end]
    }
}

impl CredibleSet for FrequencyIndex {
    fn level(&self, tree: &Tree) -> Level {
        let count = self.frequency(tree);
        if count == 0 {
            return Level::INFINITE;
        }
        let i = self.thresholds.partition_point(|&(_, t)| count < t);
        self.grid.levels().get(i).map_or(Level::INFINITE, |&a| Level(a))
    }

    fn draw(&self, rng: &mut dyn RngCore) -> Tree {
        let u = rng.random_range(0..self.total);
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.ranked[i].0.clone()
    }
}
