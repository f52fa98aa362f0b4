use rand::Rng;

use super::graph::{log_sum_exp, CcdGraph, Context, Model, SplitId, VertexId};
use crate::trees::{Clade, CladeSplit, Tree};
use crate::{Error, Result};

impl CcdGraph {
    /// Recomputes CCD0 split probabilities from the clade weights:
    /// `Z(leaf) = 1`, `Z(C) = sum over splits of w(C1) Z(C1) w(C2) Z(C2)` and
    /// each split gets its share of `Z(C)`. Everything runs in log space.
    pub(crate) fn normalize_ccd0(&mut self) -> Result<()> {
        let order: Vec<VertexId> = self.topological_order().collect();
        for v in order {
            if self.vertices[v.0].is_leaf() {
                self.vertices[v.0].log_partition = 0.0;
                continue;
            }
            let terms: Vec<f64> = self.vertices[v.0]
                .splits
                .iter()
                .map(|s| {
                    self.splits[s.0]
                        .children
                        .iter()
                        .map(|c| self.vertices[c.0].weight.ln() + self.vertices[c.0].log_partition)
                        .sum::<f64>()
                })
                .collect();
            let z = log_sum_exp(terms.iter().copied());
            if !z.is_finite() {
                return Err(Error::DegenerateModel(format!(
                    "clade {:?} has no tree of positive weight",
                    self.vertices[v.0].clade
                )));
            }
            self.vertices[v.0].log_partition = z;
            for (i, t) in terms.into_iter().enumerate() {
                let s = self.vertices[v.0].splits[i];
                self.splits[s.0].ccp = (t - z).exp();
            }
        }
        Ok(())
    }

    /// Natural-log probability of `tree`, or `-inf` when the tree uses a
    /// clade, context or split the graph does not have.
    pub fn tree_log_probability(&self, tree: &Tree) -> f64 {
        match self.tree_split_ids(tree) {
            Some(ids) => ids.iter().map(|s| self.splits[s.0].ccp.ln()).sum(),
            None => f64::NEG_INFINITY,
        }
    }

    /// Probability of `tree` under the CCD.
    pub fn tree_probability(&self, tree: &Tree) -> f64 {
        self.tree_log_probability(tree).exp()
    }

    /// Builds the tree obtained by picking one split per vertex.
    fn tree_from_choice(&self, mut choose: impl FnMut(VertexId) -> Option<SplitId>) -> Tree {
        Tree::from_expansion(
            self.taxa.clone(),
            self.root,
            |v: &VertexId| {
                if self.vertices[v.0].is_leaf() {
                    return Ok(None);
                }
                let s = choose(*v).ok_or_else(|| Error::StructuralViolation("clade without split".into()))?;
                let [a, b] = self.splits[s.0].children;
                Ok(Some((a, b)))
            },
            |v: &VertexId| self.vertices[v.0].clade.clone(),
        )
        .expect("a validated CCD graph expands to a tree")
    }

    /// The tree of maximum probability and its probability.
    ///
    /// Ties between splits are broken by the first split in insertion order.
    pub fn map_tree(&self) -> (Tree, f64) {
        let nv = self.vertices.len();
        let mut best = vec![f64::NEG_INFINITY; nv];
        let mut choice: Vec<Option<SplitId>> = vec![None; nv];
        for v in self.topological_order() {
            let r = &self.vertices[v.0];
            if r.is_leaf() {
                best[v.0] = 0.0;
                continue;
            }
            for &s in &r.splits {
                let [a, b] = self.splits[s.0].children;
                let value = self.splits[s.0].ccp.ln() + best[a.0] + best[b.0];
                if value > best[v.0] || choice[v.0].is_none() {
                    best[v.0] = value;
                    choice[v.0] = Some(s);
                }
            }
        }
        let tree = self.tree_from_choice(|v| choice[v.0]);
        (tree, best[self.root.0].exp())
    }

    /// Draws a tree: starting at the root, each clade picks one of its
    /// splits with probability equal to its ccp.
    pub fn sample_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> Tree {
        self.tree_from_choice(|v| {
            let splits = &self.vertices[v.0].splits;
            let total: f64 = splits.iter().map(|s| self.splits[s.0].ccp).sum();
            let mut u = rng.random::<f64>() * total;
            for &s in splits {
                u -= self.splits[s.0].ccp;
                if u < 0.0 {
                    return Some(s);
                }
            }
            splits.last().copied()
        })
    }

    /// Probability that a tree from the CCD contains `clade`, summed over
    /// all contexts the clade appears in.
    pub fn clade_probability(&self, clade: &Clade) -> f64 {
        if clade.len() == self.taxa.len() || clade.len() == 1 {
            return if self.vertices_of_clade(clade).next().is_some() { 1.0 } else { 0.0 };
        }
        self.vertices_of_clade(clade).map(|v| self.vertices[v.0].probability).sum()
    }

    /// Probability that a tree from the CCD contains the clade split.
    pub fn split_probability(&self, split: &CladeSplit) -> f64 {
        self.vertices_of_clade(&split.parent)
            .filter_map(|v| self.find_split(v, &split.left))
            .map(|s| self.splits[s.0].probability)
            .sum()
    }

    /// Whether the graph can produce `tree` at all.
    pub fn contains_tree(&self, tree: &Tree) -> bool {
        self.tree_split_ids(tree).is_some()
    }

    /// Entropy of the tree distribution in nats.
    pub fn entropy(&self) -> f64 {
        // H = -sum over splits of P(split) ln ccp(split)
        self.split_ids()
            .map(|s| {
                let r = &self.splits[s.0];
                if r.ccp > 0.0 {
                    -r.probability * r.ccp.ln()
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Root vertex context under this model.
    pub fn root_context(&self) -> Context {
        if self.model == Model::Ccd2 {
            Context::Root
        } else {
            Context::Free
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{parse_newick, TreeSample};

    fn sample(newicks: &[(&str, usize)]) -> TreeSample {
        let mut trees = Vec::new();
        let mut taxa = None;
        for &(s, k) in newicks {
            let t = parse_newick(s, taxa.as_ref()).unwrap();
            taxa = Some(t.taxa().clone());
            trees.extend(std::iter::repeat_n(t, k));
        }
        TreeSample::from_trees(trees).unwrap()
    }

    #[test]
    fn ccd1_example_probability() {
        // two trees sharing the root split {A,B,C}|{D,E}, split differently above
        let s = sample(&[("(((A,B),C),(D,E));", 6), ("((A,(B,C)),(D,E));", 4)]);
        let g = CcdGraph::build(&s, Model::Ccd1).unwrap();
        g.validate().unwrap();
        assert!((g.tree_probability(s.tree(0)) - 0.6).abs() < 1e-12);
        let (map, p) = g.map_tree();
        assert_eq!(&map, s.tree(0));
        assert!((p - 0.6).abs() < 1e-12);
        let abc = Clade::from_indices(5, [0, 1, 2]);
        assert!((g.clade_probability(&abc) - 1.0).abs() < 1e-12);
        let bc = Clade::from_indices(5, [1, 2]);
        assert!((g.clade_probability(&bc) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn unseen_tree_has_zero_probability() {
        let s = sample(&[("((A,B),(C,D));", 3)]);
        let g = CcdGraph::build(&s, Model::Ccd1).unwrap();
        let other = parse_newick("((A,C),(B,D));", Some(s.taxa())).unwrap();
        assert_eq!(g.tree_probability(&other), 0.0);
        let foreign = parse_newick("((A,C),(B,E));", None).unwrap();
        assert_eq!(g.tree_probability(&foreign), 0.0);
    }

    #[test]
    fn ccd0_amalgamates_unsampled_tree() {
        // {C,D,E} is seen split as {C,D}|E and {D,E} is seen elsewhere, so
        // CCD0 also offers C|{D,E}
        let s = sample(&[("((A,B),((C,D),E));", 1), ("(((A,B),C),(D,E));", 1)]);
        let g = CcdGraph::build(&s, Model::Ccd0).unwrap();
        g.validate().unwrap();
        let unseen = parse_newick("((A,B),(C,(D,E)));", Some(s.taxa())).unwrap();
        assert!(g.tree_probability(&unseen) > 0.0);
        assert!((g.log_tree_count() - 3f64.ln()).abs() < 1e-12);
        let c1 = CcdGraph::build(&s, Model::Ccd1).unwrap();
        assert_eq!(c1.tree_probability(&unseen), 0.0);
    }

    #[test]
    fn ccd2_distinguishes_sibling_context() {
        let s = sample(&[("(((A,B),C),D);", 1), ("((A,B),(C,D));", 1)]);
        let g = CcdGraph::build(&s, Model::Ccd2).unwrap();
        g.validate().unwrap();
        assert!(g.n_vertices() > g.n_clades());
        let ab = Clade::from_indices(4, [0, 1]);
        assert!((g.clade_probability(&ab) - 1.0).abs() < 1e-12);
        for (t, _) in s.unique() {
            assert!((g.tree_probability(t) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_matches_probabilities() {
        let s = sample(&[("(((A,B),C),(D,E));", 6), ("((A,(B,C)),(D,E));", 4)]);
        let g = CcdGraph::build(&s, Model::Ccd1).unwrap();
        let mut rng = crate::seeded_rng(1);
        let hits = (0..20000).filter(|_| &g.sample_tree(&mut rng) == s.tree(0)).count();
        assert!((hits as f64 / 20000.0 - 0.6).abs() < 0.02);
    }
}
