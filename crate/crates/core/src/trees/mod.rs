//! Taxa, clades and rooted binary tree topologies.

mod clade;
mod newick;
mod nexus;
pub mod random;
mod rf;
mod sample;
mod taxa;
mod tree;

pub use clade::{Clade, CladeSplit};
pub use newick::{parse_newick, parse_newick_translated};
pub use nexus::{parse_trees_file, parse_trees_file_with_taxa, parse_trees_str};
pub use rf::rooted_rf;
pub use sample::TreeSample;
pub use taxa::TaxonSet;
pub use tree::{Tree, TreeNode};

/// All clades of size at least two, including the root clade.
pub fn clades_of(tree: &Tree) -> Vec<Clade> {
    tree.clades().cloned().collect()
}
