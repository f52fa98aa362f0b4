use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::{Clade, CladeSplit, TaxonSet};
use crate::{Error, Result};

/// One vertex of a [`Tree`]. Leaves have no children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub clade: Clade,
    pub children: Option<[usize; 2]>,
    pub parent: Option<usize>,
}

/// Borrowed view of one clade split of a tree together with the sibling of
/// its parent clade (`None` at the root).
#[derive(Clone, Copy, Debug)]
pub struct NodeSplit<'a> {
    pub parent: &'a Clade,
    pub left: &'a Clade,
    pub right: &'a Clade,
    pub sibling: Option<&'a Clade>,
}

/// A rooted binary tree topology over a [`TaxonSet`].
///
/// Nodes are stored in a canonical post-order (smaller child clade first,
/// root last), so two trees are equal exactly when their node lists are.
#[derive(Clone)]
pub struct Tree {
    taxa: Arc<TaxonSet>,
    nodes: Vec<TreeNode>,
    hash: u64,
}

/// Unordered intermediate node used while assembling a tree.
pub(crate) struct RawNode {
    pub clade: Clade,
    pub children: Option<[usize; 2]>,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finaliser
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Tree {
    /// Assembles a tree from an arena of nodes whose clades are already set.
    pub(crate) fn from_raw(taxa: Arc<TaxonSet>, raw: Vec<RawNode>, root: usize) -> Result<Tree> {
        let n = taxa.len();
        if raw[root].clade != Clade::full(n) {
            return Err(Error::Taxon("tree leaves do not cover the taxon set".into()));
        }
        // canonical post-order
        let mut nodes: Vec<TreeNode> = Vec::with_capacity(raw.len());
        let mut new_index = vec![usize::MAX; raw.len()];
        let mut stack = vec![(root, false)];
        while let Some((i, expanded)) = stack.pop() {
            match raw[i].children {
                Some([a, b]) if !expanded => {
                    let (first, second) = if raw[a].clade <= raw[b].clade { (a, b) } else { (b, a) };
                    stack.push((i, true));
                    stack.push((second, false));
                    stack.push((first, false));
                }
                children => {
                    let children = children.map(|[a, b]| {
                        let (x, y) = (new_index[a], new_index[b]);
                        if nodes[x].clade <= nodes[y].clade {
                            [x, y]
                        } else {
                            [y, x]
                        }
                    });
                    new_index[i] = nodes.len();
                    nodes.push(TreeNode { clade: raw[i].clade.clone(), children, parent: None });
                }
            }
        }
        if nodes.len() != 2 * n - 1 {
            return Err(Error::MalformedTree(format!(
                "expected {} nodes for {} taxa, found {}",
                2 * n - 1,
                n,
                nodes.len()
            )));
        }
        let mut hashes = vec![0u64; nodes.len()];
        for i in 0..nodes.len() {
            hashes[i] = match nodes[i].children {
                None => mix(nodes[i].clade.lowest().unwrap_or(0) as u64 ^ 0x5bd1_e995),
                Some([a, b]) => {
                    nodes[a].parent = Some(i);
                    nodes[b].parent = Some(i);
                    let (lo, hi) = (hashes[a].min(hashes[b]), hashes[a].max(hashes[b]));
                    mix(lo ^ mix(hi).rotate_left(17))
                }
            };
        }
        let hash = *hashes.last().unwrap();
        Ok(Tree { taxa, nodes, hash })
    }

    /// Builds a tree top-down: `expand` returns the two children of an item,
    /// or `None` for a leaf. `clade` maps an item to its clade.
    pub fn from_expansion<T, E, C>(taxa: Arc<TaxonSet>, root: T, mut expand: E, clade: C) -> Result<Tree>
    where
        E: FnMut(&T) -> Result<Option<(T, T)>>,
        C: Fn(&T) -> Clade,
    {
        let mut raw = vec![RawNode { clade: clade(&root), children: None }];
        let mut stack = vec![(0usize, root)];
        while let Some((i, item)) = stack.pop() {
            if let Some((a, b)) = expand(&item)? {
                let (ca, cb) = (clade(&a), clade(&b));
                if !ca.is_disjoint(&cb) || ca.union(&cb) != raw[i].clade {
                    return Err(Error::MalformedTree("children do not partition their parent".into()));
                }
                let ia = raw.len();
                raw.push(RawNode { clade: ca, children: None });
                raw.push(RawNode { clade: cb, children: None });
                raw[i].children = Some([ia, ia + 1]);
                stack.push((ia, a));
                stack.push((ia + 1, b));
            } else if raw[i].clade.len() != 1 {
                return Err(Error::MalformedTree("leaf with more than one taxon".into()));
            }
        }
        Tree::from_raw(taxa, raw, 0)
    }

    /// Builds the tree whose non-trivial clades are exactly `clades`
    /// (which must contain the root and form a full binary hierarchy).
    pub fn from_clades(taxa: Arc<TaxonSet>, clades: &[Clade]) -> Result<Tree> {
        let set: std::collections::HashSet<&Clade> = clades.iter().collect();
        let n = taxa.len();
        Tree::from_expansion(
            taxa,
            Clade::full(n),
            |c: &Clade| {
                if c.len() == 1 {
                    return Ok(None);
                }
                // largest proper sub-clade containing the lowest taxon
                let low = c.lowest().unwrap();
                let child = set
                    .iter()
                    .filter(|d| d.len() < c.len() && d.contains(low) && d.is_subset(c))
                    .max_by_key(|d| d.len())
                    .map(|d| (*d).clone())
                    .unwrap_or_else(|| Clade::singleton(n, low));
                let other = c.difference(&child);
                Ok(Some((child, other)))
            },
            Clade::clone,
        )
    }

    pub fn taxa(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        self.nodes.last().unwrap()
    }

    /// Order-insensitive topology hash: leaves hash their taxon index and
    /// each internal node combines (min, max) of its children's hashes.
    pub fn canonical_hash(&self) -> u64 {
        self.hash
    }

    /// Clades of size >= 2 in post-order; the root clade comes last.
    pub fn clades(&self) -> impl Iterator<Item = &Clade> + '_ {
        self.nodes.iter().filter(|n| n.children.is_some()).map(|n| &n.clade)
    }

    /// The n - 1 clade splits with the sibling of each split's parent.
    pub fn splits(&self) -> impl Iterator<Item = NodeSplit<'_>> + '_ {
        self.nodes.iter().filter_map(move |node| {
            let [a, b] = node.children?;
            let sibling = node.parent.map(|p| {
                let [x, y] = self.nodes[p].children.unwrap();
                let other = if std::ptr::eq(&self.nodes[x], node) { y } else { x };
                &self.nodes[other].clade
            });
            Some(NodeSplit {
                parent: &node.clade,
                left: &self.nodes[a].clade,
                right: &self.nodes[b].clade,
                sibling,
            })
        })
    }

    pub fn split_set(&self) -> Vec<CladeSplit> {
        self.splits()
            .map(|s| CladeSplit { parent: s.parent.clone(), left: s.left.clone(), right: s.right.clone() })
            .collect()
    }

    pub fn contains_clade(&self, clade: &Clade) -> bool {
        self.nodes.iter().any(|n| &n.clade == clade)
    }

    /// Newick string without branch lengths; the children of every vertex
    /// are written in lexicographic order of their rendered subtrees.
    pub fn to_newick(&self) -> String {
        let mut rendered: Vec<String> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let s = match node.children {
                None => quote_label(self.taxa.label(node.clade.lowest().unwrap())),
                Some([a, b]) => {
                    let (x, y) = (&rendered[a], &rendered[b]);
                    if x <= y {
                        format!("({x},{y})")
                    } else {
                        format!("({y},{x})")
                    }
                }
            };
            rendered.push(s);
        }
        let mut out = rendered.pop().unwrap();
        out.push(';');
        out
    }
}

fn quote_label(label: &str) -> String {
    let plain = label
        .chars()
        .all(|c| !c.is_whitespace() && !"()[]',:;".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash
            && self.taxa.same_as(&other.taxa)
            && self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| a.clade == b.clade)
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_newick())
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_newick())
    }
}
