//! Random topologies for simulation and testing.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::tree::RawNode;
use super::{Clade, TaxonSet, Tree};

/// Random ranked-coalescent topology: lineages are merged in uniformly
/// chosen pairs until one remains.
pub fn random_tree<R: Rng + ?Sized>(taxa: &Arc<TaxonSet>, rng: &mut R) -> Tree {
    let n = taxa.len();
    let mut raw: Vec<RawNode> = (0..n)
        .map(|i| RawNode { clade: Clade::singleton(n, i), children: None })
        .collect();
    let mut lineages: Vec<usize> = (0..n).collect();
    while lineages.len() > 1 {
        let i = rng.random_range(0..lineages.len());
        let a = lineages.swap_remove(i);
        let j = rng.random_range(0..lineages.len());
        let b = lineages.swap_remove(j);
        let clade = raw[a].clade.union(&raw[b].clade);
        lineages.push(raw.len());
        raw.push(RawNode { clade, children: Some([a, b]) });
    }
    let root = lineages[0];
    Tree::from_raw(taxa.clone(), raw, root).expect("merging lineages yields a valid tree")
}

/// Applies `moves` random subtree-prune-and-regraft moves.
pub fn spr_perturb<R: Rng + ?Sized>(tree: &Tree, moves: usize, rng: &mut R) -> Tree {
    let n = tree.n_taxa();
    if n < 3 {
        return tree.clone();
    }
    let nodes = tree.nodes();
    let len = nodes.len();
    let mut children: Vec<Option<[usize; 2]>> = nodes.iter().map(|x| x.children).collect();
    let mut parent: Vec<Option<usize>> = nodes.iter().map(|x| x.parent).collect();
    let mut root = len - 1;

    for _ in 0..moves {
        let x = loop {
            let c = rng.random_range(0..len);
            if c != root {
                break c;
            }
        };
        let p = parent[x].unwrap();
        let [c0, c1] = children[p].unwrap();
        let s = if c0 == x { c1 } else { c0 };
        // detach p, splicing s into its place
        let g = parent[p];
        parent[s] = g;
        match g {
            Some(g) => {
                let [a, b] = children[g].unwrap();
                children[g] = Some(if a == p { [s, b] } else { [a, s] });
            }
            None => root = s,
        }
        // candidate attachment points: nodes outside subtree(x) and not p
        let mut in_x = vec![false; len];
        let mut stack = vec![x];
        while let Some(v) = stack.pop() {
            in_x[v] = true;
            if let Some([a, b]) = children[v] {
                stack.push(a);
                stack.push(b);
            }
        }
        let candidates: Vec<usize> = (0..len).filter(|&v| !in_x[v] && v != p).collect();
        let y = candidates[rng.random_range(0..candidates.len())];
        let gy = parent[y];
        children[p] = Some([x, y]);
        parent[p] = gy;
        parent[y] = Some(p);
        parent[x] = Some(p);
        match gy {
            Some(g) => {
                let [a, b] = children[g].unwrap();
                children[g] = Some(if a == y { [p, b] } else { [a, p] });
            }
            None => root = p,
        }
    }

    // recompute clades bottom-up
    let mut clades: Vec<Option<Clade>> = vec![None; len];
    let mut stack = vec![(root, false)];
    while let Some((v, done)) = stack.pop() {
        match children[v] {
            None => clades[v] = Some(nodes[v].clade.clone()),
            Some([a, b]) if done => {
                clades[v] = Some(clades[a].as_ref().unwrap().union(clades[b].as_ref().unwrap()));
            }
            Some([a, b]) => {
                stack.push((v, true));
                stack.push((a, false));
                stack.push((b, false));
            }
        }
    }
    let raw = clades
        .into_iter()
        .zip(children)
        .map(|(clade, children)| RawNode { clade: clade.unwrap(), children })
        .collect();
    Tree::from_raw(tree.taxa().clone(), raw, root).expect("SPR preserves validity")
}

/// `m` trees scattered around `base`: each tree receives a Poisson number
/// of SPR moves with mean `mean_moves`.
pub fn perturbed_sample<R: Rng + ?Sized>(base: &Tree, m: usize, mean_moves: f64, rng: &mut R) -> Vec<Tree> {
    let moves = (mean_moves > 0.0).then(|| Poisson::new(mean_moves).expect("positive mean"));
    (0..m)
        .map(|_| {
            let k = moves.as_ref().map_or(0, |d| d.sample(rng) as usize);
            spr_perturb(base, k, rng)
        })
        .collect()
}
