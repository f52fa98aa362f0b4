//! Brute-force oracles shared by the integration tests. Everything here works
//! from raw sample counts and explicit tree enumeration, never from the CCD
//! graph itself.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use ccd::ccd::Model;
use ccd::trees::random::{perturbed_sample, random_tree};
use ccd::trees::{Clade, TaxonSet, Tree, TreeSample};
use rand::Rng;

/// A tree as its set of clades with at least two taxa (root included).
pub type CladeSet = BTreeSet<Clade>;

pub fn clade_set(t: &Tree) -> CladeSet {
    t.clades().filter(|c| c.len() >= 2).cloned().collect()
}

pub fn to_tree(taxa: &Arc<TaxonSet>, clades: &CladeSet) -> Tree {
    let v: Vec<Clade> = clades.iter().cloned().collect();
    Tree::from_clades(taxa.clone(), &v).unwrap()
}

pub fn taxa(n: usize) -> Arc<TaxonSet> {
    TaxonSet::new((0..n).map(|i| format!("t{i}"))).unwrap()
}

/// Random sample: trees scattered around a random base tree, with an
/// occasional fully random tree.
pub fn random_sample<R: Rng>(rng: &mut R, taxa: &Arc<TaxonSet>, m: usize) -> TreeSample {
    let base = random_tree(taxa, rng);
    let spread = rng.random_range(0.3..2.5);
    let mut trees = perturbed_sample(&base, m, spread, rng);
    for t in trees.iter_mut() {
        if rng.random_bool(0.1) {
            *t = random_tree(taxa, rng);
        }
    }
    TreeSample::from_trees(trees).unwrap()
}

/// Sibling context key: the sibling clade, or `None` for the root.
type Ctx = Option<Clade>;

/// (left, right) children with `left` holding the lowest taxon.
fn ordered(a: &Clade, b: &Clade) -> (Clade, Clade) {
    if a.lowest() < b.lowest() {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Raw counts of clades and splits in a sample, with and without sibling
/// context.
pub struct Counts {
    pub n: usize,
    pub m: f64,
    pub clade: HashMap<Clade, f64>,
    pub split: HashMap<(Clade, Clade), f64>,
    pub clade_ctx: HashMap<(Clade, Ctx), f64>,
    pub split_ctx: HashMap<(Clade, Ctx, Clade), f64>,
}

impl Counts {
    pub fn new(sample: &TreeSample) -> Counts {
        let n = sample.taxa().len();
        let mut c = Counts {
            n,
            m: 0.0,
            clade: HashMap::new(),
            split: HashMap::new(),
            clade_ctx: HashMap::new(),
            split_ctx: HashMap::new(),
        };
        for t in sample.iter() {
            c.m += 1.0;
            // walk top-down carrying the sibling context
            let mut stack: Vec<(Clade, Ctx)> = vec![(Clade::full(n), None)];
            let children: HashMap<Clade, (Clade, Clade)> = t
                .splits()
                .map(|s| (s.parent.clone(), ordered(s.left, s.right)))
                .collect();
            while let Some((cl, ctx)) = stack.pop() {
                *c.clade.entry(cl.clone()).or_default() += 1.0;
                *c.clade_ctx.entry((cl.clone(), ctx.clone())).or_default() += 1.0;
                if let Some((l, r)) = children.get(&cl) {
                    *c.split.entry((cl.clone(), l.clone())).or_default() += 1.0;
                    *c.split_ctx.entry((cl.clone(), ctx.clone(), l.clone())).or_default() += 1.0;
                    stack.push((l.clone(), Some(r.clone())));
                    stack.push((r.clone(), Some(l.clone())));
                }
            }
        }
        c
    }

    fn observed(&self, c: &Clade) -> bool {
        c.len() == 1 || self.clade.contains_key(c)
    }

    /// CCD0 clade weight: frequency over m; leaves and root weigh 1.
    pub fn weight(&self, c: &Clade) -> f64 {
        if c.len() == 1 || c.len() == self.n {
            1.0
        } else {
            self.clade[c] / self.m
        }
    }

    /// Options for splitting `c` in context `ctx` with their unnormalised
    /// factors.
    fn options(&self, model: Model, c: &Clade, ctx: &Ctx) -> Vec<(Clade, Clade, f64)> {
        match model {
            Model::Ccd1 => self
                .split
                .iter()
                .filter(|((p, _), _)| p == c)
                .map(|((_, l), f)| (l.clone(), c.difference(l), f / self.clade[c]))
                .collect(),
            Model::Ccd2 => self
                .split_ctx
                .iter()
                .filter(|((p, x, _), _)| p == c && x == ctx)
                .map(|((_, _, l), f)| (l.clone(), c.difference(l), f / self.clade_ctx[&(c.clone(), ctx.clone())]))
                .collect(),
            Model::Ccd0 => subsets_with_lowest(c)
                .into_iter()
                .map(|l| {
                    let r = c.difference(&l);
                    (l, r)
                })
                .filter(|(l, r)| self.observed(l) && self.observed(r))
                .map(|(l, r)| {
                    let w = self.weight(&l) * self.weight(&r);
                    (l, r, w)
                })
                .collect(),
        }
    }

    /// Every tree the model can produce with its unnormalised weight
    /// (already normalised for CCD1 and CCD2).
    pub fn enumerate(&self, model: Model) -> Vec<(CladeSet, f64)> {
        let mut memo = HashMap::new();
        let mut out = self.expand(model, &Clade::full(self.n), &None, &mut memo);
        for (set, _) in out.iter_mut() {
            set.insert(Clade::full(self.n));
        }
        if model == Model::Ccd0 {
            let z: f64 = out.iter().map(|t| t.1).sum();
            for t in out.iter_mut() {
                t.1 /= z;
            }
        }
        out
    }

    fn expand(
        &self,
        model: Model,
        c: &Clade,
        ctx: &Ctx,
        memo: &mut HashMap<(Clade, Ctx), Vec<(CladeSet, f64)>>,
    ) -> Vec<(CladeSet, f64)> {
        if c.len() == 1 {
            return vec![(CladeSet::new(), 1.0)];
        }
        let key = (c.clone(), if model == Model::Ccd2 { ctx.clone() } else { None });
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        for (l, r, f) in self.options(model, c, ctx) {
            let a = self.expand(model, &l, &Some(r.clone()), memo);
            let b = self.expand(model, &r, &Some(l.clone()), memo);
            for (sa, pa) in &a {
                for (sb, pb) in &b {
                    let mut s = sa.clone();
                    s.extend(sb.iter().cloned());
                    if l.len() > 1 {
                        s.insert(l.clone());
                    }
                    if r.len() > 1 {
                        s.insert(r.clone());
                    }
                    out.push((s, f * pa * pb));
                }
            }
        }
        memo.insert(key, out.clone());
        out
    }
}

/// All non-empty proper subsets of `c` that contain its lowest taxon.
pub fn subsets_with_lowest(c: &Clade) -> Vec<Clade> {
    let members: Vec<usize> = c.iter().collect();
    let n_bits = members.len();
    let mut out = Vec::new();
    // bit 0 (lowest taxon) always set; the full set is excluded
    for mask in 0u64..(1u64 << (n_bits - 1)) {
        let full = (mask << 1) | 1;
        if full == (1u64 << n_bits) - 1 {
            continue;
        }
        let mut d = c.difference(c);
        for (i, &t) in members.iter().enumerate() {
            if full >> i & 1 == 1 {
                d.insert(t);
            }
        }
        out.push(d);
    }
    out
}

/// Every rooted binary tree on `n` taxa.
pub fn all_trees(n: usize) -> Vec<CladeSet> {
    fn rec(c: &Clade) -> Vec<CladeSet> {
        if c.len() == 1 {
            return vec![CladeSet::new()];
        }
        let mut out = Vec::new();
        for l in subsets_with_lowest(c) {
            let r = c.difference(&l);
            for a in rec(&l) {
                for b in rec(&r) {
                    let mut s = a.clone();
                    s.extend(b);
                    s.insert(c.clone());
                    out.push(s);
                }
            }
        }
        out
    }
    rec(&Clade::full(n))
}

/// Splits of a clade set as (parent, lowest-taxon child) pairs.
pub fn split_keys(set: &CladeSet, n: usize) -> HashSet<(Clade, Clade)> {
    let mut out = HashSet::new();
    for c in set {
        let low = c.lowest().unwrap();
        let child = set
            .iter()
            .filter(|d| d.len() < c.len() && d.contains(low) && d.is_subset(c))
            .max_by_key(|d| d.len())
            .cloned()
            .unwrap_or_else(|| Clade::singleton(n, low));
        out.insert((c.clone(), child));
    }
    out
}
