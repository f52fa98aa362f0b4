mod common;

use std::collections::{HashMap, HashSet};

use ccd::ccd::{read_ccd, write_ccd, CcdGraph, Model};
use ccd::trees::{parse_newick, Clade, TaxonSet, TreeSample};
use rand::Rng;

use common::{clade_set, random_sample, taxa, to_tree, CladeSet, Counts};

const MODELS: [Model; 3] = [Model::Ccd0, Model::Ccd1, Model::Ccd2];

fn samples(seed: u64, count: usize) -> Vec<TreeSample> {
    let mut rng = ccd::seeded_rng(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(3..=8);
            let m = rng.random_range(5..=50);
            random_sample(&mut rng, &taxa(n), m)
        })
        .collect()
}

/// Trees the graph can produce, by walking its splits.
fn graph_trees(g: &CcdGraph) -> HashSet<CladeSet> {
    fn walk(g: &CcdGraph, v: ccd::ccd::VertexId) -> Vec<CladeSet> {
        let rec = g.vertex(v);
        if rec.is_leaf() {
            return vec![CladeSet::new()];
        }
        let mut out = Vec::new();
        for &s in g.splits_of(v) {
            let [a, b] = g.split(s).children;
            for x in walk(g, a) {
                for y in walk(g, b) {
                    let mut t = x.clone();
                    t.extend(y);
                    t.insert(rec.clade.clone());
                    out.push(t);
                }
            }
        }
        out
    }
    walk(g, g.root()).into_iter().collect()
}

#[test]
fn amalgamation_example() {
    let x = TaxonSet::new(["A", "B", "C", "D", "E"]).unwrap();
    let p = |s: &str| parse_newick(s, Some(&x)).unwrap();
    let sample = TreeSample::from_trees([p("((A,B),((C,D),E));"), p("(((A,B),C),(D,E));")]).unwrap();
    let g1 = CcdGraph::build(&sample, Model::Ccd1).unwrap();
    let g0 = CcdGraph::build(&sample, Model::Ccd0).unwrap();
    assert_eq!(graph_trees(&g1).len(), 2);
    let unsampled = p("((A,B),(C,(D,E)));");
    assert_eq!(g1.tree_probability(&unsampled), 0.0);
    assert!(g0.tree_probability(&unsampled) > 0.0);
    let oracle: HashSet<CladeSet> = Counts::new(&sample).enumerate(Model::Ccd0).into_iter().map(|t| t.0).collect();
    assert_eq!(graph_trees(&g0), oracle);
    assert!(oracle.contains(&clade_set(&unsampled)));
}

#[test]
fn tree_sets_match_oracle_enumeration() {
    for s in samples(11, 150) {
        let counts = Counts::new(&s);
        for model in MODELS {
            let g = CcdGraph::build(&s, model).unwrap();
            g.validate().unwrap();
            let oracle: HashMap<CladeSet, f64> = counts.enumerate(model).into_iter().collect();
            let mine = graph_trees(&g);
            assert_eq!(mine, oracle.keys().cloned().collect::<HashSet<_>>(), "{model}");
            for (c, &p) in &oracle {
                let t = to_tree(s.taxa(), c);
                assert!((g.tree_probability(&t) - p).abs() < 1e-12, "{model}");
            }
        }
    }
}

#[test]
fn clade_probabilities_match_oracle() {
    for s in samples(12, 100) {
        let counts = Counts::new(&s);
        for model in MODELS {
            let g = CcdGraph::build(&s, model).unwrap();
            let oracle = counts.enumerate(model);
            let mut by_clade: HashMap<Clade, f64> = HashMap::new();
            for (c, p) in &oracle {
                for x in c {
                    *by_clade.entry(x.clone()).or_default() += p;
                }
            }
            for (c, p) in by_clade {
                assert!((g.clade_probability(&c) - p).abs() < 1e-9, "{model}");
            }
        }
    }
}

#[test]
fn single_tree_sample_has_probability_one() {
    let x = taxa(7);
    let mut rng = ccd::seeded_rng(13);
    let t = ccd::trees::random::random_tree(&x, &mut rng);
    let s = TreeSample::from_trees([t.clone(), t.clone()]).unwrap();
    for model in MODELS {
        let g = CcdGraph::build(&s, model).unwrap();
        assert!(g.is_single_tree());
        assert_eq!(g.tree_probability(&t), 1.0);
        let (map, p) = g.map_tree();
        assert_eq!(map.canonical_hash(), t.canonical_hash());
        assert_eq!(p, 1.0);
    }
}

#[test]
fn sampling_frequencies_follow_probabilities() {
    let mut rng = ccd::seeded_rng(14);
    let s = random_sample(&mut rng, &taxa(6), 40);
    for model in MODELS {
        let g = CcdGraph::build(&s, model).unwrap();
        let oracle: HashMap<CladeSet, f64> = Counts::new(&s).enumerate(model).into_iter().collect();
        let draws = 50_000;
        let mut seen: HashMap<CladeSet, f64> = HashMap::new();
        for _ in 0..draws {
            *seen.entry(clade_set(&g.sample_tree(&mut rng))).or_default() += 1.0;
        }
        for c in seen.keys() {
            assert!(oracle.contains_key(c), "{model}: drew a tree outside the support");
        }
        // chi-square over trees with expected count >= 5, others pooled
        let (mut chi, mut df, mut pooled_e, mut pooled_o) = (0.0, 0usize, 0.0, 0.0);
        for (c, p) in &oracle {
            let e = p * draws as f64;
            let o = seen.get(c).copied().unwrap_or(0.0);
            if e >= 5.0 {
                chi += (o - e).powi(2) / e;
                df += 1;
            } else {
                pooled_e += e;
                pooled_o += o;
            }
        }
        if pooled_e > 0.0 {
            chi += (pooled_o - pooled_e).powi(2) / pooled_e;
            df += 1;
        }
        let df = (df - 1).max(1) as f64;
        // generous bound: mean + 5 standard deviations
        assert!(chi < df + 5.0 * (2.0 * df).sqrt(), "{model}: chi2 {chi} with {df} df");
    }
}

#[test]
fn serialisation_round_trip() {
    for s in samples(15, 40) {
        for model in MODELS {
            let g = CcdGraph::build(&s, model).unwrap();
            let text = write_ccd(&g);
            let back = read_ccd(&text).unwrap();
            assert_eq!(write_ccd(&back), text);
            let oracle = Counts::new(&s).enumerate(model);
            for (c, p) in oracle {
                let t = to_tree(back.taxa(), &c);
                assert!((back.tree_probability(&t) - p).abs() < 1e-12);
            }
        }
    }
}
