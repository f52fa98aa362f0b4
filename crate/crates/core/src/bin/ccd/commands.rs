use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use ccd::calibrate::{ecdf_bands, sens_spec as sens_spec_curves, EcdfCalibration, LevelReport};
use ccd::ccd::{read_ccd, write_ccd, CcdGraph, Model};
use ccd::credible::{
    write_credible_ccd, write_frequency_index, write_probability_index, CredibleCcd, CredibleSet, FrequencyIndex,
    Level, LevelGrid, Method, ProbabilityIndex, DEFAULT_MAX_ATTEMPTS,
};
use ccd::trees::{parse_trees_file, parse_trees_file_with_taxa, rooted_rf, TaxonSet, Tree, TreeSample};
use ccd::{rng_for_replicate, seeded_rng, Error, Result, StreamRng};

use crate::{CalibrateArgs, CredibleSetArgs, MethodArgs, QueryArgs, RfArgs, SampleArgs, SensSpecArgs, SourceArgs};

struct Loaded {
    sample: Option<TreeSample>,
    graph: Arc<CcdGraph>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load(src: &SourceArgs, taxa: Option<&Arc<TaxonSet>>) -> Result<Loaded> {
    let model: Model = src.model.parse()?;
    if let Some(path) = &src.ccd {
        let graph = read_ccd(&read_text(path)?)?;
        if taxa.is_some_and(|t| !t.same_as(graph.taxa())) {
            return Err(Error::Taxon("CCD file is over a different taxon set".into()));
        }
        return Ok(Loaded { sample: None, graph: Arc::new(graph) });
    }
    let input = src.input.as_ref().expect("clap requires --input or --ccd");
    let sample = match taxa {
        Some(t) => parse_trees_file_with_taxa(input, src.burnin, t)?,
        None => parse_trees_file(input, src.burnin)?,
    };
    let graph = Arc::new(CcdGraph::build(&sample, model)?);
    Ok(Loaded { sample: Some(sample), graph })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn write_all(out: &mut dyn Write, text: &str, path: &Option<PathBuf>) -> Result<()> {
    let target = path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Error::io(target, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidArgument(format!("{}: {other:?}", path.display())),
    }
}

fn csv_writer(path: &Option<PathBuf>) -> Result<(csv::Writer<Box<dyn Write>>, PathBuf)> {
    let target = path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    Ok((csv::Writer::from_writer(output(path)?), target))
}

fn methods(args: &MethodArgs) -> Result<Vec<Method>> {
    args.method.iter().map(|m| m.parse()).collect()
}

fn single_method(args: &MethodArgs) -> Result<Method> {
    match methods(args)?.as_slice() {
        [m] => Ok(*m),
        _ => Err(Error::InvalidArgument("this command takes exactly one --method".into())),
    }
}

fn grid(args: &MethodArgs) -> Result<LevelGrid> {
    LevelGrid::with_step(args.grid_step)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("--alpha {alpha} not in (0, 1]")))
    }
}

fn seed(args: &MethodArgs) -> Result<u64> {
    args.seed.ok_or_else(|| Error::InvalidArgument("--seed is required when trees are drawn".into()))
}

enum Index {
    Frequency(FrequencyIndex),
    Probability(ProbabilityIndex),
    Ccd(CredibleCcd),
}

impl Index {
    fn set(&self) -> &dyn CredibleSet {
        match self {
            Index::Frequency(i) => i,
            Index::Probability(i) => i,
            Index::Ccd(i) => i,
        }
    }

    fn build(method: Method, loaded: &Loaded, args: &MethodArgs, rng: &mut Option<StreamRng>) -> Result<Index> {
        Ok(match method {
            Method::Frequency => {
                let sample = loaded
                    .sample
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("the frequency method needs a tree sample (--input)".into()))?;
                Index::Frequency(FrequencyIndex::build(sample, grid(args)?)?)
            }
            Method::Probability => {
                if rng.is_none() {
                    *rng = Some(seeded_rng(seed(args)?));
                }
                let rng = rng.as_mut().unwrap();
                Index::Probability(ProbabilityIndex::build(loaded.graph.clone(), args.k, grid(args)?, rng)?)
            }
            Method::Ccd => Index::Ccd(CredibleCcd::build(loaded.graph.clone())?),
        })
    }
}

pub fn build(a: SourceArgs) -> Result<()> {
    let loaded = load(&a, None)?;
    let graph = &loaded.graph;
    let mut out = output(&a.out)?;
    write_all(&mut *out, &write_ccd(graph), &a.out)?;
    eprintln!("model {}\ntaxa {}", graph.model(), graph.taxa().len());
    if let Some(sample) = &loaded.sample {
        eprintln!("trees {}\nunique trees {}", sample.len(), sample.n_unique());
    }
    eprintln!("clades {}\nclade splits {}\ngraph size {}", graph.n_clades(), graph.n_splits(), graph.size());
    Ok(())
}

pub fn query(a: QueryArgs) -> Result<()> {
    check_alpha(a.method.alpha)?;
    let loaded = load(&a.source, None)?;
    let probes = parse_trees_file_with_taxa(&a.probes, 0.0, loaded.graph.taxa())?;
    let methods = methods(&a.method)?;
    let mut rng = None;
    let indexes: Vec<Index> = methods.iter().map(|&m| Index::build(m, &loaded, &a.method, &mut rng)).collect::<Result<_>>()?;

    let (mut w, path) = csv_writer(&a.source.out)?;
    let mut header = vec!["probe".to_string(), "tree".into(), "probability".into()];
    for m in &methods {
        header.push(format!("level_{m}"));
        header.push(format!("contained_{m}"));
    }
    w.write_record(&header).map_err(|e| csv_error(&path, e))?;
    for (i, t) in probes.iter().enumerate() {
        let mut row = vec![i.to_string(), t.to_newick(), format!("{}", loaded.graph.tree_probability(t))];
        for idx in &indexes {
            let level = idx.set().level(t);
            row.push(level.to_string());
            row.push((level <= Level(a.method.alpha)).to_string());
        }
        w.write_record(&row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn map(a: SourceArgs) -> Result<()> {
    let loaded = load(&a, None)?;
    let (tree, p) = loaded.graph.map_tree();
    let mut out = output(&a.out)?;
    write_all(&mut *out, &format!("[probability={p:e}] {}\n", tree.to_newick()), &a.out)
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let loaded = load(&a.source, None)?;
    let seed = seed(&a.method)?;
    let trees: Vec<Tree> = if a.conditional {
        check_alpha(a.method.alpha)?;
        let method = single_method(&a.method)?;
        let mut index_rng = Some(rng_for_replicate(seed, 1));
        let index = Index::build(method, &loaded, &a.method, &mut index_rng)?;
        let mut rng = seeded_rng(seed);
        index.set().sample_many_within(a.method.alpha, a.n, &mut rng, DEFAULT_MAX_ATTEMPTS)?
    } else {
        let mut rng = seeded_rng(seed);
        (0..a.n).map(|_| loaded.graph.sample_tree(&mut rng)).collect()
    };
    let text: String = trees.iter().map(|t| format!("{}\n", t.to_newick())).collect();
    let mut out = output(&a.source.out)?;
    write_all(&mut *out, &text, &a.source.out)
}

pub fn rf(a: RfArgs) -> Result<()> {
    let method = single_method(&a.method)?;
    let first = load(&a.source, None)?;
    let other_source = SourceArgs { input: Some(a.other.clone()), ccd: None, ..a.source.clone() };
    let second = load(&other_source, Some(first.graph.taxa()))?;
    let runs = [("first", &first), ("second", &second)];
    let maps: Vec<Tree> = runs.iter().map(|(_, l)| l.graph.map_tree().0).collect();
    let distance = rooted_rf(&maps[0], &maps[1])?;
    let mut rng = None;
    let indexes: Vec<Index> = runs.iter().map(|(_, l)| Index::build(method, l, &a.method, &mut rng)).collect::<Result<_>>()?;

    let (mut w, path) = csv_writer(&a.source.out)?;
    w.write_record(["map_of", "evaluated_in", "rf", "probability", "level"]).map_err(|e| csv_error(&path, e))?;
    for (i, (name, _)) in runs.iter().enumerate() {
        for (j, (target, loaded)) in runs.iter().enumerate() {
            let level = indexes[j].set().level(&maps[i]);
            let p = loaded.graph.tree_probability(&maps[i]);
            w.write_record([name.to_string(), target.to_string(), distance.to_string(), p.to_string(), level.to_string()])
                .map_err(|e| csv_error(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// `(true tree file, sample file)` pairs, resolved against the manifest's directory.
fn read_manifest(path: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [truth, sample] = fields.as_slice() else {
            return Err(Error::Manifest(format!("line {}: expected two paths", i + 1)));
        };
        let (truth, sample) = (base.join(truth), base.join(sample));
        for p in [&truth, &sample] {
            if !p.is_file() {
                return Err(Error::Manifest(format!("line {}: {} does not exist", i + 1, p.display())));
            }
        }
        entries.push((truth, sample));
    }
    if entries.is_empty() {
        return Err(Error::Manifest("manifest lists no replicates".into()));
    }
    Ok(entries)
}

pub fn calibrate(a: CalibrateArgs) -> Result<()> {
    check_alpha(a.method.alpha)?;
    let method = single_method(&a.method)?;
    let model: Model = a.model.parse()?;
    let entries = read_manifest(&a.manifest)?;
    let seed = match method {
        Method::Probability => seed(&a.method)?,
        _ => a.method.seed.unwrap_or(0),
    };
    let grid = grid(&a.method)?;
    let reports: Vec<LevelReport> = entries
        .par_iter()
        .enumerate()
        .map(|(id, (truth, sample))| {
            let source = SourceArgs {
                input: Some(sample.clone()),
                ccd: None,
                burnin: a.burnin,
                model: a.model.clone(),
                out: None,
            };
            let loaded = load(&source, None)?;
            let truth = parse_trees_file_with_taxa(truth, 0.0, loaded.graph.taxa())?;
            let mut rng = Some(rng_for_replicate(seed, id as u64));
            let index = Index::build(method, &loaded, &a.method, &mut rng)?;
            Ok(LevelReport {
                replicate: id as u64,
                method: method.to_string(),
                model: model.to_string(),
                level: index.set().level(truth.tree(0)),
            })
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let levels: Vec<Level> = reports.iter().map(|r| r.level).collect();
    let calibration = EcdfCalibration::new(levels.len() as u64, &grid, 0.95);
    let report = ecdf_bands(&levels, &calibration, a.method.alpha)?;

    let file = |name: &str| -> Result<(csv::Writer<BufWriter<File>>, PathBuf)> {
        let p = a.out.join(name);
        Ok((csv::Writer::from_writer(create(&p)?), p))
    };
    let (mut w, p) = file("levels.csv")?;
    w.write_record(["replicateId", "method", "model", "level"]).map_err(|e| csv_error(&p, e))?;
    for r in &reports {
        w.write_record([r.replicate.to_string(), r.method.clone(), r.model.clone(), r.level.to_string()])
            .map_err(|e| csv_error(&p, e))?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;

    let c = &report.coverage;
    let (mut w, p) = file("coverage.csv")?;
    w.write_record(["alpha", "K", "kPrime", "lo", "hi", "pass"]).map_err(|e| csv_error(&p, e))?;
    w.write_record([c.alpha.to_string(), c.replicates.to_string(), c.covered.to_string(), c.lo.to_string(), c.hi.to_string(), c.pass.to_string()])
        .map_err(|e| csv_error(&p, e))?;
    w.flush().map_err(|e| Error::io(&p, e))?;

    let (mut w, p) = file("ecdf.csv")?;
    w.write_record(["level", "ecdf", "lo", "hi"]).map_err(|e| csv_error(&p, e))?;
    for pt in &report.points {
        w.write_record([pt.level.to_string(), pt.ecdf.to_string(), pt.lo.to_string(), pt.hi.to_string()])
            .map_err(|e| csv_error(&p, e))?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;

    let h = &report.histogram;
    let (mut w, p) = file("histogram.csv")?;
    w.write_record(["lower", "upper", "count"]).map_err(|e| csv_error(&p, e))?;
    for (i, count) in h.counts.iter().enumerate() {
        let (lo, hi) = (i as f64 * h.width, (i + 1) as f64 * h.width);
        w.write_record([format!("{lo:.4}"), format!("{hi:.4}"), count.to_string()]).map_err(|e| csv_error(&p, e))?;
    }
    w.write_record(["inf", "inf", &h.infinite.to_string()]).map_err(|e| csv_error(&p, e))?;
    w.flush().map_err(|e| Error::io(&p, e))?;

    println!(
        "replicates {}\ncovered {} (interval [{}, {}]) {}\necdf {} ({} infinite levels)",
        c.replicates,
        c.covered,
        c.lo,
        c.hi,
        if c.pass { "pass" } else { "fail" },
        if report.within_bands() { "within bands" } else { "outside bands" },
        report.infinite
    );
    Ok(())
}

pub fn credible_set(a: CredibleSetArgs) -> Result<()> {
    check_alpha(a.method.alpha)?;
    let method = single_method(&a.method)?;
    let loaded = load(&a.source, None)?;
    let mut rng = None;
    let index = Index::build(method, &loaded, &a.method, &mut rng)?;
    let text = match &index {
        Index::Frequency(i) => write_frequency_index(i),
        Index::Probability(i) => write_probability_index(i),
        Index::Ccd(i) => write_credible_ccd(i),
    };
    let mut out = output(&a.source.out)?;
    write_all(&mut *out, &text, &a.source.out)?;
    if let Some(path) = &a.materialize {
        let Index::Ccd(c) = &index else {
            return Err(Error::InvalidArgument("--materialize needs --method ccd".into()));
        };
        let graph = c.materialize(a.method.alpha)?;
        let mut f = create(path)?;
        f.write_all(write_ccd(&graph).as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn sens_spec(a: SensSpecArgs) -> Result<()> {
    let method = single_method(&a.method)?;
    let grid = grid(&a.method)?;
    let reference = parse_trees_file(&a.reference, a.source.burnin)?;
    let loaded = load(&a.source, Some(reference.taxa()))?;
    let golden = FrequencyIndex::build(&reference, grid.clone())?;
    let mut rng = None;
    let index = Index::build(method, &loaded, &a.method, &mut rng)?;
    let truth: HashMap<Tree, Level> = reference.unique().map(|(t, _)| (t.clone(), golden.level(t))).collect();
    let predicted: HashMap<Tree, Level> = truth.keys().map(|t| (t.clone(), index.set().level(t))).collect();
    let curves = sens_spec_curves(&truth, &predicted, &grid)?;

    let (mut w, path) = csv_writer(&a.source.out)?;
    w.write_record(["level", "sensitivity", "specificity"]).map_err(|e| csv_error(&path, e))?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for pt in curves {
        w.write_record([pt.level.to_string(), opt(pt.sensitivity), opt(pt.specificity)]).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
