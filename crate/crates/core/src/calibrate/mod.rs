//! Evaluation of credible-set methods: coverage of true trees, rank
//! histograms, ECDF plots with simultaneous binomial bands, and
//! sensitivity/specificity against a reference run.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::credible::{Level, LevelGrid};
use crate::{Error, Result};

/// Seed of the uniform simulations behind [`EcdfCalibration`].
pub const CALIBRATION_SEED: u64 = 0x5eed_ecdf;

/// Number of uniform simulations used to calibrate ECDF bands.
pub const CALIBRATION_RUNS: usize = 2000;

/// Central interval `[lo, hi]` of Binomial(`trials`, `p`) with at most
/// `(1 - mass) / 2` probability strictly below `lo` and strictly above `hi`.
pub fn binomial_central_interval(trials: u64, p: f64, mass: f64) -> (u64, u64) {
    let tail = (1.0 - mass) / 2.0;
    let eps = 1e-12;
    if p <= 0.0 {
        return (0, 0);
    }
    if p >= 1.0 {
        return (trials, trials);
    }
    let b = Binomial::new(p, trials).expect("p in (0, 1)");
    // lo: largest x with P(X <= x - 1) <= tail; cdf is increasing in x
    let mut lo = 0;
    let (mut a, mut z) = (1u64, trials);
    while a <= z {
        let mid = a + (z - a) / 2;
        if b.cdf(mid - 1) <= tail + eps {
            lo = mid;
            a = mid + 1;
        } else {
            z = mid - 1;
        }
    }
    // hi: smallest x with P(X > x) <= tail
    let (mut a, mut z) = (0u64, trials);
    while a < z {
        let mid = a + (z - a) / 2;
        if b.sf(mid) <= tail + eps {
            z = mid;
        } else {
            a = mid + 1;
        }
    }
    (lo, a)
}

/// Credible level of a probe ("true") tree in one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelReport {
    pub replicate: u64,
    pub method: String,
    pub model: String,
    pub level: Level,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub alpha: f64,
    /// Number of replicates `K`.
    pub replicates: u64,
    /// Replicates whose level is at most `alpha`.
    pub covered: u64,
    pub lo: u64,
    pub hi: u64,
    pub pass: bool,
}

/// Counts levels at most `alpha` and checks the count against the 95%
/// central binomial interval. Infinite levels count as not covered.
pub fn coverage_test(levels: &[Level], alpha: f64) -> CoverageReport {
    let k = levels.len() as u64;
    let covered = levels.iter().filter(|l| l.0 <= alpha).count() as u64;
    let (lo, hi) = binomial_central_interval(k, alpha, 0.95);
    CoverageReport { alpha, replicates: k, covered, lo, hi, pass: (lo..=hi).contains(&covered) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub width: f64,
    /// Bucket `i` covers `[i * width, (i + 1) * width)`; the last is closed.
    pub counts: Vec<u64>,
    pub infinite: u64,
}

impl Histogram {
    /// Pearson chi-square statistic against equal bucket counts.
    pub fn chi_square(&self) -> f64 {
        let total: u64 = self.counts.iter().sum();
        let expected = total as f64 / self.counts.len() as f64;
        self.counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
    }
}

pub fn rank_histogram(levels: &[Level], width: f64) -> Histogram {
    let n = (1.0 / width).round().max(1.0) as usize;
    let mut counts = vec![0u64; n];
    let mut infinite = 0;
    for l in levels {
        if l.is_infinite() {
            infinite += 1;
        } else {
            let i = ((l.0 / width + 1e-9).floor() as usize).min(n - 1);
            counts[i] += 1;
        }
    }
    Histogram { width, counts, infinite }
}

/// Pointwise confidence that makes binomial bands simultaneous at the
/// requested confidence for `replicates` uniform levels on `grid`.
#[derive(Clone, Debug)]
pub struct EcdfCalibration {
    pub replicates: u64,
    pub confidence: f64,
    pub pointwise: f64,
    /// Fraction of uniform simulations staying inside the bands.
    pub simulated_coverage: f64,
    grid: LevelGrid,
    lo: Vec<u64>,
    hi: Vec<u64>,
}

fn bands(k: u64, grid: &LevelGrid, confidence: f64) -> (Vec<u64>, Vec<u64>) {
    grid.levels().iter().map(|&a| binomial_central_interval(k, a, confidence)).unzip()
}

impl EcdfCalibration {
    pub fn new(replicates: u64, grid: &LevelGrid, confidence: f64) -> Self {
        Self::with_runs(replicates, grid, confidence, CALIBRATION_RUNS, CALIBRATION_SEED)
    }

    pub fn with_runs(replicates: u64, grid: &LevelGrid, confidence: f64, runs: usize, seed: u64) -> Self {
        let mut rng = crate::seeded_rng(seed);
        // cumulative counts at each grid level for every simulation
        let sims: Vec<Vec<u32>> = (0..runs)
            .map(|_| {
                let mut u: Vec<f64> = (0..replicates).map(|_| 1.0 - rng.random::<f64>()).collect();
                u.sort_by(f64::total_cmp);
                grid.levels().iter().map(|&a| u.partition_point(|&x| x <= a) as u32).collect()
            })
            .collect();
        let coverage = |gamma: f64| -> (f64, Vec<u64>, Vec<u64>) {
            let (lo, hi) = bands(replicates, grid, gamma);
            let inside = sims
                .iter()
                .filter(|s| s.iter().zip(lo.iter().zip(&hi)).all(|(&c, (&l, &h))| (l..=h).contains(&(c as u64))))
                .count();
            (inside as f64 / runs as f64, lo, hi)
        };
        // coverage grows with the pointwise confidence; bisect on log(1 - gamma)
        let (mut a, mut b) = ((1.0 - confidence).ln(), (1e-10f64).ln());
        let mut best = (confidence, coverage(confidence));
        for _ in 0..40 {
            let gamma = 1.0 - ((a + b) / 2.0).exp();
            let c = coverage(gamma);
            let better = (c.0 - confidence).abs() < (best.1 .0 - confidence).abs()
                || ((c.0 - confidence).abs() == (best.1 .0 - confidence).abs() && c.0 > best.1 .0);
            if better {
                best = (gamma, c.clone());
            }
            if (c.0 - confidence).abs() <= 0.01 && c.0 >= confidence {
                break;
            }
            if c.0 < confidence {
                a = (a + b) / 2.0;
            } else {
                b = (a + b) / 2.0;
            }
        }
        let (pointwise, (simulated_coverage, lo, hi)) = best;
        EcdfCalibration { replicates, confidence, pointwise, simulated_coverage, grid: grid.clone(), lo, hi }
    }

    pub fn grid(&self) -> &LevelGrid {
        &self.grid
    }
}

#[derive(Clone, Debug)]
pub struct EcdfPoint {
    pub level: f64,
    pub ecdf: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug)]
pub struct EcdfReport {
    pub points: Vec<EcdfPoint>,
    pub histogram: Histogram,
    pub coverage: CoverageReport,
    pub infinite: u64,
    pub pointwise_confidence: f64,
}

impl EcdfReport {
    /// Grid levels at which the ECDF leaves the band.
    pub fn violations(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.ecdf < p.lo || p.ecdf > p.hi).map(|p| p.level).collect()
    }

    pub fn within_bands(&self) -> bool {
        self.violations().is_empty()
    }
}

/// ECDF of the levels over the calibration grid, normalised by the number
/// of replicates (infinite levels included), with simultaneous bands.
pub fn ecdf_bands(levels: &[Level], calibration: &EcdfCalibration, alpha: f64) -> Result<EcdfReport> {
    let k = levels.len() as u64;
    if k == 0 {
        return Err(Error::EmptyInput("no credible levels".into()));
    }
    if k != calibration.replicates {
        return Err(Error::InvalidArgument(format!(
            "calibration is for {} replicates, got {k}",
            calibration.replicates
        )));
    }
    let mut finite: Vec<f64> = levels.iter().filter(|l| !l.is_infinite()).map(|l| l.0).collect();
    finite.sort_by(f64::total_cmp);
    let kf = k as f64;
    let points = calibration
        .grid
        .levels()
        .iter()
        .zip(calibration.lo.iter().zip(&calibration.hi))
        .map(|(&a, (&lo, &hi))| EcdfPoint {
            level: a,
            ecdf: finite.partition_point(|&x| x <= a) as f64 / kf,
            lo: lo as f64 / kf,
            hi: hi as f64 / kf,
        })
        .collect();
    Ok(EcdfReport {
        points,
        histogram: rank_histogram(levels, 0.01),
        coverage: coverage_test(levels, alpha),
        infinite: levels.iter().filter(|l| l.is_infinite()).count() as u64,
        pointwise_confidence: calibration.pointwise,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensSpecPoint {
    pub level: f64,
    pub tp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

/// Sensitivity and specificity of a candidate method against reference
/// levels, over the reference's trees. Trees missing from `candidate`
/// are predicted outside every set.
pub fn sens_spec<K: Eq + Hash>(
    reference: &HashMap<K, Level>,
    candidate: &HashMap<K, Level>,
    grid: &LevelGrid,
) -> Result<Vec<SensSpecPoint>> {
    if reference.keys().all(|k| !candidate.contains_key(k)) {
        return Err(Error::EmptyInput("reference and candidate share no trees".into()));
    }
    let pairs: Vec<(Level, Level)> = reference
        .iter()
        .map(|(k, &r)| (r, candidate.get(k).copied().unwrap_or(Level::INFINITE)))
        .collect();
    Ok(grid
        .levels()
        .iter()
        .map(|&a| {
            let (mut tp, mut fn_, mut tn, mut fp) = (0, 0, 0, 0);
            for &(r, c) in &pairs {
                match (r.0 <= a, c.0 <= a) {
                    (true, true) => tp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => tn += 1,
                    (false, true) => fp += 1,
                }
            }
            let ratio = |x: u64, y: u64| (x + y > 0).then(|| x as f64 / (x + y) as f64);
            SensSpecPoint { level: a, tp, fn_, tn, fp, sensitivity: ratio(tp, fn_), specificity: ratio(tn, fp) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_for_100_trials() {
        assert_eq!(binomial_central_interval(100, 0.95, 0.95), (90, 99));
        let (lo, hi) = binomial_central_interval(1, 0.95, 0.95);
        assert!(lo <= hi && hi <= 1);
        let (lo, hi) = binomial_central_interval(250, 0.5, 0.95);
        assert_eq!(125 - lo, hi - 125);
    }

    #[test]
    fn coverage_examples() {
        let all = vec![Level(0.01); 100];
        let r = coverage_test(&all, 0.95);
        assert_eq!(r.covered, 100);
        assert!(!r.pass);
        let mut some = vec![Level(0.5); 95];
        some.extend(vec![Level::INFINITE; 5]);
        assert!(coverage_test(&some, 0.95).pass);
    }

    #[test]
    fn histogram_buckets() {
        let h = rank_histogram(&[Level(0.005), Level(0.005), Level(0.999), Level(1.0), Level(0.01)], 0.01);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[99], 2);
        let h = rank_histogram(&[Level::INFINITE; 4], 0.01);
        assert_eq!(h.infinite, 4);
        assert!(h.counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn all_ones_violate_bands() {
        let grid = LevelGrid::uniform(100);
        let cal = EcdfCalibration::with_runs(50, &grid, 0.95, 300, 1);
        let r = ecdf_bands(&vec![Level(1.0); 50], &cal, 0.95).unwrap();
        assert!(r.points[..99].iter().all(|p| p.ecdf == 0.0));
        assert_eq!(r.points[99].ecdf, 1.0);
        assert!(!r.within_bands());
    }

    #[test]
    fn sens_spec_hand_example() {
        let reference: HashMap<&str, Level> =
            [("a", Level(0.1)), ("b", Level(0.3)), ("c", Level(0.5)), ("d", Level(0.7)), ("e", Level(0.9))].into();
        let candidate: HashMap<&str, Level> =
            [("a", Level(0.2)), ("b", Level(0.4)), ("c", Level(0.8)), ("d", Level(0.45)), ("e", Level(0.95))].into();
        let grid = LevelGrid::new(vec![0.5, 1.0]).unwrap();
        let pts = sens_spec(&reference, &candidate, &grid).unwrap();
        assert_eq!((pts[0].tp, pts[0].fn_, pts[0].tn, pts[0].fp), (2, 1, 1, 1));
        assert_eq!(pts[0].sensitivity, Some(2.0 / 3.0));
        assert_eq!(pts[0].specificity, Some(0.5));
        assert_eq!(pts[1].specificity, None);
        let other: HashMap<&str, Level> = [("z", Level(0.1))].into();
        assert!(matches!(sens_spec(&reference, &other, &grid), Err(Error::EmptyInput(_))));
    }
}
