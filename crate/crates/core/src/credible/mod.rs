//! Credible sets of tree topologies.
//!
//! Three methods are provided, each able to build a set, test containment,
//! report a tree's credible level and sample conditionally on a level:
//!
//! * [`FrequencyIndex`]: ranks the sampled trees by frequency.
//! * [`ProbabilityIndex`]: ranks trees drawn from a CCD by their CCD probability.
//! * [`CredibleCcd`]: removes the least probable clades (CCD0) or clade
//!   splits (CCD1, CCD2) one at a time, giving nested credible CCDs.

mod credible_ccd;
mod format;
mod frequency;
mod probability;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::trees::Tree;
use crate::{Error, Result};

pub use credible_ccd::{CredibleCcd, RemovalStep, Unit};
pub use format::{read_credible_ccd, read_frequency_index, read_probability_index, write_credible_ccd, write_frequency_index, write_probability_index};
pub use frequency::FrequencyIndex;
pub use probability::ProbabilityIndex;

/// Default cap on rejection-sampling attempts.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// A credible level in (0, 1], or [`Level::INFINITE`] for trees outside
/// every credible set.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Level(pub f64);

impl Level {
    pub const INFINITE: Level = Level(f64::INFINITY);

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Level::INFINITE);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .map(Level)
            .ok_or_else(|| Error::InvalidArgument(format!("bad credible level '{s}'")))
    }
}

/// Increasing credible levels `alpha_1 < ... < alpha_l` in (0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct LevelGrid {
    levels: Vec<f64>,
}

impl LevelGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("level grid is empty".into()));
        }
        if levels.iter().any(|&a| !(a > 0.0 && a <= 1.0)) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("levels must increase strictly within (0, 1]".into()));
        }
        Ok(LevelGrid { levels })
    }

    /// Levels `i / steps` for `i = 1..=steps`.
    pub fn uniform(steps: usize) -> Self {
        assert!(steps > 0);
        LevelGrid { levels: (1..=steps).map(|i| i as f64 / steps as f64).collect() }
    }

    /// Uniform grid with the given step, which must divide 1.
    pub fn with_step(step: f64) -> Result<Self> {
        let steps = (1.0 / step).round();
        if !(step > 0.0 && step <= 1.0) || ((steps * step) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("grid step {step} does not divide 1")));
        }
        Ok(Self::uniform(steps as usize))
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl Default for LevelGrid {
    fn default() -> Self {
        Self::uniform(1000)
    }
}

/// Which credible-set method to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Frequency,
    Probability,
    Ccd,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frequency" | "freq" => Ok(Method::Frequency),
            "probability" | "prob" => Ok(Method::Probability),
            "ccd" | "credible-ccd" => Ok(Method::Ccd),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Frequency => "frequency",
            Method::Probability => "probability",
            Method::Ccd => "ccd",
        })
    }
}

/// Common interface of the three credible-set methods.
pub trait CredibleSet {
    /// Smallest credible level whose set contains `tree`.
    fn level(&self, tree: &Tree) -> Level;

    /// Draws a tree from the distribution the set is built on.
    fn draw(&self, rng: &mut dyn RngCore) -> Tree;

    /// Whether `tree` lies in the `alpha` credible set (inclusive).
    fn contains(&self, tree: &Tree, alpha: f64) -> bool {
        self.level(tree) <= Level(alpha)
    }

    /// One tree from the distribution restricted to the `alpha` credible set.
    fn sample_within(&self, alpha: f64, rng: &mut dyn RngCore, max_attempts: u64) -> Result<Tree> {
        for _ in 0..max_attempts {
            let t = self.draw(rng);
            if self.contains(&t, alpha) {
                return Ok(t);
            }
        }
        Err(Error::RejectionBudgetExceeded { attempts: max_attempts })
    }

    /// `n` conditional draws.
    fn sample_many_within(&self, alpha: f64, n: usize, rng: &mut dyn RngCore, max_attempts: u64) -> Result<Vec<Tree>> {
        (0..n).map(|_| self.sample_within(alpha, rng, max_attempts)).collect()
    }
}

/// Rejection sampling from `set` restricted to level `alpha`.
pub fn conditional_sample(set: &dyn CredibleSet, alpha: f64, rng: &mut dyn RngCore) -> Result<Tree> {
    set.sample_within(alpha, rng, DEFAULT_MAX_ATTEMPTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction() {
        let g = LevelGrid::default();
        assert_eq!(g.len(), 1000);
        assert_eq!(g.levels()[949], 0.95);
        assert_eq!(g.levels()[999], 1.0);
        assert_eq!(LevelGrid::with_step(0.05).unwrap().len(), 20);
        assert!(LevelGrid::with_step(0.3).is_err());
        assert!(LevelGrid::new(vec![0.5, 0.5]).is_err());
        assert!(LevelGrid::new(vec![0.5, 1.1]).is_err());
    }

    #[test]
    fn infinite_orders_last() {
        assert!(Level(1.0) < Level::INFINITE);
        assert_eq!(Level::INFINITE.to_string(), "inf");
        assert_eq!("inf".parse::<Level>().unwrap(), Level::INFINITE);
        assert_eq!("0.25".parse::<Level>().unwrap(), Level(0.25));
    }
}
