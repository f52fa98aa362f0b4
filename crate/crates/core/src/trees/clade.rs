use std::cmp::Ordering;
use std::fmt;

use smallvec::{smallvec, SmallVec};

use crate::{Error, Result};

type Words = SmallVec<[u64; 2]>;

/// A set of taxa stored as a fixed-width bitset (64-bit words).
///
/// Equality and hashing are by bit pattern. The total order compares the
/// bitsets as unsigned integers, most significant word first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clade {
    words: Words,
}

impl Clade {
    pub fn empty(n_taxa: usize) -> Self {
        Clade { words: smallvec![0; n_taxa.div_ceil(64).max(1)] }
    }

    pub fn singleton(n_taxa: usize, taxon: usize) -> Self {
        let mut c = Self::empty(n_taxa);
        c.insert(taxon);
        c
    }

    /// The clade containing every taxon.
    pub fn full(n_taxa: usize) -> Self {
        let mut c = Self::empty(n_taxa);
        for i in 0..n_taxa {
            c.insert(i);
        }
        c
    }

    pub fn from_indices(n_taxa: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::empty(n_taxa);
        for i in indices {
            c.insert(i);
        }
        c
    }

    pub fn insert(&mut self, taxon: usize) {
        self.words[taxon / 64] |= 1u64 << (taxon % 64);
    }

    pub fn contains(&self, taxon: usize) -> bool {
        self.words
            .get(taxon / 64)
            .is_some_and(|w| w & (1u64 << (taxon % 64)) != 0)
    }

    /// Number of taxa.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_leaf(&self) -> bool {
        self.len() == 1
    }

    /// Smallest taxon index, if any.
    pub fn lowest(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn union(&self, other: &Clade) -> Clade {
        Clade { words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect() }
    }

    pub fn intersection(&self, other: &Clade) -> Clade {
        Clade { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn difference(&self, other: &Clade) -> Clade {
        Clade { words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect() }
    }

    pub fn is_disjoint(&self, other: &Clade) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Clade) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Taxon indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// Fixed-width lowercase hex, most significant digit first,
    /// `ceil(n_taxa / 4)` digits.
    pub fn to_hex(&self, n_taxa: usize) -> String {
        let digits = n_taxa.div_ceil(4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.words[bit / 64] >> (bit % 64)) & 0xf;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(hex: &str, n_taxa: usize) -> Result<Clade> {
        let bad = |m: &str| Error::InvalidArgument(format!("clade '{hex}': {m}"));
        let mut c = Clade::empty(n_taxa);
        for (d, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| bad("not hexadecimal"))? as u64;
            for b in 0..4 {
                if nibble & (1 << b) != 0 {
                    let taxon = d * 4 + b;
                    if taxon >= n_taxa {
                        return Err(bad("taxon index out of range"));
                    }
                    c.insert(taxon);
                }
            }
        }
        Ok(c)
    }
}

impl Ord for Clade {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words.iter().rev().cmp(other.words.iter().rev())
    }
}

impl PartialOrd for Clade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Clade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An unordered pair of disjoint clades together with their union.
///
/// `left` is always the smaller clade in the [`Clade`] order, so a split
/// has a single representation regardless of how it was built.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct CladeSplit {
    pub parent: Clade,
    pub left: Clade,
    pub right: Clade,
}

impl CladeSplit {
    pub fn new(a: Clade, b: Clade) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("clade split with an empty child".into()));
        }
        if !a.is_disjoint(&b) {
            return Err(Error::InvalidArgument("clade split children overlap".into()));
        }
        let parent = a.union(&b);
        let (left, right) = if a <= b { (a, b) } else { (b, a) };
        Ok(CladeSplit { parent, left, right })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn set_operations() {
        let a = Clade::from_indices(70, [0, 3, 65]);
        let b = Clade::from_indices(70, [3, 69]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.lowest(), Some(0));
        assert_eq!(b.lowest(), Some(3));
        assert_eq!(a.intersection(&b), Clade::singleton(70, 3));
        assert_eq!(a.union(&b).iter().collect::<Vec<_>>(), vec![0, 3, 65, 69]);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 65]);
        assert!(!a.is_disjoint(&b));
        assert!(Clade::singleton(70, 65).is_subset(&a));
        assert!(Clade::empty(70).is_empty());
    }

    #[test]
    fn order_is_numeric() {
        let small = Clade::from_indices(70, [63]);
        let large = Clade::from_indices(70, [64]);
        assert!(small < large);
        assert!(Clade::from_indices(5, [1]) < Clade::from_indices(5, [0, 4]));
    }

    #[test]
    fn split_is_canonical() {
        let x = Clade::from_indices(4, [0, 1]);
        let y = Clade::from_indices(4, [2]);
        let s1 = CladeSplit::new(x.clone(), y.clone()).unwrap();
        let s2 = CladeSplit::new(y, x).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.parent, Clade::from_indices(4, [0, 1, 2]));
        assert!(CladeSplit::new(Clade::from_indices(4, [0]), Clade::from_indices(4, [0, 1])).is_err());
    }

    proptest! {
        #[test]
        fn hex_round_trip(n in 1usize..200, bits in proptest::collection::vec(any::<usize>(), 0..20)) {
            let c = Clade::from_indices(n, bits.iter().map(|b| b % n));
            let hex = c.to_hex(n);
            prop_assert_eq!(hex.len(), n.div_ceil(4));
            prop_assert_eq!(Clade::from_hex(&hex, n).unwrap(), c);
        }
    }
}
