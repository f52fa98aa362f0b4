use std::collections::HashSet;

use super::{Clade, Tree};
use crate::{Error, Result};

/// Rooted Robinson-Foulds distance: the size of the symmetric difference of
/// the two trees' clade sets, ignoring the root clade. At most `2(n - 2)`.
pub fn rooted_rf(a: &Tree, b: &Tree) -> Result<usize> {
    if !a.taxa().same_as(b.taxa()) {
        return Err(Error::Taxon("trees are on different taxon sets".into()));
    }
    let n = a.n_taxa();
    let nontrivial = |t: &Tree| -> HashSet<Clade> { t.clades().filter(|c| c.len() < n).cloned().collect() };
    let (ca, cb) = (nontrivial(a), nontrivial(b));
    Ok(ca.symmetric_difference(&cb).count())
}
