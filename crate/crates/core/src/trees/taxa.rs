use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Ordered set of taxon labels; positions index the bits of every [`Clade`](super::Clade).
#[derive(Clone)]
pub struct TaxonSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl TaxonSet {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Taxon("taxon set is empty".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::Taxon("empty taxon label".into()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::Taxon(format!("duplicate taxon label '{label}'")));
            }
        }
        Ok(Arc::new(TaxonSet { labels, index }))
    }

    /// Taxon set whose order is the lexicographic order of `labels`.
    pub fn sorted<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Number of 64-bit words in a clade over this taxon set.
    pub fn words(&self) -> usize {
        self.labels.len().div_ceil(64)
    }

    /// Same labels in the same order.
    pub fn same_as(&self, other: &TaxonSet) -> bool {
        std::ptr::eq(self, other) || self.labels == other.labels
    }
}

impl PartialEq for TaxonSet {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for TaxonSet {}

impl fmt::Debug for TaxonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.labels).finish()
    }
}
