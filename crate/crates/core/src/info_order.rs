//! Derived variables over a fixed distribution and the information order
//! between them: `u ⪯ v` when `u` is a function of `v` on the support.
//!
//! Join is the pair `(u, v)`; meet is the Gács–Körner common variable,
//! i.e. the connected components of the bipartite graph linking the labels
//! that co-occur in some outcome.

use std::collections::HashMap;

use crate::distribution::{entropy_of, JointDistribution, VariableSelector};
use crate::error::{Error, Result};

/// A labeling of the support outcomes of a distribution.
///
/// Labels are canonical: the first outcome (in support order) gets 0, the
/// next unseen value gets 1, and so on. Two derived variables are therefore
/// equal as values iff they induce the same partition of the support.
#[derive(Debug, Clone)]
pub struct DerivedVariable<'a> {
    base: &'a JointDistribution,
    labels: Vec<u32>,
    n_labels: usize,
}

impl PartialEq for DerivedVariable<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.base, other.base) && self.labels == other.labels
    }
}

impl<'a> DerivedVariable<'a> {
    /// The variable read off the selected columns.
    pub fn from_selector(base: &'a JointDistribution, sel: &VariableSelector) -> Result<Self> {
        if sel.is_empty() {
            return Err(Error::EmptySelector);
        }
        if let Some(&index) = sel.indices().iter().find(|&&i| i >= base.arity()) {
            return Err(Error::SelectorOutOfRange { index, arity: base.arity() });
        }
        let keys = base.support().iter().map(|(row, _)| sel.indices().iter().map(|&i| row[i]).collect::<Vec<_>>());
        Ok(Self::canonical(base, keys))
    }

    /// An arbitrary labeling of the support, canonicalized.
    pub fn from_labels<T: Eq + std::hash::Hash + Clone>(base: &'a JointDistribution, labels: &[T]) -> Result<Self> {
        if labels.len() != base.support().len() {
            return Err(Error::LabelLength { expected: base.support().len(), got: labels.len() });
        }
        Ok(Self::canonical(base, labels.iter().cloned()))
    }

    fn canonical<T: Eq + std::hash::Hash, I: IntoIterator<Item = T>>(base: &'a JointDistribution, keys: I) -> Self {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let labels: Vec<u32> = keys
            .into_iter()
            .map(|k| {
                let next = ids.len() as u32;
                *ids.entry(k).or_insert(next)
            })
            .collect();
        DerivedVariable { base, labels, n_labels: ids.len() }
    }

    pub fn base(&self) -> &'a JointDistribution {
        self.base
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    /// Probability of each label.
    pub fn pmf(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_labels];
        for (l, (_, p)) in self.labels.iter().zip(self.base.support()) {
            m[*l as usize] += p;
        }
        m
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.pmf())
    }

    /// `H(self | other)`.
    pub fn conditional_entropy(&self, other: &DerivedVariable<'a>) -> Result<f64> {
        Ok((join(self, other)?.entropy() - other.entropy()).max(0.0))
    }

    fn same_base(&self, other: &DerivedVariable<'_>) -> Result<()> {
        if std::ptr::eq(self.base, other.base) {
            Ok(())
        } else {
            Err(Error::MismatchedBase)
        }
    }
}

/// `u ⪯ v`: every label of `v` determines the label of `u`.
pub fn is_poorer(u: &DerivedVariable<'_>, v: &DerivedVariable<'_>) -> Result<bool> {
    u.same_base(v)?;
    let mut image = vec![u32::MAX; v.n_labels];
    for (&lu, &lv) in u.labels.iter().zip(&v.labels) {
        let slot = &mut image[lv as usize];
        if *slot == u32::MAX {
            *slot = lu;
        } else if *slot != lu {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `u ≅ v`: each is poorer than the other.
pub fn is_equivalent(u: &DerivedVariable<'_>, v: &DerivedVariable<'_>) -> Result<bool> {
    Ok(is_poorer(u, v)? && is_poorer(v, u)?)
}

/// The join `u ∨ v`, the pair of labels.
pub fn join<'a>(u: &DerivedVariable<'a>, v: &DerivedVariable<'a>) -> Result<DerivedVariable<'a>> {
    u.same_base(v)?;
    let pairs = u.labels.iter().zip(&v.labels).map(|(a, b)| (*a, *b));
    Ok(DerivedVariable::canonical(u.base, pairs))
}

/// The meet `u ∧ v`, the finest common coarsening.
pub fn meet<'a>(u: &DerivedVariable<'a>, v: &DerivedVariable<'a>) -> Result<DerivedVariable<'a>> {
    u.same_base(v)?;
    let mut sets = DisjointSets::new(u.n_labels + v.n_labels);
    for (&a, &b) in u.labels.iter().zip(&v.labels) {
        sets.union(a as usize, u.n_labels + b as usize);
    }
    let roots: Vec<usize> = u.labels.iter().map(|&a| sets.find(a as usize)).collect();
    Ok(DerivedVariable::canonical(u.base, roots))
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}
