//! Parts of the predictor set and families built from them.
//!
//! Predictors are addressed by position `0..n` (displayed as `X1..Xn`).
//! All enumerations are deterministic and lexicographic on index sets.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n` for which set partitions are enumerated.
pub const MAX_PARTITION_N: usize = 10;
/// Largest `n` for which parts and bipartitions are enumerated.
pub const MAX_SUBSET_N: usize = 20;

/// A nonempty proper subset of predictor positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartSpec(Vec<usize>);

impl PartSpec {
    /// Validated part of an `n`-predictor system (may equal the full set).
    pub fn new<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::InvalidPart("empty part".into()));
        }
        if let Some(&i) = v.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidPart(format!("index {} out of range for {n} predictors", i + 1)));
        }
        Ok(PartSpec(v))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Concatenated names, e.g. `X1X3`.
    pub fn label(&self, names: &[String]) -> String {
        self.0.iter().map(|&i| names[i].as_str()).collect()
    }
}

impl fmt::Display for PartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &i in &self.0 {
            write!(f, "X{}", i + 1)?;
        }
        Ok(())
    }
}

impl Serialize for PartSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A list of parts, treated as a set by the union measures.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartFamily(Vec<PartSpec>);

impl PartFamily {
    pub fn new(parts: Vec<PartSpec>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidFamily("empty family".into()));
        }
        Ok(PartFamily(parts))
    }

    pub fn parts(&self) -> &[PartSpec] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn label(&self, names: &[String]) -> String {
        let inner: Vec<String> = self.0.iter().map(|p| p.label(names)).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

impl fmt::Display for PartFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", inner.join(", "))
    }
}

impl Serialize for PartFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A partition of the predictors into at least two disjoint blocks.
///
/// Blocks are ordered by decreasing size, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionSpec(Vec<PartSpec>);

impl PartitionSpec {
    pub fn new(mut blocks: Vec<PartSpec>, n: usize) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidFamily("a partition needs at least two blocks".into()));
        }
        let mut seen = vec![false; n];
        for b in &blocks {
            for &i in b.indices() {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidFamily(format!("blocks are not disjoint at X{}", i + 1)));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidFamily(format!("X{} is not covered", i + 1)));
        }
        blocks.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(PartitionSpec(blocks))
    }

    pub fn blocks(&self) -> &[PartSpec] {
        &self.0
    }

    pub fn family(&self) -> PartFamily {
        PartFamily(self.0.clone())
    }

    pub fn label(&self, names: &[String]) -> String {
        let inner: Vec<String> = self.0.iter().map(|p| p.label(names)).collect();
        format!("{{{}}}", inner.join("|"))
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", inner.join("|"))
    }
}

impl Serialize for PartitionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_n(n: usize, limit: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewPredictors(n));
    }
    if n > limit {
        return Err(Error::EnumerationTooLarge { n, limit });
    }
    Ok(())
}

fn subset(mask: u64, n: usize) -> PartSpec {
    PartSpec((0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// All `2^n - 2` nonempty proper subsets, in lexicographic order.
pub fn all_parts(n: usize) -> Result<Vec<PartSpec>> {
    check_n(n, MAX_SUBSET_N)?;
    let full = (1u64 << n) - 1;
    let mut v: Vec<PartSpec> = (1..full).map(|m| subset(m, n)).collect();
    v.sort();
    Ok(v)
}

/// The singletons `{X1}, ..., {Xn}` as one family.
pub fn elements(n: usize) -> Result<PartFamily> {
    check_n(n, usize::MAX)?;
    Ok(PartFamily((0..n).map(|i| PartSpec(vec![i])).collect()))
}

/// All `2^(n-1) - 1` bipartitions. For n = 3 the order is
/// `{X1X2|X3}, {X1X3|X2}, {X2X3|X1}`.
pub fn all_bipartitions(n: usize) -> Result<Vec<PartitionSpec>> {
    check_n(n, MAX_SUBSET_N)?;
    let full = (1u64 << n) - 1;
    // Subsets containing X1 enumerate each bipartition exactly once.
    let mut v: Vec<PartitionSpec> = (1..full)
        .filter(|m| m & 1 == 1)
        .map(|m| PartitionSpec::new(vec![subset(m, n), subset(full ^ m, n)], n).expect("valid bipartition"))
        .collect();
    v.sort();
    Ok(v)
}

/// `A_1, ..., A_n` where `A_i` omits `X_i`.
pub fn almosts(n: usize) -> Result<Vec<PartSpec>> {
    check_n(n, usize::MAX)?;
    Ok((0..n).map(|i| PartSpec((0..n).filter(|&j| j != i).collect())).collect())
}

/// The `n(n-1)/2` families `{A_i, A_j}`, `i < j`, in lexicographic order.
pub fn almost_pairs(n: usize) -> Result<Vec<PartFamily>> {
    let a = almosts(n)?;
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            v.push(PartFamily(vec![a[i].clone(), a[j].clone()]));
        }
    }
    Ok(v)
}

/// The family of all Almosts.
pub fn all_almosts(n: usize) -> Result<PartFamily> {
    Ok(PartFamily(almosts(n)?))
}

/// All partitions with at least two blocks (`Bell(n) - 1` of them), in
/// restricted-growth-string order.
pub fn all_partitions(n: usize) -> Result<Vec<PartitionSpec>> {
    check_n(n, MAX_PARTITION_N)?;
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        if k >= 2 {
            let blocks = (0..k).map(|b| PartSpec((0..n).filter(|&i| rgs[i] == b).collect())).collect();
            out.push(PartitionSpec::new(blocks, n)?);
        }
        // Next restricted growth string: bump the rightmost position that
        // may grow, reset the tail to zero.
        let mut i = n - 1;
        loop {
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if i > 0 && rgs[i] <= prefix_max {
                rgs[i] += 1;
                for r in &mut rgs[i + 1..] {
                    *r = 0;
                }
                break;
            }
            if i <= 1 {
                return Ok(out);
            }
            i -= 1;
        }
    }
}
