//! Finite joint distributions, TSV I/O and Shannon quantities (in bits).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Allowed deviation of the total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Masses below this are treated as zero.
pub const MASS_EPS: f64 = 1e-15;

/// A sorted, duplicate-free set of variable indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableSelector(Vec<usize>);

impl VariableSelector {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VariableSelector(v)
    }

    pub fn single(index: usize) -> Self {
        VariableSelector(vec![index])
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

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn union(&self, other: &VariableSelector) -> VariableSelector {
        VariableSelector::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// First shared index, if any.
    pub fn overlap(&self, other: &VariableSelector) -> Option<usize> {
        self.0.iter().copied().find(|i| other.contains(*i))
    }

    fn check(&self, arity: usize) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::EmptySelector);
        }
        match self.0.iter().find(|&&i| i >= arity) {
            Some(&index) => Err(Error::SelectorOutOfRange { index, arity }),
            None => Ok(()),
        }
    }
}

/// A probability mass function over named, finite-alphabet variables,
/// one of which is designated the target.
///
/// Outcomes are stored as symbol-index tuples in lexicographic order,
/// only those with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    names: Vec<String>,
    alphabets: Vec<Vec<String>>,
    target: usize,
    support: Vec<(Vec<u32>, f64)>,
}

impl JointDistribution {
    /// Builds a distribution from symbol-index rows. Duplicate rows are
    /// summed, masses below [`MASS_EPS`] dropped and the result renormalized.
    pub fn new<I>(names: Vec<String>, alphabets: Vec<Vec<String>>, target: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let arity = names.len();
        if arity == 0 || alphabets.len() != arity {
            return Err(Error::Parse { line: 0, msg: "names and alphabets disagree".into() });
        }
        if target >= arity {
            return Err(Error::SelectorOutOfRange { index: target, arity });
        }
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (i, (row, p)) in rows.into_iter().enumerate() {
            if row.len() != arity {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {} symbols, got {}", arity, row.len()) });
            }
            if let Some((k, _)) = row.iter().enumerate().find(|(k, &s)| s as usize >= alphabets[*k].len()) {
                return Err(Error::Parse { line: i + 1, msg: format!("symbol index out of range for {}", names[k]) });
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::NegativeProbability { line: i + 1, value: p });
            }
            *acc.entry(row).or_insert(0.0) += p;
        }
        let sum: f64 = acc.values().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum, tol: NORMALIZATION_TOL });
        }
        let support: Vec<(Vec<u32>, f64)> =
            acc.into_iter().filter(|(_, p)| *p >= MASS_EPS).map(|(r, p)| (r, p / sum)).collect();
        Ok(JointDistribution { names, alphabets, target, support })
    }

    /// Builds a distribution from rows of symbol strings. Alphabets are
    /// ordered by first appearance.
    pub fn from_symbols<S: AsRef<str>>(names: &[&str], target: &str, rows: &[(Vec<S>, f64)]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let target = names.iter().position(|n| n == target).ok_or_else(|| Error::UnknownVariable(target.into()))?;
        let mut alphabets = vec![Vec::<String>::new(); names.len()];
        let mut indexed = Vec::with_capacity(rows.len());
        for (i, (row, p)) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {} symbols, got {}", names.len(), row.len()) });
            }
            let idx = row.iter().enumerate().map(|(k, s)| intern(&mut alphabets[k], s.as_ref())).collect();
            indexed.push((idx, *p));
        }
        JointDistribution::new(names, alphabets, target, indexed)
    }

    /// Parses the TSV format:
    ///
    /// ```text
    /// # vars: X1 X2 Y  target: Y
    /// 0	0	0	1/4
    /// ```
    ///
    /// Lines starting with `#` after the header are comments. The target
    /// defaults to the last variable.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(Vec<String>, Option<String>)> = None;
        let mut alphabets: Vec<Vec<String>> = Vec::new();
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                if header.is_none() {
                    if let Some(spec) = rest.strip_prefix("vars:") {
                        let (vars, target) = match spec.split_once("target:") {
                            Some((v, t)) => (v, Some(t.trim().to_string())),
                            None => (spec, None),
                        };
                        let names: Vec<String> = vars.split_whitespace().map(str::to_string).collect();
                        if names.is_empty() {
                            return Err(Error::Parse { line, msg: "header lists no variables".into() });
                        }
                        alphabets = vec![Vec::new(); names.len()];
                        header = Some((names, target));
                    }
                }
                continue;
            }
            let Some((names, _)) = header.as_ref() else {
                return Err(Error::Parse { line, msg: "data before `# vars:` header".into() });
            };
            let fields: Vec<&str> = if trimmed.contains('\t') {
                trimmed.split('\t').map(str::trim).collect()
            } else {
                trimmed.split_whitespace().collect()
            };
            if fields.len() != names.len() + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} symbols and a probability, got {} fields", names.len(), fields.len()),
                });
            }
            let p = parse_probability(fields[names.len()]).map_err(|msg| Error::Parse { line, msg })?;
            if p < 0.0 {
                return Err(Error::NegativeProbability { line, value: p });
            }
            let idx = fields[..names.len()].iter().enumerate().map(|(k, s)| intern(&mut alphabets[k], s)).collect();
            rows.push((idx, p));
        }
        let (names, target) = header.ok_or(Error::Parse { line: 0, msg: "missing `# vars:` header".into() })?;
        let target = match target {
            Some(t) if !t.is_empty() => names.iter().position(|n| *n == t).ok_or(Error::UnknownVariable(t))?,
            _ => names.len() - 1,
        };
        JointDistribution::new(names, alphabets, target, rows)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        JointDistribution::parse(&std::fs::read_to_string(path)?)
    }

    /// Serializes to the TSV format accepted by [`parse`](Self::parse).
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# vars: {}  target: {}\n", self.names.join(" "), self.names[self.target]);
        for (row, p) in &self.support {
            for (k, &s) in row.iter().enumerate() {
                out.push_str(&self.alphabets[k][s as usize]);
                out.push('\t');
            }
            let _ = writeln!(out, "{p}");
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn alphabet(&self, var: usize) -> &[String] {
        &self.alphabets[var]
    }

    pub fn alphabet_size(&self, var: usize) -> usize {
        self.alphabets[var].len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Indices of all non-target variables, in column order.
    pub fn predictors(&self) -> Vec<usize> {
        (0..self.arity()).filter(|&i| i != self.target).collect()
    }

    pub fn support(&self) -> &[(Vec<u32>, f64)] {
        &self.support
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    /// Selector over the named variables.
    pub fn selector(&self, names: &[&str]) -> Result<VariableSelector> {
        let idx = names.iter().map(|n| self.index_of(n)).collect::<Result<Vec<_>>>()?;
        Ok(VariableSelector::new(idx))
    }

    pub fn target_selector(&self) -> VariableSelector {
        VariableSelector::single(self.target)
    }

    pub fn predictor_selector(&self) -> VariableSelector {
        VariableSelector::new(self.predictors())
    }

    /// Same distribution with a different target.
    pub fn with_target(&self, target: usize) -> Result<Self> {
        if target >= self.arity() {
            return Err(Error::SelectorOutOfRange { index: target, arity: self.arity() });
        }
        let mut d = self.clone();
        d.target = target;
        Ok(d)
    }

    /// Marginal masses over the selected variables, keyed by symbol tuples.
    pub fn marginal_pmf(&self, sel: &VariableSelector) -> Result<BTreeMap<Vec<u32>, f64>> {
        sel.check(self.arity())?;
        let mut acc = BTreeMap::new();
        for (row, p) in &self.support {
            let key: Vec<u32> = sel.indices().iter().map(|&i| row[i]).collect();
            *acc.entry(key).or_insert(0.0) += p;
        }
        Ok(acc)
    }

    /// The marginal distribution over the selected variables. The target is
    /// kept if selected, otherwise the last selected variable becomes it.
    pub fn marginalize(&self, sel: &VariableSelector) -> Result<JointDistribution> {
        let pmf = self.marginal_pmf(sel)?;
        let idx = sel.indices();
        let target = idx.iter().position(|&i| i == self.target).unwrap_or(idx.len() - 1);
        Ok(JointDistribution {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            alphabets: idx.iter().map(|&i| self.alphabets[i].clone()).collect(),
            target,
            support: pmf.into_iter().collect(),
        })
    }

    /// Shannon entropy of the selected variables, in bits.
    pub fn entropy(&self, sel: &VariableSelector) -> Result<f64> {
        Ok(entropy_of(self.marginal_pmf(sel)?.values().copied()))
    }

    /// `H(A | B) = H(A, B) - H(B)`.
    pub fn conditional_entropy(&self, a: &VariableSelector, b: &VariableSelector) -> Result<f64> {
        let ab = self.entropy(&a.union(b))?;
        Ok((ab - self.entropy(b)?).max(0.0))
    }

    /// `I(A; B)` for disjoint selectors.
    pub fn mutual_information(&self, a: &VariableSelector, b: &VariableSelector) -> Result<f64> {
        a.check(self.arity())?;
        b.check(self.arity())?;
        if let Some(i) = a.overlap(b) {
            return Err(Error::OverlappingSelectors(i));
        }
        let v = self.entropy(a)? + self.entropy(b)? - self.entropy(&a.union(b))?;
        Ok(v.max(0.0))
    }

    /// `I(predictors; target)`.
    pub fn whole_mi(&self) -> f64 {
        self.mutual_information(&self.predictor_selector(), &self.target_selector()).unwrap_or(0.0)
    }

    /// Applies a permutation `perm[old] = new` to the symbols of one variable.
    pub fn relabel(&self, var: usize, perm: &[u32]) -> Result<JointDistribution> {
        let k = self.alphabet_size(var);
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| (p as usize) >= k || std::mem::replace(&mut seen[p as usize], true)) {
            return Err(Error::InvalidPart(format!("not a permutation of {k} symbols")));
        }
        let mut alphabets = self.alphabets.clone();
        for (old, &new) in perm.iter().enumerate() {
            alphabets[var][new as usize] = self.alphabets[var][old].clone();
        }
        let rows = self.support.iter().map(|(r, p)| {
            let mut r = r.clone();
            r[var] = perm[r[var] as usize];
            (r, *p)
        });
        JointDistribution::new(self.names.clone(), alphabets, self.target, rows)
    }

    /// Random distribution over predictors `X1..Xn` with the given alphabet
    /// sizes and a target `Y`. Each outcome is kept with probability
    /// `1 - sparsity`; kept weights are i.i.d. exponential.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, sizes: &[usize], target_size: usize, sparsity: f64) -> JointDistribution {
        let mut names: Vec<String> = (1..=sizes.len()).map(|i| format!("X{i}")).collect();
        names.push("Y".into());
        let mut dims = sizes.to_vec();
        dims.push(target_size);
        let alphabets: Vec<Vec<String>> = dims.iter().map(|&k| (0..k).map(|s| s.to_string()).collect()).collect();
        let cells: usize = dims.iter().product();
        let mut w: Vec<f64> = (0..cells)
            .map(|_| if rng.gen::<f64>() < sparsity { 0.0 } else { rng.sample::<f64, _>(Exp1) })
            .collect();
        if w.iter().all(|&x| x == 0.0) {
            let i = rng.gen_range(0..cells);
            w[i] = 1.0;
        }
        let total: f64 = w.iter().sum();
        let rows = w.into_iter().enumerate().filter(|(_, x)| *x > 0.0).map(|(mut c, x)| {
            let mut row = vec![0u32; dims.len()];
            for k in (0..dims.len()).rev() {
                row[k] = (c % dims[k]) as u32;
                c /= dims[k];
            }
            (row, x / total)
        });
        let target = names.len() - 1;
        JointDistribution::new(names, alphabets, target, rows).expect("random distribution is valid")
    }
}

/// Entropy in bits of a collection of masses, with `0 log 0 = 0`.
pub fn entropy_of<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    let h: f64 = masses.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    h.max(0.0)
}

fn intern(alphabet: &mut Vec<String>, symbol: &str) -> u32 {
    match alphabet.iter().position(|s| s == symbol) {
        Some(i) => i as u32,
        None => {
            alphabet.push(symbol.to_string());
            (alphabet.len() - 1) as u32
        }
    }
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("cannot parse probability `{s}`");
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const XOR: &str = "# vars: X1 X2 Y  target: Y\n0\t0\t0\t1/4\n0\t1\t1\t1/4\n1\t0\t1\t1/4\n1\t1\t0\t1/4\n";

    #[test]
    fn parses_xor() {
        let d = JointDistribution::parse(XOR).unwrap();
        assert_eq!(d.arity(), 3);
        assert_eq!(d.target(), 2);
        assert_eq!(d.support().len(), 4);
        let x = d.predictor_selector();
        let y = d.target_selector();
        assert!((d.entropy(&y).unwrap() - 1.0).abs() < 1e-12);
        assert!((d.mutual_information(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert!(d.mutual_information(&VariableSelector::single(0), &y).unwrap().abs() < 1e-12);
    }

    #[test]
    fn target_defaults_to_last() {
        let d = JointDistribution::parse("# vars: A B\na\tb\t1\n").unwrap();
        assert_eq!(d.target(), 1);
    }

    #[test]
    fn duplicates_summed_and_comments_skipped() {
        let d = JointDistribution::parse("# vars: A Y\n# note\na\t0\t0.25\na\t0\t0.25\nb\t1\t0.5\n").unwrap();
        assert_eq!(d.support().len(), 2);
        assert!((d.support()[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(JointDistribution::parse("# vars: A Y\na\t0\t0.5\n"), Err(Error::NotNormalized { .. })));
        assert!(matches!(
            JointDistribution::parse("# vars: A Y\na\t0\t-0.5\nb\t0\t1.5\n"),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(matches!(JointDistribution::parse("a\t0\t1\n"), Err(Error::Parse { .. })));
        assert!(matches!(JointDistribution::parse("# vars: A Y\na\t1\n"), Err(Error::Parse { .. })));
        assert!(matches!(JointDistribution::parse("# vars: A Y  target: Z\na\t0\t1\n"), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn tiny_masses_dropped() {
        let d = JointDistribution::parse("# vars: A Y\na\t0\t1\nb\t1\t1e-17\n").unwrap();
        assert_eq!(d.support().len(), 1);
        assert_eq!(d.alphabet_size(0), 2);
    }

    #[test]
    fn selector_errors() {
        let d = JointDistribution::parse(XOR).unwrap();
        assert!(matches!(d.entropy(&VariableSelector::new([])), Err(Error::EmptySelector)));
        assert!(matches!(d.entropy(&VariableSelector::single(7)), Err(Error::SelectorOutOfRange { .. })));
        let a = VariableSelector::new([0, 1]);
        assert!(matches!(d.mutual_information(&a, &a), Err(Error::OverlappingSelectors(0))));
    }

    #[test]
    fn tsv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = JointDistribution::random(&mut rng, &[2, 3], 2, 0.3);
        let e = JointDistribution::parse(&d.to_tsv()).unwrap();
        assert_eq!(d.support().len(), e.support().len());
        for s in [VariableSelector::new([0, 1]), VariableSelector::new([0, 2]), VariableSelector::new([0, 1, 2])] {
            assert!((d.entropy(&s).unwrap() - e.entropy(&s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn relabel_preserves_entropies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = JointDistribution::random(&mut rng, &[3, 2], 2, 0.0);
        let r = d.relabel(0, &[2, 0, 1]).unwrap();
        let xy = VariableSelector::new([0, 2]);
        assert!((d.entropy(&xy).unwrap() - r.entropy(&xy).unwrap()).abs() < 1e-12);
        assert!(d.relabel(0, &[0, 0, 1]).is_err());
    }

    fn arb_dist() -> impl Strategy<Value = JointDistribution> {
        (any::<u64>(), 1usize..4, 0.0f64..0.6).prop_map(|(seed, n, sparsity)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..4)).collect();
            JointDistribution::random(&mut rng, &sizes, 3, sparsity)
        })
    }

    proptest! {
        #[test]
        fn entropy_bounds(d in arb_dist()) {
            for i in 0..d.arity() {
                let h = d.entropy(&VariableSelector::single(i)).unwrap();
                prop_assert!(h >= 0.0);
                prop_assert!(h <= (d.alphabet_size(i) as f64).log2() + 1e-12);
            }
        }

        #[test]
        fn chain_rule_and_symmetry(d in arb_dist()) {
            let x = d.predictor_selector();
            let y = d.target_selector();
            let hxy = d.entropy(&x.union(&y)).unwrap();
            let hx = d.entropy(&x).unwrap();
            prop_assert!((hxy - hx - d.conditional_entropy(&y, &x).unwrap()).abs() < 1e-9);
            let ixy = d.mutual_information(&x, &y).unwrap();
            prop_assert!((ixy - d.mutual_information(&y, &x).unwrap()).abs() < 1e-12);
            prop_assert!(ixy >= 0.0);
            prop_assert!(ixy <= d.entropy(&y).unwrap() + 1e-9);
        }

        #[test]
        fn marginalization_commutes(d in arb_dist()) {
            let all = VariableSelector::new(0..d.arity());
            let m = d.marginalize(&all).unwrap();
            prop_assert_eq!(m.support(), d.support());
            let first = VariableSelector::new(0..d.arity() - 1);
            let a = d.marginalize(&first).unwrap().marginalize(&VariableSelector::single(0)).unwrap();
            let b = d.marginalize(&VariableSelector::single(0)).unwrap();
            prop_assert_eq!(a.support().len(), b.support().len());
            for ((ra, pa), (rb, pb)) in a.support().iter().zip(b.support()) {
                prop_assert_eq!(ra, rb);
                prop_assert!((pa - pb).abs() < 1e-12);
            }
        }

        #[test]
        fn mi_monotone_in_selector(d in arb_dist()) {
            let y = d.target_selector();
            let x = d.predictor_selector();
            let whole = d.mutual_information(&x, &y).unwrap();
            for &i in x.indices() {
                prop_assert!(d.mutual_information(&VariableSelector::single(i), &y).unwrap() <= whole + 1e-9);
            }
        }
    }
}
