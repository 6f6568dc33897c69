//! Numerical checks of the union-information axioms on concrete cases.
//!
//! * GP: nonnegative, and zero when the target is constant.
//! * Eq: unchanged when a part or the target is relabeled bijectively.
//! * M0: appending a coarsening of a member leaves the value unchanged;
//!   appending anything never lowers it.
//! * S0: unchanged under reordering of the family.
//! * SR: a single part gives its mutual information with the target.
//! * UB: at most `I(X; Y)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{LabeledPart, UnionMeasure};
use crate::distribution::{entropy_of, JointDistribution, VariableSelector};
use crate::error::Result;
use crate::parts::{self, PartFamily};

const MAX_FAILURES_KEPT: usize = 5;

/// A distribution with one family to test.
#[derive(Debug, Clone)]
pub struct AxiomCase {
    pub name: String,
    pub dist: JointDistribution,
    pub family: PartFamily,
}

impl AxiomCase {
    /// Elements, every bipartition, every Almost pair and the full Almost
    /// family of `dist`.
    pub fn standard(name: &str, dist: &JointDistribution) -> Result<Vec<AxiomCase>> {
        let n = dist.predictors().len();
        let mut families = vec![parts::elements(n)?];
        families.extend(parts::all_bipartitions(n)?.iter().map(|b| b.family()));
        families.extend(parts::almost_pairs(n)?);
        families.push(parts::all_almosts(n)?);
        Ok(families
            .into_iter()
            .map(|family| AxiomCase { name: format!("{name} {family}"), dist: dist.clone(), family })
            .collect())
    }
}

/// `trials` random binary distributions, alternating two and three
/// predictors, each expanded with [`AxiomCase::standard`].
pub fn random_suite(trials: usize, seed: u64) -> Result<Vec<AxiomCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for t in 0..trials {
        let n = 2 + t % 2;
        let sparsity = rng.gen_range(0.0..0.5);
        let d = JointDistribution::random(&mut rng, &vec![2; n], 2, sparsity);
        cases.extend(AxiomCase::standard(&format!("random#{t}"), &d)?);
    }
    Ok(cases)
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomResult {
    pub axiom: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub max_violation: f64,
    pub failures: Vec<String>,
}

impl AxiomResult {
    fn new(axiom: &'static str) -> Self {
        AxiomResult { axiom, passed: true, checks: 0, max_violation: 0.0, failures: Vec::new() }
    }

    /// Records a check whose violation must not exceed `tol`.
    fn record(&mut self, case: &str, violation: f64, tol: f64) {
        self.checks += 1;
        let violation = violation.max(0.0);
        self.max_violation = self.max_violation.max(violation);
        if !(violation <= tol) {
            self.passed = false;
            if self.failures.len() < MAX_FAILURES_KEPT {
                self.failures.push(format!("{case}: violation {violation:.3e}"));
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub measure: &'static str,
    pub tolerance: f64,
    pub cases: usize,
    pub passed: bool,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn get(&self, axiom: &str) -> Option<&AxiomResult> {
        self.results.iter().find(|r| r.axiom == axiom)
    }
}

/// Runs every axiom on every case. Random relabelings and appended parts
/// are drawn from `seed`. The constant-target part of GP is held to
/// `min(tol, 1e-9)`.
pub fn check_axioms(measure: &UnionMeasure, cases: &[AxiomCase], seed: u64) -> Result<AxiomReport> {
    let tol = measure.settings.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gp = AxiomResult::new("GP");
    let mut eq = AxiomResult::new("Eq");
    let mut m0 = AxiomResult::new("M0");
    let mut s0 = AxiomResult::new("S0");
    let mut sr = AxiomResult::new("SR");
    let mut ub = AxiomResult::new("UB");

    for case in cases {
        let d = &case.dist;
        let name = case.name.as_str();
        let parts: Vec<LabeledPart> =
            case.family.parts().iter().map(|p| LabeledPart::projection(d, p)).collect::<Result<_>>()?;
        let value = measure.union_of(d, &parts)?;
        let whole = d.whole_mi();

        gp.record(name, -value, tol);
        let flat = constant_target(d)?;
        let flat_value = measure.union_of(&flat, &rebind(&parts, &flat)?)?;
        gp.record(&format!("{name} (constant Y)"), flat_value.abs(), tol.min(1e-9));

        ub.record(name, value - whole, tol);

        for part in &parts {
            let single = measure.union_of(d, std::slice::from_ref(part))?;
            let mi = part_mi(d, part);
            sr.record(name, (single - mi).abs(), tol);
        }

        let mut shuffled = parts.clone();
        shuffled.reverse();
        shuffled.shuffle(&mut rng);
        s0.record(name, (measure.union_of(d, &shuffled)? - value).abs(), tol);

        let relabeled: Vec<LabeledPart> =
            parts.iter().map(|p| p.mapped(&random_permutation(&mut rng, p.n_labels()))).collect::<Result<_>>()?;
        eq.record(name, (measure.union_of(d, &relabeled)? - value).abs(), tol);
        let ty = d.target();
        let perm = random_permutation(&mut rng, d.alphabet_size(ty));
        let dy = d.relabel(ty, &perm)?;
        eq.record(&format!("{name} (target)"), (measure.union_of(&dy, &rebind(&parts, &dy)?)? - value).abs(), tol);

        let i = rng.gen_range(0..parts.len());
        let k = rng.gen_range(1..=parts[i].n_labels().max(1));
        let coarse: Vec<u32> = (0..parts[i].n_labels()).map(|_| rng.gen_range(0..k as u32)).collect();
        let mut with_poorer = parts.clone();
        with_poorer.push(parts[i].mapped(&coarse)?);
        m0.record(&format!("{name} (+poorer)"), (measure.union_of(d, &with_poorer)? - value).abs(), tol);
        let mut with_any = parts.clone();
        with_any.push(random_part(&mut rng, d)?);
        m0.record(&format!("{name} (+any)"), value - measure.union_of(d, &with_any)?, tol);
    }

    let results = vec![gp, eq, m0, s0, sr, ub];
    Ok(AxiomReport {
        measure: measure.kind.name(),
        tolerance: tol,
        cases: cases.len(),
        passed: results.iter().all(|r| r.passed),
        results,
    })
}

fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    p.shuffle(rng);
    p
}

/// A random labeling of a random nonempty set of predictors.
fn random_part<R: Rng>(rng: &mut R, d: &JointDistribution) -> Result<LabeledPart> {
    let preds = d.predictors();
    let mut vars: Vec<usize> = preds.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if vars.is_empty() {
        vars.push(*preds.choose(rng).expect("predictors exist"));
    }
    let size: usize = vars.iter().map(|&v| d.alphabet_size(v)).product();
    let k = rng.gen_range(1..=size) as u32;
    let table = (0..size).map(|_| rng.gen_range(0..k)).collect();
    LabeledPart::from_table(d, vars, table)
}

/// Same predictors with the target collapsed to a single symbol.
fn constant_target(d: &JointDistribution) -> Result<JointDistribution> {
    let t = d.target();
    let mut alphabets: Vec<Vec<String>> = (0..d.arity()).map(|v| d.alphabet(v).to_vec()).collect();
    alphabets[t] = vec![d.alphabet(t)[0].clone()];
    let rows = d.support().iter().map(|(r, p)| {
        let mut r = r.clone();
        r[t] = 0;
        (r, *p)
    });
    JointDistribution::new(d.names().to_vec(), alphabets, t, rows)
}

/// The same parts over another distribution with identical predictors.
fn rebind(parts: &[LabeledPart], d: &JointDistribution) -> Result<Vec<LabeledPart>> {
    parts.iter().map(|p| LabeledPart::from_table(d, p.vars().to_vec(), p.table().to_vec())).collect()
}

fn part_mi(d: &JointDistribution, part: &LabeledPart) -> f64 {
    let mut joint = std::collections::BTreeMap::<(u32, u32), f64>::new();
    for (r, p) in d.support() {
        *joint.entry((part.label_of(r), r[d.target()])).or_insert(0.0) += p;
    }
    let mut left = std::collections::BTreeMap::<u32, f64>::new();
    for (&(l, _), p) in &joint {
        *left.entry(l).or_insert(0.0) += p;
    }
    let hy = d.entropy(&VariableSelector::single(d.target())).unwrap_or(0.0);
    (entropy_of(left.values().copied()) + hy - entropy_of(joint.values().copied())).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_passes_for_both_measures() {
        let d = JointDistribution::parse("# vars: X1 X2 Y\n0\t0\t0\t1/4\n0\t1\t1\t1/4\n1\t0\t1\t1/4\n1\t1\t0\t1/4\n").unwrap();
        let cases = AxiomCase::standard("xor", &d).unwrap();
        for m in [UnionMeasure::min_synergy(), UnionMeasure::max_single_mi()] {
            let report = check_axioms(&m, &cases, 0).unwrap();
            assert!(report.passed, "{report:?}");
            assert_eq!(report.results.len(), 6);
        }
    }
}
