//! Union information `I∪(P_1, ..., P_m → Y)`.
//!
//! [`MeasureKind::MinSynergy`] is the smallest `I_q(X; Y)` over joint
//! distributions `q` on the covered predictors and `Y` that keep every
//! pairwise marginal `q(P_i, Y) = p(P_i, Y)`. [`MeasureKind::MaxSingleMI`]
//! is the trivial lower bound `max_i I(P_i; Y)`.

mod axioms;
mod barrier;
mod oracle;
mod polytope;

use serde::{Deserialize, Serialize};

use crate::distribution::{entropy_of, JointDistribution};
use crate::error::{Error, Result};
use crate::parts::{PartFamily, PartSpec};

pub use axioms::{check_axioms, random_suite, AxiomCase, AxiomReport, AxiomResult};
pub use oracle::{brute_force_oracle_of, brute_force_union_oracle, OracleResult, OracleSettings};
pub use polytope::MarginalPolytope;

/// Largest joint alphabet (covered predictors times target) handled.
pub const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "minsyn")]
    MinSynergy,
    #[serde(rename = "maxmi")]
    MaxSingleMI,
}

impl MeasureKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::MinSynergy => "minsyn",
            MeasureKind::MaxSingleMI => "maxmi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for UnionSettings {
    fn default() -> Self {
        UnionSettings { tolerance: 1e-6, max_iterations: 10_000, restarts: 4, seed: 0 }
    }
}

impl UnionSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidSettings(format!("tolerance {} not in (0, 1)", self.tolerance)));
        }
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::InvalidSettings("max_iterations and restarts must be positive".into()));
        }
        Ok(())
    }
}

/// A union-information measure with its numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionMeasure {
    pub kind: MeasureKind,
    pub settings: UnionSettings,
}

impl UnionMeasure {
    pub fn new(kind: MeasureKind, settings: UnionSettings) -> Self {
        UnionMeasure { kind, settings }
    }

    pub fn min_synergy() -> Self {
        UnionMeasure::new(MeasureKind::MinSynergy, UnionSettings::default())
    }

    pub fn max_single_mi() -> Self {
        UnionMeasure::new(MeasureKind::MaxSingleMI, UnionSettings::default())
    }

    /// Union information of a family of predictor parts of `d`, in bits.
    pub fn union_information(&self, d: &JointDistribution, family: &PartFamily) -> Result<f64> {
        let parts = family.parts().iter().map(|p| LabeledPart::projection(d, p)).collect::<Result<Vec<_>>>()?;
        self.union_of(d, &parts)
    }

    /// Union information of arbitrary labeled parts, in bits.
    pub fn union_of(&self, d: &JointDistribution, parts: &[LabeledPart]) -> Result<f64> {
        Ok(self.solve(d, parts)?.value)
    }

    /// Full solve with diagnostics.
    pub fn solve(&self, d: &JointDistribution, parts: &[LabeledPart]) -> Result<UnionSolution> {
        self.settings.validate()?;
        if parts.is_empty() {
            return Err(Error::InvalidFamily("empty family".into()));
        }
        let mut parts = parts.to_vec();
        parts.sort();
        parts.dedup();
        let problem = Problem::new(d, &parts)?;
        let singles: Vec<f64> = (0..parts.len()).map(|i| problem.part_mi(i)).collect();
        let lower = singles.iter().copied().fold(0.0, f64::max);
        let upper = problem.joint_mi();
        let exact = |value: f64| UnionSolution { value, raw: value, gap: 0.0, iterations: 0, residual: 0.0 };
        if self.kind == MeasureKind::MaxSingleMI {
            return Ok(exact(lower));
        }
        if problem.h_y <= 0.0 {
            return Ok(exact(0.0));
        }
        if parts.len() == 1 {
            return Ok(exact(lower));
        }
        let mut sol = barrier::solve(&problem, &self.settings)?;
        let tol = self.settings.tolerance;
        sol.value = sol.raw.clamp(lower - tol, upper + tol).max(0.0);
        Ok(sol)
    }
}

/// Result of a union-information solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionSolution {
    /// Reported value in bits, clamped to `[max_i I(P_i;Y) - tol, I(X;Y) + tol]`.
    pub value: f64,
    /// Unclamped solver value.
    pub raw: f64,
    /// Certified optimality gap in bits.
    pub gap: f64,
    /// Newton iterations across all restarts.
    pub iterations: usize,
    /// Largest marginal-constraint violation of the recovered primal point.
    pub residual: f64,
}

/// A part given as a labeling of the joint symbols of some predictors.
///
/// `table` maps each tuple over `vars` (row-major, last variable fastest)
/// to a label. Projections use the identity table; relabelings and
/// coarsenings of a part are obtained by composing the table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledPart {
    vars: Vec<usize>,
    dims: Vec<usize>,
    table: Vec<u32>,
}

impl LabeledPart {
    /// The part read directly off the predictors in `part`.
    pub fn projection(d: &JointDistribution, part: &PartSpec) -> Result<Self> {
        let preds = d.predictors();
        let vars = part
            .indices()
            .iter()
            .map(|&i| preds.get(i).copied().ok_or_else(|| Error::InvalidPart(format!("X{} out of range", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        let dims: Vec<usize> = vars.iter().map(|&v| d.alphabet_size(v)).collect();
        let size = checked_product(&dims)?;
        Ok(LabeledPart { vars, dims, table: (0..size as u32).collect() })
    }

    /// A part over distribution variables `vars` with an explicit labeling.
    pub fn from_table(d: &JointDistribution, vars: Vec<usize>, table: Vec<u32>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidPart("part has no variables".into()));
        }
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != vars.len() {
            return Err(Error::InvalidPart("repeated variable".into()));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= d.arity() || v == d.target()) {
            return Err(Error::InvalidPart(format!("variable {v} is not a predictor")));
        }
        let dims: Vec<usize> = vars.iter().map(|&v| d.alphabet_size(v)).collect();
        let size = checked_product(&dims)?;
        if table.len() != size {
            return Err(Error::InvalidPart(format!("table has {} entries, expected {size}", table.len())));
        }
        Ok(LabeledPart { vars, dims, table })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn n_labels(&self) -> usize {
        self.table.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Composes the labeling with `map` (a bijection gives an equivalent
    /// part, any other map a poorer one).
    pub fn mapped(&self, map: &[u32]) -> Result<Self> {
        if map.len() < self.n_labels() {
            return Err(Error::InvalidPart("label map too short".into()));
        }
        Ok(LabeledPart { table: self.table.iter().map(|&l| map[l as usize]).collect(), ..self.clone() })
    }

    /// Label of a full distribution row.
    pub fn label_of(&self, row: &[u32]) -> u32 {
        let mut idx = 0usize;
        for (&v, &k) in self.vars.iter().zip(&self.dims) {
            idx = idx * k + row[v] as usize;
        }
        self.table[idx]
    }
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k).filter(|&n| n <= MAX_CELLS))
        .ok_or_else(|| Error::TooLarge(format!("alphabet product {dims:?}")))
}

/// Dense representation of `p` on covered predictors times target.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub nx: usize,
    pub ny: usize,
    /// `p(x, y)` at `x * ny + y`.
    pub p_xy: Vec<f64>,
    pub h_y: f64,
    /// Per part, the label of every `x`.
    pub labels: Vec<Vec<u32>>,
    pub n_labels: Vec<usize>,
    /// Per part, `p(label, y)` at `label * ny + y`.
    pub marg: Vec<Vec<f64>>,
}

impl Problem {
    pub fn new(d: &JointDistribution, parts: &[LabeledPart]) -> Result<Self> {
        let mut covered: Vec<usize> = parts.iter().flat_map(|p| p.vars.iter().copied()).collect();
        covered.sort_unstable();
        covered.dedup();
        if covered.contains(&d.target()) {
            return Err(Error::InvalidPart("a part contains the target".into()));
        }
        let dims: Vec<usize> = covered.iter().map(|&v| d.alphabet_size(v)).collect();
        let nx = checked_product(&dims)?;
        let ny = d.alphabet_size(d.target());
        if nx.saturating_mul(ny) > MAX_CELLS {
            return Err(Error::TooLarge(format!("{nx} x {ny} cells")));
        }
        let t = d.target();
        let x_of = |row: &[u32]| covered.iter().zip(&dims).fold(0usize, |acc, (&v, &k)| acc * k + row[v] as usize);
        let mut p_xy = vec![0.0; nx * ny];
        let mut p_y = vec![0.0; ny];
        for (row, p) in d.support() {
            p_xy[x_of(row) * ny + row[t] as usize] += p;
            p_y[row[t] as usize] += p;
        }
        // Labels over every x, including those outside the support.
        let mut row = vec![0u32; d.arity()];
        let mut labels = vec![Vec::with_capacity(nx); parts.len()];
        for x in 0..nx {
            let mut rem = x;
            for (j, &v) in covered.iter().enumerate().rev() {
                row[v] = (rem % dims[j]) as u32;
                rem /= dims[j];
            }
            for (i, part) in parts.iter().enumerate() {
                labels[i].push(part.label_of(&row));
            }
        }
        let n_labels: Vec<usize> = parts.iter().map(LabeledPart::n_labels).collect();
        let marg = labels
            .iter()
            .zip(&n_labels)
            .map(|(lab, &k)| {
                let mut m = vec![0.0; k * ny];
                for x in 0..nx {
                    for y in 0..ny {
                        m[lab[x] as usize * ny + y] += p_xy[x * ny + y];
                    }
                }
                m
            })
            .collect();
        let h_y = entropy_of(p_y.iter().copied());
        Ok(Problem { nx, ny, p_xy, h_y, labels, n_labels, marg })
    }

    pub fn n_parts(&self) -> usize {
        self.labels.len()
    }

    fn mi_of(&self, joint: &[f64], n_left: usize) -> f64 {
        let mut left = vec![0.0; n_left];
        for (i, &p) in joint.iter().enumerate() {
            left[i / self.ny] += p;
        }
        let v = entropy_of(left) + self.h_y - entropy_of(joint.iter().copied());
        v.max(0.0)
    }

    /// `I(P_i; Y)` in bits.
    pub fn part_mi(&self, i: usize) -> f64 {
        self.mi_of(&self.marg[i], self.n_labels[i])
    }

    /// `I(covered predictors; Y)` in bits.
    pub fn joint_mi(&self) -> f64 {
        self.mi_of(&self.p_xy, self.nx)
    }
}
