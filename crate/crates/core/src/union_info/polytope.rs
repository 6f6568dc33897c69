//! The set of joint distributions `q(x, y)` sharing the pairwise marginals
//! `p(P_i, y)`, reduced to its minimal face.

use microlp::{ComparisonOp, OptimizationDirection, Problem as Lp};

use super::{LabeledPart, Problem};
use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::parts::PartFamily;

/// Mass above which an LP coordinate counts as positive.
const LP_POSITIVE: f64 = 1e-12;
/// Relative residual norm below which a row is linearly dependent.
const RANK_TOL: f64 = 1e-9;

/// Linear constraints `A q = b`, `q >= 0` on candidate cells `(x, y)`.
///
/// Candidate cells are those where every constrained marginal is positive.
/// Cells outside the face vanish on every feasible point; the solver works
/// on the face only, where `p` itself is a relative-interior witness of
/// the support pattern.
#[derive(Debug, Clone)]
pub struct MarginalPolytope {
    nx: usize,
    ny: usize,
    cells: Vec<(usize, usize)>,
    rows: Vec<Vec<usize>>,
    b: Vec<f64>,
    base: Vec<f64>,
    face: Vec<bool>,
}

/// Face-restricted system with independent rows, grouped by `x`.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    /// Face cells of each `x` with at least one.
    pub groups: Vec<Vec<usize>>,
    /// Kept rows touching each face cell.
    pub cell_rows: Vec<Vec<usize>>,
    pub b: Vec<f64>,
    /// Candidate-cell index of each face cell.
    pub face_cells: Vec<usize>,
}

impl MarginalPolytope {
    pub fn new(d: &JointDistribution, family: &PartFamily) -> Result<Self> {
        let parts = family.parts().iter().map(|p| LabeledPart::projection(d, p)).collect::<Result<Vec<_>>>()?;
        MarginalPolytope::from_problem(&Problem::new(d, &parts)?)
    }

    pub(crate) fn from_problem(pr: &Problem) -> Result<Self> {
        let (nx, ny) = (pr.nx, pr.ny);
        let mut row_id: Vec<Vec<Option<usize>>> = Vec::with_capacity(pr.n_parts());
        let mut b = Vec::new();
        for i in 0..pr.n_parts() {
            let ids = pr.marg[i]
                .iter()
                .map(|&m| {
                    (m > 0.0).then(|| {
                        b.push(m);
                        b.len() - 1
                    })
                })
                .collect();
            row_id.push(ids);
        }
        let mut cells = Vec::new();
        let mut rows = vec![Vec::new(); b.len()];
        let mut base = Vec::new();
        for x in 0..nx {
            for y in 0..ny {
                let ids: Option<Vec<usize>> =
                    (0..pr.n_parts()).map(|i| row_id[i][pr.labels[i][x] as usize * ny + y]).collect();
                if let Some(ids) = ids {
                    let c = cells.len();
                    cells.push((x, y));
                    base.push(pr.p_xy[x * ny + y]);
                    for r in ids {
                        rows[r].push(c);
                    }
                }
            }
        }
        let mut poly = MarginalPolytope { nx, ny, face: base.iter().map(|&p| p > 0.0).collect(), cells, rows, b, base };
        poly.reduce_face()?;
        Ok(poly)
    }

    /// Marks every cell that some feasible point charges. Each LP round
    /// maximizes the mass on still-undecided cells.
    fn reduce_face(&mut self) -> Result<()> {
        let independent = independent_rows(&self.rows, self.cells.len());
        loop {
            if self.face.iter().all(|&f| f) {
                return Ok(());
            }
            let mut lp = Lp::new(OptimizationDirection::Maximize);
            let vars: Vec<_> =
                self.face.iter().map(|&f| lp.add_var(if f { 0.0 } else { 1.0 }, (0.0, 1.0))).collect();
            for &r in &independent {
                let expr: Vec<_> = self.rows[r].iter().map(|&c| (vars[c], 1.0)).collect();
                lp.add_constraint(expr, ComparisonOp::Eq, self.b[r]);
            }
            let sol = lp
                .solve()
                .map_err(|e| Error::Lp(format!("{e:?}")))?
                .into_solution()
                .map_err(|e| Error::Lp(format!("{e:?}")))?;
            if sol.objective() <= LP_POSITIVE {
                return Ok(());
            }
            let mut grew = false;
            for (c, v) in vars.iter().enumerate() {
                if !self.face[c] && sol.var_value(*v) > LP_POSITIVE {
                    self.face[c] = true;
                    grew = true;
                }
            }
            if !grew {
                return Ok(());
            }
        }
    }

    pub(crate) fn reduced(&self) -> Reduced {
        let mut index = vec![usize::MAX; self.cells.len()];
        let face_cells: Vec<usize> = (0..self.cells.len()).filter(|&c| self.face[c]).collect();
        for (k, &c) in face_cells.iter().enumerate() {
            index[c] = k;
        }
        let face_rows: Vec<Vec<usize>> =
            self.rows.iter().map(|r| r.iter().filter(|&&c| self.face[c]).map(|&c| index[c]).collect()).collect();
        let kept = independent_rows(&face_rows, face_cells.len());
        let mut cell_rows = vec![Vec::new(); face_cells.len()];
        for (k, &r) in kept.iter().enumerate() {
            for &c in &face_rows[r] {
                cell_rows[c].push(k);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut last_x = usize::MAX;
        for (k, &c) in face_cells.iter().enumerate() {
            let x = self.cells[c].0;
            if x != last_x {
                groups.push(Vec::new());
                last_x = x;
            }
            groups.last_mut().expect("group exists").push(k);
        }
        Reduced { groups, cell_rows, b: kept.iter().map(|&r| self.b[r]).collect(), face_cells }
    }

    pub fn n_x(&self) -> usize {
        self.nx
    }

    pub fn n_y(&self) -> usize {
        self.ny
    }

    /// Candidate cells `(x, y)`.
    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    /// Number of candidate cells forced to zero on the whole polytope.
    pub fn structural_zeros(&self) -> usize {
        self.face.iter().filter(|&&f| !f).count()
    }

    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }

    /// The base distribution `p` on the candidate cells.
    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    /// Largest violation of `A q = b` for a point on the candidate cells.
    pub fn residual(&self, q: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.b)
            .map(|(r, b)| (r.iter().map(|&c| q[c]).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether `q` is nonnegative and satisfies the constraints within `tol`.
    pub fn contains(&self, q: &[f64], tol: f64) -> bool {
        q.len() == self.cells.len() && q.iter().all(|&v| v >= -tol) && self.residual(q) <= tol
    }
}

/// Greedy basis selection among 0/1 rows over `n` columns, by Gram–Schmidt
/// with one reorthogonalization pass.
fn independent_rows(rows: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let mut v = vec![0.0; n];
        for &c in row {
            v[c] = 1.0;
        }
        let norm0 = (row.len() as f64).sqrt();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                if dot != 0.0 {
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
                }
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > RANK_TOL * norm0 {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
            kept.push(r);
        }
    }
    kept
}
