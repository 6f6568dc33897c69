//! Log-barrier Newton method on the dual of the synergy minimization.
//!
//! On the face `F` of the marginal polytope the primal is
//!
//! ```text
//! min  Σ_x Σ_{y:(x,y)∈F} q(x,y) ln q(y|x)   s.t.  A q = b,  q >= 0
//! ```
//!
//! which is `-H_q(Y|X)` in nats; `q(Y) = p(Y)` is fixed, so
//! `I_q(X;Y) = H(Y) + value / ln 2`. Its dual is
//!
//! ```text
//! max  bᵀλ   s.t.  LSE_x(Aᵀλ) <= 0  for every x,
//! ```
//!
//! where `LSE_x` is the log-sum-exp over the cells of `x`. Every feasible
//! `λ` certifies a lower bound; the central path point at barrier weight
//! `t` is within `#x / t` of the optimum, and `q_c = π_c / (t s_x)`
//! recovers a primal point.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::polytope::{MarginalPolytope, Reduced};
use super::{Problem, UnionSettings, UnionSolution};
use crate::error::{Error, Result};

const T_GROWTH: f64 = 10.0;
const CENTERING_TOL: f64 = 1e-12;
const MAX_CENTERING_STEPS: usize = 60;
const ARMIJO: f64 = 0.25;
/// Smallest step tried, relative to the first one.
const MIN_STEP: f64 = 1e-12;
/// Largest change of any multiplier in one step, relative to the largest
/// multiplier (at least one).
const MAX_MOVE: f64 = 4.0;
/// Newton decrement at which a barrier stage counts as centered.
const CENTERED: f64 = 1e-6;

pub(crate) fn solve(pr: &Problem, settings: &UnionSettings) -> Result<UnionSolution> {
    let poly = MarginalPolytope::from_problem(pr)?;
    let red = poly.reduced();
    // Gap target in nats, well inside the requested tolerance in bits. A
    // run whose precision runs out first is still accepted if its last
    // certified gap is within the tolerance.
    let gap_target = (settings.tolerance * LN_2 * 1e-3).min(1e-9);
    let gap_limit = settings.tolerance * LN_2;
    let mut best: Option<Run> = None;
    let mut bound = f64::NEG_INFINITY;
    let mut iterations = 0;
    for k in 0..settings.restarts {
        match central_path(&red, settings, k, gap_target) {
            Ok(run) => {
                iterations += run.iterations;
                bound = bound.max(run.dual);
                if run.gap <= gap_limit && best.as_ref().is_none_or(|b| run.dual < b.dual) {
                    best = Some(run);
                }
            }
            Err(Stall { iterations: it, dual }) => {
                iterations += it;
                bound = bound.max(dual);
                if it > settings.max_iterations {
                    return Err(Error::NonConvergence { iterations, best_bound: pr.h_y + bound / LN_2 });
                }
            }
        }
    }
    let Some(run) = best else {
        return Err(Error::NonConvergence { iterations, best_bound: pr.h_y + bound / LN_2 });
    };
    let mut q = vec![0.0; poly.cells().len()];
    for (k, &c) in red.face_cells.iter().enumerate() {
        q[c] = run.primal[k];
    }
    let raw = pr.h_y + run.dual / LN_2;
    Ok(UnionSolution { value: raw, raw, gap: run.gap / LN_2, iterations, residual: poly.residual(&q) })
}

struct Run {
    /// `bᵀλ` in nats, a lower bound on the primal optimum.
    dual: f64,
    gap: f64,
    primal: Vec<f64>,
    iterations: usize,
}

struct Stall {
    iterations: usize,
    dual: f64,
}

/// Slacks `s_x = -LSE_x` and softmax weights at `λ`, or `None` outside the
/// dual domain.
fn evaluate(red: &Reduced, lam: &[f64], s: &mut [f64], pi: &mut [f64]) -> bool {
    for (g, cells) in red.groups.iter().enumerate() {
        let mut m = f64::NEG_INFINITY;
        for &c in cells {
            let a: f64 = red.cell_rows[c].iter().map(|&r| lam[r]).sum();
            pi[c] = a;
            m = m.max(a);
        }
        let mut z = 0.0;
        for &c in cells {
            pi[c] = (pi[c] - m).exp();
            z += pi[c];
        }
        for &c in cells {
            pi[c] /= z;
        }
        let slack = -(m + z.ln());
        if !(slack > 0.0) {
            return false;
        }
        s[g] = slack;
    }
    true
}

fn central_path(red: &Reduced, settings: &UnionSettings, restart: usize, gap_target: f64) -> std::result::Result<Run, Stall> {
    let nr = red.b.len();
    let ng = red.groups.len();
    let nc = red.cell_rows.len();
    let widest = red.groups.iter().map(Vec::len).max().unwrap_or(1) as f64;
    let beta = widest.ln() + 1.0;
    let mut lam = vec![-beta; nr];
    if restart > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(restart as u64));
        lam.iter_mut().for_each(|l| *l *= 1.0 + rng.gen::<f64>());
    }
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();

    let mut s = vec![0.0; ng];
    let mut pi = vec![0.0; nc];
    let mut s_new = vec![0.0; ng];
    let mut pi_new = vec![0.0; nc];
    let mut trial = vec![0.0; nr];
    let mut u = vec![0.0; nr];
    let mut marked = vec![false; nr];
    let mut touched: Vec<usize> = Vec::new();
    let feasible = evaluate(red, &lam, &mut s, &mut pi);
    debug_assert!(feasible);

    let mut t = 1.0;
    let mut iterations = 0;
    let mut certified: Option<Run> = None;
    loop {
        let mut decrement = f64::INFINITY;
        for _ in 0..MAX_CENTERING_STEPS {
            iterations += 1;
            if iterations > settings.max_iterations {
                let dual = dot(&red.b, &lam).max(certified.as_ref().map_or(f64::NEG_INFINITY, |r| r.dual));
                return Err(Stall { iterations, dual });
            }
            let mut grad: Vec<f64> = red.b.iter().map(|b| -t * b).collect();
            let mut hess = DMatrix::<f64>::zeros(nr, nr);
            for (g, cells) in red.groups.iter().enumerate() {
                let inv = 1.0 / s[g];
                for &c in cells {
                    let w = pi[c] * inv;
                    let rows = &red.cell_rows[c];
                    for &r in rows {
                        if !marked[r] {
                            marked[r] = true;
                            touched.push(r);
                        }
                        u[r] += pi[c];
                        for &r2 in rows {
                            hess[(r, r2)] += w;
                        }
                    }
                }
                let coef = inv * inv - inv;
                for &i in &touched {
                    grad[i] += u[i] * inv;
                    for &j in &touched {
                        hess[(i, j)] += coef * u[i] * u[j];
                    }
                }
                for &i in &touched {
                    u[i] = 0.0;
                    marked[i] = false;
                }
                touched.clear();
            }
            let Some(dir) = newton_direction(hess, &grad) else {
                break;
            };
            let slope = dot(&grad, &dir);
            decrement = -slope / 2.0;
            if decrement <= CENTERING_TOL {
                break;
            }
            let bd = dot(&red.b, &dir);
            let widest_move = dir.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
            let scale = lam.iter().fold(1.0, |m: f64, l| m.max(l.abs()));
            let first = (MAX_MOVE * scale / widest_move).min(1.0);
            let mut step = first;
            let mut accepted = false;
            while step >= first * MIN_STEP {
                trial.iter_mut().zip(&lam).zip(&dir).for_each(|((x, l), d)| *x = l + step * d);
                if evaluate(red, &trial, &mut s_new, &mut pi_new) {
                    // Change of the barrier objective, accumulated without
                    // forming its large absolute value.
                    let change = -t * step * bd - s_new.iter().zip(&s).map(|(a, b)| (a / b).ln()).sum::<f64>();
                    if change <= ARMIJO * step * slope {
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            std::mem::swap(&mut lam, &mut trial);
            std::mem::swap(&mut s, &mut s_new);
            std::mem::swap(&mut pi, &mut pi_new);
        }
        if decrement > CENTERED {
            // Precision exhausted; keep the last centered point.
            break;
        }
        let mut primal = vec![0.0; nc];
        for (g, cells) in red.groups.iter().enumerate() {
            let mass = 1.0 / (t * s[g]);
            for &c in cells {
                primal[c] = mass * pi[c];
            }
        }
        certified = Some(Run { dual: dot(&red.b, &lam), gap: ng as f64 / t, primal, iterations: 0 });
        if ng as f64 / t <= gap_target {
            break;
        }
        t *= T_GROWTH;
    }
    match certified {
        Some(run) => Ok(Run { iterations, ..run }),
        None => Err(Stall { iterations, dual: dot(&red.b, &lam) }),
    }
}

/// Solves `H d = -g` by Cholesky, adding a growing ridge if `H` is not
/// numerically positive definite.
fn newton_direction(hess: DMatrix<f64>, grad: &[f64]) -> Option<Vec<f64>> {
    let n = grad.len();
    let rhs = DVector::from_iterator(n, grad.iter().map(|g| -g));
    let scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        for i in 0..n {
            h[(i, i)] += ridge;
        }
        if let Some(ch) = h.cholesky() {
            let d = ch.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        ridge = if ridge == 0.0 { scale * 1e-14 } else { ridge * 100.0 };
    }
    None
}
