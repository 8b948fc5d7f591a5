//! Mirror descent (projected gradient in relative-entropy geometry) on a
//! product of scaled simplices cut by one distortion half-space, and the
//! Dinkelbach outer loop built on it.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use super::problem::{FullProblem, ReducedProblem};
use super::OptimizerOptions;
use crate::rng;

/// `{S >= 0, row sums fixed, sum of off-center cells >= min_distortion}`.
#[derive(Debug, Clone)]
pub(crate) struct Polytope {
    row_mass: Vec<f64>,
    cols: usize,
    off: Vec<bool>,
    /// Cells forced to zero; empty when none are.
    blocked: Vec<bool>,
    min_distortion: f64,
}

impl Polytope {
    pub(crate) fn new(problem: &ReducedProblem, min_distortion: f64) -> Self {
        Polytope {
            row_mass: problem.row_mass().to_vec(),
            cols: problem.cols(),
            off: problem.off_mask(),
            blocked: Vec::new(),
            min_distortion,
        }
    }

    /// The polytope of full joint types; columns with `L(u) = -inf` are
    /// blocked.
    pub(crate) fn full(problem: &FullProblem, min_distortion: f64) -> Self {
        let nc = problem.cols();
        let n = problem.rows() * nc;
        Polytope {
            row_mass: problem.row_mass.clone(),
            cols: nc,
            off: (0..n).map(|i| problem.row_bit[i / nc] != problem.col_bit[i % nc]).collect(),
            blocked: (0..n).map(|i| problem.col_log[i % nc] == f64::NEG_INFINITY).collect(),
            min_distortion,
        }
    }

    fn is_blocked(&self, i: usize) -> bool {
        !self.blocked.is_empty() && self.blocked[i]
    }

    pub(crate) fn distortion(&self, s: &[f64]) -> f64 {
        s.iter().zip(&self.off).filter(|(_, &o)| o).map(|(v, _)| v).sum()
    }

    /// Largest attainable distortion: every row that has an off-center
    /// column can move all of its mass there.
    pub(crate) fn max_distortion(&self) -> f64 {
        self.row_mass
            .iter()
            .enumerate()
            .filter(|(r, _)| {
                (r * self.cols..(r + 1) * self.cols).any(|i| self.off[i] && !self.is_blocked(i))
            })
            .map(|(_, m)| m)
            .sum()
    }

    /// Rows rescaled to their masses, then off-center cells reweighted by a
    /// common factor until the distortion constraint holds: the projection
    /// in relative entropy. Zero cells stay zero.
    pub(crate) fn project_entropic(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        self.reweight(y, 0.0, &mut out);
        if self.distortion(&out) >= self.min_distortion {
            return out;
        }
        let mut hi = 1.0;
        loop {
            self.reweight(y, hi, &mut out);
            if self.distortion(&out) >= self.min_distortion || hi > 700.0 {
                break;
            }
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            self.reweight(y, mid, &mut out);
            if self.distortion(&out) >= self.min_distortion {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.reweight(y, hi, &mut out);
        out
    }

    fn reweight(&self, y: &[f64], log_factor: f64, out: &mut [f64]) {
        let nc = self.cols;
        let factor = log_factor.exp();
        for (r, &mass) in self.row_mass.iter().enumerate() {
            let mut s = 0.0;
            for c in 0..nc {
                let i = r * nc + c;
                out[i] = if self.is_blocked(i) {
                    0.0
                } else if self.off[i] {
                    y[i] * factor
                } else {
                    y[i]
                };
                s += out[i];
            }
            for v in &mut out[r * nc..(r + 1) * nc] {
                *v = if s > 0.0 { *v * mass / s } else { 0.0 };
            }
        }
    }

    /// Rows drawn from a flat Dirichlet, then projected.
    pub(crate) fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let v: Vec<f64> = (0..self.row_mass.len() * self.cols)
            .map(|_| Exp1.sample(rng))
            .map(|x: f64| x.max(1e-300))
            .collect();
        self.project_entropic(&v)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DescentOptions {
    pub max_iters: usize,
    /// Progress below this, relative to `max(1, |f|)`, counts as a stall.
    pub value_tol: f64,
}

/// Exponentiated-gradient descent with backtracking on the relative-entropy
/// model of the objective. Suited to objectives with logarithmic blow-up at
/// the boundary; cells at zero stay at zero.
pub(crate) fn minimize<F>(poly: &Polytope, x0: Vec<f64>, eval: F, opts: DescentOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let nc = poly.cols;
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    let mut eta = 1e-1;
    let mut stalls = 0;
    let mut best = (x.clone(), f);
    let mut y = vec![0.0; x.len()];
    for _ in 0..opts.max_iters {
        let mut accepted = None;
        while eta > 1e-30 {
            for r in 0..poly.row_mass.len() {
                let row = r * nc..(r + 1) * nc;
                let gmin = row.clone().map(|i| g[i]).fold(f64::INFINITY, f64::min);
                for i in row {
                    y[i] = (x[i] * (-eta * (g[i] - gmin)).exp()).max(1e-300);
                }
            }
            let z = poly.project_entropic(&y);
            let (fz, gz) = eval(&z);
            if fz.is_finite() {
                let mut lin = 0.0;
                let mut div = 0.0;
                for i in 0..x.len() {
                    lin += g[i] * (z[i] - x[i]);
                    if z[i] > 0.0 {
                        div += z[i] * (z[i] / x[i].max(1e-300)).ln() - z[i] + x[i];
                    }
                }
                let slack = 1e-15 * f.abs().max(1.0);
                if fz <= f + lin + div / eta + slack {
                    accepted = Some((z, fz, gz));
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some((z, fz, gz)) = accepted else { break };
        x = z;
        f = fz;
        g = gz;
        if f < best.1 - opts.value_tol * f.abs().max(1.0) {
            best = (x.clone(), f);
            stalls = 0;
        } else {
            if f < best.1 {
                best = (x.clone(), f);
            }
            stalls += 1;
            if stalls >= 20 {
                break;
            }
        }
        eta *= 2.0;
    }
    best
}

/// Outcome of the Dinkelbach iteration on the reduced problem.
#[derive(Debug, Clone)]
pub(crate) enum Fractional {
    /// No feasible point has a positive denominator.
    Unconstrained,
    /// Every point tried had an infinite numerator.
    NoFiniteStart,
    Solved { theta: f64, point: Vec<f64>, certificate: f64, iterations: usize },
}

fn descent_opts(opts: &OptimizerOptions) -> DescentOptions {
    DescentOptions { max_iters: opts.inner_max_iters, value_tol: 1e-13 }
}

/// Multi-start minimization; restarts run in parallel and the reduction
/// keeps the lowest value, earliest start on ties.
pub(crate) fn multistart<F>(
    poly: &Polytope,
    warm: Option<&[f64]>,
    eval: &F,
    opts: &OptimizerOptions,
    stream: u64,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    let starts: Vec<Vec<f64>> = (0..opts.restarts.max(1))
        .map(|r| {
            if r == 0 {
                if let Some(w) = warm {
                    return w.to_vec();
                }
            }
            let mut g = rng::stream(rng::derive(opts.seed, stream), r as u64);
            poly.random_point(&mut g)
        })
        .collect();
    let results: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|x0| minimize(poly, x0, eval, descent_opts(opts)))
        .collect();
    results
        .into_iter()
        .fold(None, |best: Option<(Vec<f64>, f64)>, cur| match best {
            Some(b) if b.1 <= cur.1 => Some(b),
            _ => Some(cur),
        })
        .expect("at least one start")
}

/// Maximizes the denominator over the polytope.
pub(crate) fn max_denominator(
    problem: &ReducedProblem,
    poly: &Polytope,
    opts: &OptimizerOptions,
) -> (Vec<f64>, f64) {
    let eval = |s: &[f64]| {
        let v = -problem.denominator(s);
        let g = problem.denominator_grad(s).into_iter().map(|x| -x).collect();
        (v, g)
    };
    let (x, v) = multistart(poly, None, &eval, opts, 0);
    (x, -v)
}

pub(crate) fn subproblem(problem: &ReducedProblem, theta: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + Sync + '_ {
    move |s: &[f64]| {
        let n = problem.numerator(s);
        if !n.is_finite() {
            return (f64::INFINITY, vec![0.0; s.len()]);
        }
        let gn = problem.numerator_grad(s);
        let gd = problem.denominator_grad(s);
        let v = n - theta * problem.denominator(s);
        (v, gn.iter().zip(&gd).map(|(a, b)| a - theta * b).collect())
    }
}

/// The denominator maximizer can sit where the numerator is infinite; pull
/// it toward random interior points until the ratio is finite.
fn finite_start(
    problem: &ReducedProblem,
    poly: &Polytope,
    opts: &OptimizerOptions,
    start: Vec<f64>,
) -> (Vec<f64>, f64) {
    let mut best = (start.clone(), problem.ratio(&start));
    if best.1.is_finite() {
        return best;
    }
    let mut g = rng::stream(rng::derive(opts.seed, u64::MAX), 0);
    for _ in 0..opts.restarts.max(1) {
        let inner = poly.random_point(&mut g);
        let mut eps = 1.0;
        for _ in 0..60 {
            let cand: Vec<f64> = start.iter().zip(&inner).map(|(a, b)| (1.0 - eps) * a + eps * b).collect();
            let r = problem.ratio(&cand);
            if r < best.1 {
                best = (cand, r);
            }
            eps *= 0.5;
        }
    }
    best
}

/// `min ratio` by Dinkelbach: `theta <- N(S)/DENOM(S)` at the minimizer of
/// `N - theta * DENOM`, until that minimum is within `inner_tol` of zero.
/// A `theta` step below `theta_tol` triggers one last certificate round.
pub(crate) fn dinkelbach(
    problem: &ReducedProblem,
    poly: &Polytope,
    opts: &OptimizerOptions,
    numerator_vanishes: bool,
) -> Fractional {
    let (start, best_den) = max_denominator(problem, poly, opts);
    if !(best_den > 0.0) {
        return Fractional::Unconstrained;
    }
    if numerator_vanishes {
        return Fractional::Solved { theta: 0.0, point: start, certificate: 0.0, iterations: 0 };
    }
    let (mut point, mut theta) = finite_start(problem, poly, opts, start);
    if !theta.is_finite() {
        return Fractional::NoFiniteStart;
    }
    let mut certificate = 0.0;
    let mut iterations = 0;
    let mut final_round = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let eval = subproblem(problem, theta);
        let (y, fy) = multistart(poly, Some(&point), &eval, opts, iterations as u64);
        certificate = fy.min(0.0);
        if fy >= -opts.inner_tol || final_round {
            break;
        }
        let next = problem.ratio(&y);
        if !(next < theta) {
            break;
        }
        final_round = theta - next <= opts.theta_tol;
        point = y;
        theta = next;
    }
    Fractional::Solved { theta, point, certificate, iterations }
}
