//! The random-coding exponent `E(rho, lambda)` and `E_r(R, D)`.

use std::f64::consts::LN_2;

use super::problem::FullProblem;
use super::solver::{self, Polytope};
use super::CapacityQuery;
use crate::sensing::{NoiseChannel, SensingFunction};
use crate::types::{entropy, output_joint, JointType, Matrix};
use crate::{Error, Result};

/// Width of the log-sum-exp used as a smooth stand-in for the max over the
/// `rho` grid during descent.
const SMOOTHING: f64 = 1e-3;

/// 101 evenly spaced points on `[0, 1]`.
pub fn default_rho_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside [0, 1]")));
    }
    Ok(())
}

/// Sum inside the logarithm of `E`, and its gradient in `A` when asked.
fn exponent_sum(rho: f64, a: &Matrix, channel: &NoiseChannel, grad: Option<&mut Matrix>) -> f64 {
    let s = 1.0 / (1.0 + rho);
    let nx = a.len();
    let ny = channel.output_size();
    let mut total = 0.0;
    let mut grad = grad;
    for x in 0..nx {
        let px: f64 = a[x].iter().sum();
        if px <= 0.0 {
            continue;
        }
        for y in 0..ny {
            let outer = channel.prob(x, y).powf(s);
            if outer == 0.0 {
                continue;
            }
            let t: f64 = (0..nx).map(|j| a[x][j] * channel.prob(j, y).powf(s)).sum();
            if t <= 0.0 {
                continue;
            }
            // px * (t / px)^rho
            total += outer * px.powf(1.0 - rho) * t.powf(rho);
            if let Some(g) = grad.as_deref_mut() {
                let base = outer * px.powf(1.0 - rho) * t.powf(rho);
                let dpx = (1.0 - rho) * base / px;
                let dt = rho * base / t;
                for j in 0..nx {
                    g[x][j] += dpx + dt * channel.prob(j, y).powf(s);
                }
            }
        }
    }
    total
}

/// `E(rho)` from the output-symbol joint `A(x_i, x_j)`; the row marginal of
/// `A` is `P^{gamma_i}` and its row-normalized rows are `P^lambda(a_j|a_i)`.
pub fn exponent_e_joint(rho: f64, a: &Matrix, channel: &NoiseChannel) -> Result<f64> {
    check_rho(rho)?;
    if a.len() != channel.input_size() || a.iter().any(|r| r.len() != a.len()) {
        return Err(Error::DimensionMismatch(format!(
            "output joint is {}x{}, channel has {} inputs",
            a.len(),
            a.first().map_or(0, Vec::len),
            channel.input_size()
        )));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    Ok(-exponent_sum(rho, a, channel, None).log2())
}

/// `E(rho, lambda)` for a joint sensor type (or joint field type with a
/// width-1 sensing function).
pub fn exponent_e(
    rho: f64,
    joint: &JointType,
    psi: &SensingFunction,
    channel: &NoiseChannel,
) -> Result<f64> {
    exponent_e_joint(rho, &output_joint(joint, psi)?, channel)
}

fn exponent_with_grad(rho: f64, a: &Matrix, channel: &NoiseChannel) -> (f64, Matrix) {
    let n = a.len();
    let mut g = vec![vec![0.0; n]; n];
    if rho == 0.0 {
        return (0.0, g);
    }
    let f = exponent_sum(rho, a, channel, Some(&mut g));
    for row in g.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v / (f * LN_2);
        }
    }
    (-f.log2(), g)
}

/// Minimizing point of [`exponent_er`] and the exact grid maximum there.
#[derive(Debug, Clone)]
pub struct ErResult {
    pub value: f64,
    /// Grid value of `rho` attaining the max at the reported point.
    pub rho: f64,
    /// Full joint type (`lambda` or `mu`) at which `value` is attained.
    pub point: Vec<f64>,
}

/// `E(rho, A(M)) - rho R bracket_rho(M)` for every grid point, the bracket
/// carrying the `1/(1+rho)` weight on its field terms. With `weights`, also
/// the gradient of `sum_rho weights(rho) * value(rho)`.
fn grid_terms(
    problem: &FullProblem,
    rate: f64,
    grid: &[f64],
    m: &[f64],
    weights: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
) -> (Vec<f64>, Vec<f64>) {
    let a = problem.output_joint(m);
    let nc = problem.cols();
    let h = entropy(m);
    let col: f64 = m
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| v * problem.col_log[i % nc])
        .sum();
    let mut values = Vec::with_capacity(grid.len());
    let mut ga_all = Vec::with_capacity(grid.len());
    for &rho in grid {
        let w = 1.0 / (1.0 + rho);
        let bracket = h + problem.offset0 + w * (col + problem.offset1);
        let (e, ga) = exponent_with_grad(rho, &a, &problem.channel);
        values.push(e - rho * rate * bracket);
        ga_all.push(ga);
    }
    let Some(weights) = weights else { return (values, Vec::new()) };
    let pi = weights(&values);
    let nx = a.len();
    let mut ga = vec![vec![0.0; nx]; nx];
    let (mut ch, mut cc) = (0.0, 0.0);
    for ((&p, &rho), g) in pi.iter().zip(grid).zip(&ga_all) {
        for (acc, row) in ga.iter_mut().zip(g) {
            for (x, y) in acc.iter_mut().zip(row) {
                *x += p * y;
            }
        }
        ch -= rate * p * rho;
        cc -= rate * p * rho / (1.0 + rho);
    }
    let grad = (0..m.len())
        .map(|i| {
            let (t, u) = (i / nc, i % nc);
            let col = problem.col_log[u];
            let dh = -m[i].max(1e-300).log2() - 1.0 / LN_2;
            ga[problem.row_sym[t]][problem.col_sym[u]]
                + ch * dh
                + if col.is_finite() { cc * col } else { 0.0 }
        })
        .collect();
    (values, grad)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// `E_r(R, D)`: the minimum over the relaxed joint types of the query's
/// constraint set of `max_{rho in grid} E(rho) - rho R bracket_rho`.
///
/// The max is smoothed for descent and evaluated exactly at the returned
/// point, so the value is attained by a feasible joint type.
pub fn exponent_er(rate: f64, query: &CapacityQuery, rho_grid: &[f64]) -> Result<ErResult> {
    if rho_grid.is_empty() {
        return Err(Error::InvalidArgument("empty rho grid".into()));
    }
    for &rho in rho_grid {
        check_rho(rho)?;
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate {rate} must be finite and nonnegative")));
    }
    let problem = query.full_problem()?;
    let poly = Polytope::full(&problem, problem.min_distortion());
    if poly.max_distortion() < problem.min_distortion() {
        return Err(Error::Infeasible(format!(
            "largest attainable distortion {} is below {}",
            poly.max_distortion(),
            problem.min_distortion()
        )));
    }
    let softmax = |values: &[f64]| {
        let top = values[argmax(values)];
        let w: Vec<f64> = values.iter().map(|&v| ((v - top) / SMOOTHING).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect::<Vec<f64>>()
    };
    let eval = |m: &[f64]| {
        let (values, grad) = grid_terms(&problem, rate, rho_grid, m, Some(&softmax));
        let top = values[argmax(&values)];
        let z: f64 = values.iter().map(|&v| ((v - top) / SMOOTHING).exp()).sum();
        (top + SMOOTHING * z.ln(), grad)
    };
    let (point, _) = solver::multistart(&poly, None, &eval, &query.options, u64::MAX);
    let (exact, _) = grid_terms(&problem, rate, rho_grid, &point, None);
    let best = argmax(&exact);
    Ok(ErResult { value: exact[best], rho: rho_grid[best], point })
}
