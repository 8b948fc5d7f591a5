//! Sampling-and-descent search over full joint types, independent of the
//! class reduction and of the Dinkelbach iteration.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use super::problem::{numerator_from_joint, numerator_grad_joint, FullProblem};
use super::CapacityQuery;
use crate::rng;
use crate::types::Matrix;
use crate::Result;

const CHUNK: usize = 1024;
const POLISHED: usize = 16;
const MAX_MOVES: usize = 5_000;
const RESYNC: usize = 256;
const MIRROR_STEPS: usize = 2_000;

fn plogp(v: f64) -> f64 {
    if v > 0.0 {
        -v * v.log2()
    } else {
        0.0
    }
}

struct Search<'a> {
    p: &'a FullProblem,
    nc: usize,
    allowed: Vec<usize>,
    off: Vec<bool>,
    /// Each row spread over its off-center cells in proportion to `phi*`.
    off_point: Vec<f64>,
}

/// A point with running sums for cheap evaluation of small moves.
struct State {
    m: Vec<f64>,
    a: Matrix,
    dist: f64,
    h: f64,
    col: f64,
    ratio: f64,
}

impl<'a> Search<'a> {
    fn new(p: &'a FullProblem) -> Self {
        let nc = p.cols();
        let allowed = (0..nc).filter(|&u| p.col_log[u].is_finite()).collect();
        let off: Vec<bool> = (0..p.rows() * nc).map(|i| p.row_bit[i / nc] != p.col_bit[i % nc]).collect();
        let mut off_point = vec![0.0; off.len()];
        for t in 0..p.rows() {
            let cells: Vec<usize> =
                (0..nc).filter(|&u| off[t * nc + u] && p.col_log[u].is_finite()).collect();
            let total: f64 = cells.iter().map(|&u| p.col_log[u].exp2()).sum();
            if total > 0.0 {
                for &u in &cells {
                    off_point[t * nc + u] = p.row_mass[t] * p.col_log[u].exp2() / total;
                }
            }
        }
        Search { p, nc, allowed, off, off_point }
    }

    fn ratio_of(&self, num: f64, dist: f64, den: f64) -> f64 {
        if dist < self.p.min_distortion || !(den > 0.0) {
            f64::INFINITY
        } else {
            num / den
        }
    }

    fn state(&self, m: Vec<f64>) -> State {
        let p = self.p;
        let a = p.output_joint(&m);
        let dist = p.distortion(&m);
        let h: f64 = m.iter().map(|&v| plogp(v)).sum();
        let col: f64 = m
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| v * p.col_log[i % self.nc])
            .sum();
        let num = numerator_from_joint(&p.pxy, &a, &p.channel);
        let ratio = self.ratio_of(num, dist, h + col + p.offset0 + p.offset1);
        State { m, a, dist, h, col, ratio }
    }

    /// Random rows around `phi*^tau` with a random concentration, then mixed
    /// with an all-off-center point until the distortion constraint holds.
    fn sample<R: Rng>(&self, rng: &mut R) -> Option<Vec<f64>> {
        let p = self.p;
        let nc = self.nc;
        let tau = *[0.0, 0.5, 1.0, 1.0].choose(rng).expect("nonempty");
        let conc = *[0.5, 2.0, 8.0, 32.0, 128.0].choose(rng).expect("nonempty");
        let mut base = vec![0.0; nc];
        for &u in &self.allowed {
            base[u] = (tau * p.col_log[u]).exp2();
        }
        let total: f64 = base.iter().sum();
        let mut m = vec![0.0; p.rows() * nc];
        let mut off = vec![0.0; m.len()];
        for t in 0..p.rows() {
            let mass = p.row_mass[t];
            if mass <= 0.0 {
                continue;
            }
            let row = &mut m[t * nc..(t + 1) * nc];
            let mut s = 0.0;
            for &u in &self.allowed {
                let shape = (conc * base[u] / total).max(1e-3);
                row[u] = Gamma::new(shape, 1.0).expect("positive shape").sample(rng) + 1e-300;
                s += row[u];
            }
            row.iter_mut().for_each(|v| *v *= mass / s);
            let off_row: f64 = self.allowed.iter().filter(|&&u| self.off[t * nc + u]).map(|&u| base[u]).sum();
            if off_row > 0.0 {
                for &u in &self.allowed {
                    if self.off[t * nc + u] {
                        off[t * nc + u] = mass * base[u] / off_row;
                    }
                }
            }
        }
        let d = p.distortion(&m);
        if d < p.min_distortion {
            let d_off = p.distortion(&off);
            if d_off < p.min_distortion {
                return None;
            }
            let mix = ((p.min_distortion - d) / (d_off - d) * (1.0 + 1e-12)).min(1.0);
            for (a, b) in m.iter_mut().zip(&off) {
                *a = (1.0 - mix) * *a + mix * b;
            }
        }
        Some(m)
    }

    fn ratio_grad(&self, st: &State) -> Vec<f64> {
        let p = self.p;
        let den = st.h + st.col + p.offset0 + p.offset1;
        let ga = numerator_grad_joint(&p.pxy, &st.a, &p.channel);
        (0..st.m.len())
            .map(|i| {
                let (t, u) = (i / self.nc, i % self.nc);
                let dd = -st.m[i].max(1e-300).log2() - std::f64::consts::LOG2_E + p.col_log[u];
                (ga[p.row_sym[t]][p.col_sym[u]] - st.ratio * dd) / den
            })
            .collect()
    }

    /// Running sums after moving `delta` along each `(src, dst)` pair.
    fn moved(&self, st: &State, moves: &[(usize, usize)], delta: f64) -> (Matrix, f64, f64, f64) {
        let p = self.p;
        let mut a = st.a.clone();
        let (mut dist, mut h, mut col) = (st.dist, st.h, st.col);
        for &(s, d) in moves {
            let (ms, md) = (st.m[s], st.m[d]);
            let ms2 = (ms - delta).max(0.0);
            let md2 = md + (ms - ms2);
            let step = ms - ms2;
            h += plogp(ms2) - plogp(ms) + plogp(md2) - plogp(md);
            col += step * (p.col_log[d % self.nc] - p.col_log[s % self.nc]);
            dist += step * (self.off[d] as u8 as f64 - self.off[s] as u8 as f64);
            let x = p.row_sym[s / self.nc];
            a[x][p.col_sym[s % self.nc]] -= step;
            a[x][p.col_sym[d % self.nc]] += step;
        }
        (a, dist, h, col)
    }

    fn try_move(&self, st: &mut State, moves: &[(usize, usize)], cap: f64) -> bool {
        let p = self.p;
        let mut delta = cap;
        for _ in 0..60 {
            if !(delta > 0.0) {
                break;
            }
            let (a, dist, h, col) = self.moved(st, moves, delta);
            let num = numerator_from_joint(&p.pxy, &a, &p.channel);
            let r = self.ratio_of(num, dist, h + col + p.offset0 + p.offset1);
            if r < st.ratio {
                for &(s, d) in moves {
                    let ms2 = (st.m[s] - delta).max(0.0);
                    st.m[d] += st.m[s] - ms2;
                    st.m[s] = ms2;
                }
                st.a = a;
                st.dist = dist;
                st.h = h;
                st.col = col;
                st.ratio = r;
                return true;
            }
            delta *= 0.5;
        }
        false
    }

    /// Best single-row move and best two-row move that keeps the distortion
    /// fixed, both chosen by first-order gain.
    fn gradient_step(&self, st: &mut State) -> bool {
        let p = self.p;
        let nc = self.nc;
        let g = self.ratio_grad(st);
        let slack = st.dist - p.min_distortion;
        let mut best_row: Option<(f64, usize, usize)> = None;
        let mut best_lose: Option<(f64, usize, usize)> = None;
        let mut best_gain: Option<(f64, usize, usize)> = None;
        for t in 0..p.rows() {
            if p.row_mass[t] <= 0.0 {
                continue;
            }
            // Cheapest destination and most expensive source, split by bit.
            let mut dst = [None::<usize>; 2];
            let mut src = [None::<usize>; 2];
            for &u in &self.allowed {
                let i = t * nc + u;
                let o = self.off[i] as usize;
                if dst[o].map_or(true, |j| g[i] < g[j]) {
                    dst[o] = Some(i);
                }
                if st.m[i] > 0.0 && src[o].map_or(true, |j| g[i] > g[j]) {
                    src[o] = Some(i);
                }
            }
            for so in 0..2 {
                for d_o in 0..2 {
                    let (Some(s), Some(d)) = (src[so], dst[d_o]) else { continue };
                    if s == d {
                        continue;
                    }
                    let gain = g[d] - g[s];
                    let pick = |b: Option<(f64, usize, usize)>| b.map_or(true, |b| gain < b.0);
                    if so == 1 && d_o == 0 {
                        if slack > 1e-12 && pick(best_row) {
                            best_row = Some((gain, s, d));
                        }
                        if pick(best_lose) {
                            best_lose = Some((gain, s, d));
                        }
                    } else {
                        if pick(best_row) {
                            best_row = Some((gain, s, d));
                        }
                        if so == 0 && d_o == 1 && pick(best_gain) {
                            best_gain = Some((gain, s, d));
                        }
                    }
                }
            }
        }
        if let Some((gain, s, d)) = best_row {
            if gain < 0.0 {
                let mut cap = st.m[s];
                if self.off[s] && !self.off[d] {
                    cap = cap.min(slack);
                }
                if self.try_move(st, &[(s, d)], cap) {
                    return true;
                }
            }
        }
        if let (Some((g1, s1, d1)), Some((g2, s2, d2))) = (best_lose, best_gain) {
            if g1 + g2 < 0.0 && s1 / nc != s2 / nc {
                let cap = st.m[s1].min(st.m[s2]);
                return self.try_move(st, &[(s1, d1), (s2, d2)], cap);
            }
        }
        false
    }

    /// Multiplicative update of every row, `m * 2^(-eta g)` renormalized,
    /// pulled toward the off-center point when it loses distortion.
    fn mirror_step(&self, st: &mut State, eta: &mut f64) -> bool {
        let p = self.p;
        let nc = self.nc;
        let g = self.ratio_grad(st);
        let mut e = *eta * 2.0;
        for _ in 0..30 {
            let mut m = st.m.clone();
            for t in 0..p.rows() {
                let row = &mut m[t * nc..(t + 1) * nc];
                let gmin = (0..nc).filter(|&u| row[u] > 0.0).map(|u| g[t * nc + u]).fold(f64::INFINITY, f64::min);
                let mut s = 0.0;
                for (u, v) in row.iter_mut().enumerate() {
                    if *v > 0.0 {
                        *v *= (-e * (g[t * nc + u] - gmin)).exp2();
                        s += *v;
                    }
                }
                if s > 0.0 {
                    row.iter_mut().for_each(|v| *v *= p.row_mass[t] / s);
                }
            }
            let d = p.distortion(&m);
            if d < p.min_distortion {
                let d_off = p.distortion(&self.off_point);
                let mix = ((p.min_distortion - d) / (d_off - d) * (1.0 + 1e-12)).min(1.0);
                for (a, b) in m.iter_mut().zip(&self.off_point) {
                    *a = (1.0 - mix) * *a + mix * b;
                }
            }
            let next = self.state(m);
            if next.ratio < st.ratio {
                *st = next;
                *eta = e;
                return true;
            }
            e *= 0.5;
        }
        *eta = e;
        false
    }

    fn random_step<R: Rng>(&self, st: &mut State, rng: &mut R) -> bool {
        let p = self.p;
        let t = rng.gen_range(0..p.rows());
        if p.row_mass[t] <= 0.0 || self.allowed.len() < 2 {
            return false;
        }
        let u = *self.allowed.choose(rng).expect("nonempty");
        let v = *self.allowed.choose(rng).expect("nonempty");
        let (s, d) = (t * self.nc + u, t * self.nc + v);
        if u == v || st.m[s] <= 0.0 {
            return false;
        }
        let cap = st.m[s] * rng.gen_range(0.01..1.0);
        self.try_move(st, &[(s, d)], cap)
    }

    fn descend<R: Rng>(&self, m: Vec<f64>, rng: &mut R) -> f64 {
        let mut st = self.state(m);
        let mut eta = 1e-3;
        for _ in 0..MIRROR_STEPS {
            if !self.mirror_step(&mut st, &mut eta) {
                break;
            }
        }
        let mut idle = 0;
        for step in 0..MAX_MOVES {
            if step % RESYNC == RESYNC - 1 {
                st = self.state(std::mem::take(&mut st.m));
            }
            if self.gradient_step(&mut st) || self.random_step(&mut st, rng) {
                idle = 0;
            } else {
                idle += 1;
                if idle > 200 {
                    break;
                }
            }
        }
        self.state(st.m).ratio
    }
}

/// Smallest ratio found over `samples` random feasible joint types, the best
/// few of them then improved by pairwise coordinate moves. Returns `+inf`
/// when no sample has a positive denominator.
pub fn oracle_local_search(query: &CapacityQuery, samples: usize, seed: u64) -> Result<f64> {
    let problem = query.full_problem()?;
    let search = Search::new(&problem);
    let chunks = samples.div_ceil(CHUNK);
    let mut scored: Vec<(f64, usize, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut g = rng::stream(rng::derive(seed, 0), c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut local: Vec<(f64, usize, Vec<f64>)> = Vec::new();
            for i in 0..count {
                let Some(m) = search.sample(&mut g) else { continue };
                let r = search.state(m.clone()).ratio;
                if r.is_finite() && (local.len() < POLISHED || r < local[POLISHED - 1].0) {
                    local.push((r, c * CHUNK + i, m));
                    local.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    local.truncate(POLISHED);
                }
            }
            local
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(POLISHED);
    let best = scored
        .into_par_iter()
        .map(|(_, idx, m)| {
            let mut g = rng::stream(rng::derive(seed, 1), idx as u64);
            search.descend(m, &mut g)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}
