//! The fractional program behind the capacity bound, in two coordinate
//! systems.
//!
//! [`FullProblem`] works on the joint type itself (`lambda` for range 1,
//! `mu` for range 0): a `rows x cols` matrix `M` whose row sums are fixed,
//! with
//!
//! ```text
//! ratio(M) = D(P_XY || Q_XY(M)) / (H(M) + sum_{t,u} M(t,u) L(u) + offset)
//! ```
//!
//! where `L(u) = log2 phi*(u)`. The numerator sees `M` only through the
//! output-symbol joint `A(x, a)` and the distortion constraint only through
//! center bits, so both depend on `M` only via its aggregate over column and
//! row classes `(symbol, center bit)`.
//!
//! [`ReducedProblem`] optimizes that class-level aggregate `S` directly. For a
//! fixed `S` the largest denominator over all `M` that aggregate to it has a
//! closed form,
//!
//! ```text
//! H(r) - H(R) + H(S) + sum_{k,k'} S(k,k') log2 W(k') + offset,
//! W(k') = sum_{u in k'} 2^{L(u)},
//! ```
//!
//! attained by spreading `S(k,k')` over rows in proportion to `r` and over
//! columns in proportion to `2^L`. Since the numerator is nonnegative, the
//! smallest ratio over `M` equals the smallest ratio over `S` with this
//! denominator, and [`ReducedProblem::lift`] recovers a full witness.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use crate::sensing::NoiseChannel;
use crate::types::{entropy, Matrix};

/// Joint-type coordinates of the fractional program.
#[derive(Debug, Clone)]
pub struct FullProblem {
    pub(crate) row_mass: Vec<f64>,
    pub(crate) row_sym: Vec<usize>,
    pub(crate) row_bit: Vec<u8>,
    pub(crate) col_log: Vec<f64>,
    pub(crate) col_sym: Vec<usize>,
    pub(crate) col_bit: Vec<u8>,
    /// Constant added to the denominator independent of the column weight.
    pub(crate) offset0: f64,
    /// Constant scaled together with the column term (`H(phi*)`).
    pub(crate) offset1: f64,
    pub(crate) channel: NoiseChannel,
    pub(crate) pxy: Matrix,
    pub(crate) min_distortion: f64,
}

impl FullProblem {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        row_mass: Vec<f64>,
        row_sym: Vec<usize>,
        row_bit: Vec<u8>,
        col_log: Vec<f64>,
        col_sym: Vec<usize>,
        col_bit: Vec<u8>,
        offset0: f64,
        offset1: f64,
        channel: NoiseChannel,
        min_distortion: f64,
    ) -> Self {
        let nx = channel.input_size();
        let mut px = vec![0.0; nx];
        for (&m, &x) in row_mass.iter().zip(&row_sym) {
            px[x] += m;
        }
        let pxy = px
            .iter()
            .enumerate()
            .map(|(x, &p)| channel.row(x).iter().map(|&c| p * c).collect())
            .collect();
        FullProblem {
            row_mass,
            row_sym,
            row_bit,
            col_log,
            col_sym,
            col_bit,
            offset0,
            offset1,
            channel,
            pxy,
            min_distortion,
        }
    }

    pub fn rows(&self) -> usize {
        self.row_mass.len()
    }

    pub fn cols(&self) -> usize {
        self.col_log.len()
    }

    pub fn row_mass(&self) -> &[f64] {
        &self.row_mass
    }

    pub fn min_distortion(&self) -> f64 {
        self.min_distortion
    }

    pub fn output_joint(&self, m: &[f64]) -> Matrix {
        let nx = self.channel.input_size();
        let nc = self.cols();
        let mut a = vec![vec![0.0; nx]; nx];
        for t in 0..self.rows() {
            let row = &mut a[self.row_sym[t]];
            for u in 0..nc {
                row[self.col_sym[u]] += m[t * nc + u];
            }
        }
        a
    }

    pub fn distortion(&self, m: &[f64]) -> f64 {
        let nc = self.cols();
        let mut d = 0.0;
        for t in 0..self.rows() {
            for u in 0..nc {
                if self.row_bit[t] != self.col_bit[u] {
                    d += m[t * nc + u];
                }
            }
        }
        d
    }

    pub fn numerator(&self, m: &[f64]) -> f64 {
        numerator_from_joint(&self.pxy, &self.output_joint(m), &self.channel)
    }

    /// Denominator with the column term scaled by `w` (`w = 1` is DENOM).
    pub fn denominator_w(&self, m: &[f64], w: f64) -> f64 {
        let nc = self.cols();
        let mut col_term = 0.0;
        for (i, &v) in m.iter().enumerate() {
            if v > 0.0 {
                col_term += v * self.col_log[i % nc];
            }
        }
        entropy(m) + w * col_term + self.offset0 + w * self.offset1
    }

    pub fn denominator(&self, m: &[f64]) -> f64 {
        self.denominator_w(m, 1.0)
    }

    /// `+inf` when the denominator is not positive.
    pub fn ratio(&self, m: &[f64]) -> f64 {
        let den = self.denominator(m);
        if den <= 0.0 {
            return f64::INFINITY;
        }
        self.numerator(m) / den
    }

    /// Largest violation of the row-sum and distortion constraints.
    pub fn constraint_violation(&self, m: &[f64]) -> f64 {
        let nc = self.cols();
        let mut worst = m.iter().fold(0.0f64, |acc, &v| acc.max(-v));
        for t in 0..self.rows() {
            let s: f64 = m[t * nc..(t + 1) * nc].iter().sum();
            worst = worst.max((s - self.row_mass[t]).abs());
        }
        worst.max(self.min_distortion - self.distortion(m))
    }
}

/// `D(P_XY || Q_XY)` in bits with `Q = A * channel`.
pub(crate) fn numerator_from_joint(pxy: &Matrix, a: &Matrix, channel: &NoiseChannel) -> f64 {
    let ny = channel.output_size();
    let mut s = 0.0;
    for (x, row) in a.iter().enumerate() {
        for y in 0..ny {
            let p = pxy[x][y];
            if p <= 0.0 {
                continue;
            }
            let q: f64 = row.iter().enumerate().map(|(j, &v)| v * channel.prob(j, y)).sum();
            if q <= 0.0 {
                return f64::INFINITY;
            }
            s += p * (p / q).log2();
        }
    }
    s
}

/// `dN/dA(x, a) = -(1/ln 2) sum_y P(x,y) P(y|a) / Q(x,y)`.
pub(crate) fn numerator_grad_joint(pxy: &Matrix, a: &Matrix, channel: &NoiseChannel) -> Matrix {
    let nx = a.len();
    let ny = channel.output_size();
    let mut g = vec![vec![0.0; nx]; nx];
    for x in 0..nx {
        let mut ratio = vec![0.0; ny];
        for (y, r) in ratio.iter_mut().enumerate() {
            let p = pxy[x][y];
            if p > 0.0 {
                let q: f64 = a[x].iter().enumerate().map(|(j, &v)| v * channel.prob(j, y)).sum();
                *r = p / q.max(1e-300);
            }
        }
        for (j, gj) in g[x].iter_mut().enumerate() {
            *gj = -(0..ny).map(|y| ratio[y] * channel.prob(j, y)).sum::<f64>() / LN_2;
        }
    }
    g
}

fn log2_sum_exp2(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp2()).sum::<f64>().log2()
}

/// Class-level coordinates; see the module docs.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    pub(crate) full: FullProblem,
    pub(crate) row_class_of: Vec<Option<usize>>,
    pub(crate) col_class_of: Vec<Option<usize>>,
    pub(crate) row_mass: Vec<f64>,
    pub(crate) row_sym: Vec<usize>,
    pub(crate) row_bit: Vec<u8>,
    pub(crate) col_sym: Vec<usize>,
    pub(crate) col_bit: Vec<u8>,
    /// `log2 W(k')` at column weight 1.
    pub(crate) col_lw: Vec<f64>,
    /// `H(r) - H(R)`.
    pub(crate) row_gap: f64,
}

impl ReducedProblem {
    pub fn new(full: FullProblem) -> Self {
        let mut row_classes: BTreeMap<(usize, u8), usize> = BTreeMap::new();
        let mut row_class_of = vec![None; full.rows()];
        for t in 0..full.rows() {
            if full.row_mass[t] > 0.0 {
                let n = row_classes.len();
                let id = *row_classes.entry((full.row_sym[t], full.row_bit[t])).or_insert(n);
                row_class_of[t] = Some(id);
            }
        }
        let mut col_classes: BTreeMap<(usize, u8), usize> = BTreeMap::new();
        let mut col_class_of = vec![None; full.cols()];
        for u in 0..full.cols() {
            if full.col_log[u] > f64::NEG_INFINITY {
                let n = col_classes.len();
                let id = *col_classes.entry((full.col_sym[u], full.col_bit[u])).or_insert(n);
                col_class_of[u] = Some(id);
            }
        }
        let nr = row_classes.len();
        let nc = col_classes.len();
        let mut row_sym = vec![0; nr];
        let mut row_bit = vec![0; nr];
        for (&(x, b), &id) in &row_classes {
            row_sym[id] = x;
            row_bit[id] = b;
        }
        let mut col_sym = vec![0; nc];
        let mut col_bit = vec![0; nc];
        for (&(x, b), &id) in &col_classes {
            col_sym[id] = x;
            col_bit[id] = b;
        }
        let mut row_mass = vec![0.0; nr];
        for (t, c) in row_class_of.iter().enumerate() {
            if let Some(c) = c {
                row_mass[*c] += full.row_mass[t];
            }
        }
        let row_gap = entropy(&full.row_mass) - entropy(&row_mass);
        let mut out = ReducedProblem {
            full,
            row_class_of,
            col_class_of,
            row_mass,
            row_sym,
            row_bit,
            col_sym,
            col_bit,
            col_lw: Vec::new(),
            row_gap,
        };
        out.col_lw = out.col_log_weights(1.0);
        out
    }

    pub fn full(&self) -> &FullProblem {
        &self.full
    }

    pub fn rows(&self) -> usize {
        self.row_mass.len()
    }

    pub fn cols(&self) -> usize {
        self.col_sym.len()
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row_mass(&self) -> &[f64] {
        &self.row_mass
    }

    /// Indicator of cells whose row and column classes differ in center bit.
    pub fn off_mask(&self) -> Vec<bool> {
        let nc = self.cols();
        (0..self.len())
            .map(|i| self.row_bit[i / nc] != self.col_bit[i % nc])
            .collect()
    }

    /// `log2 W_w(k') = log2 sum_{u in k'} 2^{w L(u)}`.
    pub fn col_log_weights(&self, w: f64) -> Vec<f64> {
        (0..self.cols())
            .map(|k| {
                log2_sum_exp2(
                    self.col_class_of
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c == Some(k))
                        .map(|(u, _)| w * self.full.col_log[u]),
                )
            })
            .collect()
    }

    pub fn output_joint(&self, s: &[f64]) -> Matrix {
        let nx = self.full.channel.input_size();
        let nc = self.cols();
        let mut a = vec![vec![0.0; nx]; nx];
        for (i, &v) in s.iter().enumerate() {
            a[self.row_sym[i / nc]][self.col_sym[i % nc]] += v;
        }
        a
    }

    pub fn distortion(&self, s: &[f64]) -> f64 {
        let nc = self.cols();
        s.iter()
            .enumerate()
            .filter(|(i, _)| self.row_bit[i / nc] != self.col_bit[i % nc])
            .map(|(_, v)| v)
            .sum()
    }

    pub fn numerator(&self, s: &[f64]) -> f64 {
        numerator_from_joint(&self.full.pxy, &self.output_joint(s), &self.full.channel)
    }

    /// Largest denominator over all joint types aggregating to `s`, with the
    /// column term scaled by `w`.
    pub fn denominator_w(&self, s: &[f64], w: f64, col_lw: &[f64]) -> f64 {
        let nc = self.cols();
        let mut col_term = 0.0;
        for (i, &v) in s.iter().enumerate() {
            if v > 0.0 {
                col_term += v * col_lw[i % nc];
            }
        }
        self.row_gap + entropy(s) + col_term + self.full.offset0 + w * self.full.offset1
    }

    pub fn denominator(&self, s: &[f64]) -> f64 {
        self.denominator_w(s, 1.0, &self.col_lw)
    }

    pub fn ratio(&self, s: &[f64]) -> f64 {
        let den = self.denominator(s);
        if den <= 0.0 {
            return f64::INFINITY;
        }
        self.numerator(s) / den
    }

    pub fn numerator_grad(&self, s: &[f64]) -> Vec<f64> {
        let g = numerator_grad_joint(&self.full.pxy, &self.output_joint(s), &self.full.channel);
        let nc = self.cols();
        (0..s.len())
            .map(|i| g[self.row_sym[i / nc]][self.col_sym[i % nc]])
            .collect()
    }

    pub fn denominator_grad_w(&self, s: &[f64], col_lw: &[f64]) -> Vec<f64> {
        let nc = self.cols();
        s.iter()
            .enumerate()
            .map(|(i, &v)| -v.max(1e-300).log2() - 1.0 / LN_2 + col_lw[i % nc])
            .collect()
    }

    pub fn denominator_grad(&self, s: &[f64]) -> Vec<f64> {
        self.denominator_grad_w(s, &self.col_lw)
    }

    /// Full joint type attaining [`ReducedProblem::denominator`] for `s`.
    pub fn lift(&self, s: &[f64]) -> Vec<f64> {
        let full = &self.full;
        let (fr, fc) = (full.rows(), full.cols());
        let nc = self.cols();
        let mut m = vec![0.0; fr * fc];
        for t in 0..fr {
            let Some(kr) = self.row_class_of[t] else { continue };
            let row_share = full.row_mass[t] / self.row_mass[kr];
            for u in 0..fc {
                let Some(kc) = self.col_class_of[u] else { continue };
                let col_share = (full.col_log[u] - self.col_lw[kc]).exp2();
                m[t * fc + u] = row_share * s[kr * nc + kc] * col_share;
            }
        }
        m
    }

    /// Class-level aggregate of a full joint type.
    pub fn aggregate(&self, m: &[f64]) -> Vec<f64> {
        let full = &self.full;
        let fc = full.cols();
        let nc = self.cols();
        let mut s = vec![0.0; self.len()];
        for t in 0..full.rows() {
            let Some(kr) = self.row_class_of[t] else { continue };
            for u in 0..fc {
                if let Some(kc) = self.col_class_of[u] {
                    s[kr * nc + kc] += m[t * fc + u];
                }
            }
        }
        s
    }
}
