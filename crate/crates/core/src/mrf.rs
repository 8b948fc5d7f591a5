//! Binary target fields on a `k x k` torus and their pairwise Markov random
//! field distribution.
//!
//! Each site `h` contributes one clique factor that depends on the
//! quintuplet `(N, E, S, W, center)` around it:
//!
//! ```text
//! P(f) = Z^-1 * prod_h W^-1 P_F(f_h) prod_{v in N_h} P_{F|F'}(f_h | f_v)
//! ```
//!
//! so the unnormalized log-probability is a function of the field type
//! (the 32-bin quintuplet histogram) alone.

use rand::Rng;

use crate::rng;
use crate::{Error, Result};

/// Number of distinct quintuplets `(N, E, S, W, center)`.
pub const QUINTUPLETS: usize = 32;

/// Largest side for which exhaustive enumeration over `2^(k*k)` fields is
/// allowed.
pub const MAX_ENUM_SIDE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub row: usize,
    pub col: usize,
}

impl GridIndex {
    pub fn new(row: usize, col: usize) -> Self {
        GridIndex { row, col }
    }

    /// Cell offset by `(dr, dc)` with torus wraparound.
    pub fn offset(self, dr: i64, dc: i64, k: usize) -> GridIndex {
        let k = k as i64;
        GridIndex {
            row: (self.row as i64 + dr).rem_euclid(k) as usize,
            col: (self.col as i64 + dc).rem_euclid(k) as usize,
        }
    }

    pub fn linear(self, k: usize) -> usize {
        self.row * k + self.col
    }

    pub fn from_linear(i: usize, k: usize) -> GridIndex {
        GridIndex { row: i / k, col: i % k }
    }
}

pub(crate) fn check_side(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidGrid { k });
    }
    Ok(())
}

/// The four torus neighbors of `h` in the order N, E, S, W.
pub fn neighbors(h: GridIndex, k: usize) -> Result<[GridIndex; 4]> {
    check_side(k)?;
    Ok(neighbors_unchecked(h, k))
}

fn neighbors_unchecked(h: GridIndex, k: usize) -> [GridIndex; 4] {
    [
        h.offset(-1, 0, k),
        h.offset(0, 1, k),
        h.offset(1, 0, k),
        h.offset(0, -1, k),
    ]
}

/// A binary field on the `k x k` torus, stored in raster order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetField {
    k: usize,
    bits: Vec<u8>,
}

impl TargetField {
    pub fn new(k: usize, bits: Vec<u8>) -> Result<Self> {
        check_side(k)?;
        if bits.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "field of side {k} needs {} bits, got {}",
                k * k,
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!("field bit {b} is not binary")));
        }
        Ok(TargetField { k, bits })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(k, vec![0; k * k])
    }

    pub fn ones(k: usize) -> Result<Self> {
        Self::new(k, vec![1; k * k])
    }

    /// `f(r, c) = (r + c) mod 2`.
    pub fn checkerboard(k: usize) -> Result<Self> {
        let bits = (0..k * k).map(|i| ((i / k + i % k) % 2) as u8).collect();
        Self::new(k, bits)
    }

    /// Field with canonical index `index`: cell 0 (top-left) is the most
    /// significant bit, so index 0 is the all-zero field.
    pub fn from_index(k: usize, index: u64) -> Result<Self> {
        check_side(k)?;
        let n = k * k;
        if n < 64 && index >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "field index {index} out of range for side {k}"
            )));
        }
        Ok(TargetField { k, bits: bits_of_index(index, n) })
    }

    /// Inverse of [`TargetField::from_index`]. Only meaningful for `k*k <= 64`.
    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn random_uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        check_side(k)?;
        let bits = (0..k * k).map(|_| rng.gen_range(0..2u8)).collect();
        Ok(TargetField { k, bits })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, h: GridIndex) -> u8 {
        self.bits[h.linear(self.k)]
    }

    pub fn set(&mut self, h: GridIndex, value: u8) {
        let k = self.k;
        self.bits[h.linear(k)] = value & 1;
    }

    pub fn flip(&mut self, h: GridIndex) {
        let k = self.k;
        self.bits[h.linear(k)] ^= 1;
    }

    pub fn complement(&self) -> TargetField {
        TargetField {
            k: self.k,
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
        }
    }

    /// Cyclic shift: the returned field `g` satisfies `g(h + (dr, dc)) = f(h)`.
    pub fn shifted(&self, dr: i64, dc: i64) -> TargetField {
        let k = self.k;
        let mut bits = vec![0; k * k];
        for (i, &b) in self.bits.iter().enumerate() {
            bits[GridIndex::from_linear(i, k).offset(dr, dc, k).linear(k)] = b;
        }
        TargetField { k, bits }
    }

    pub fn positions(&self) -> impl Iterator<Item = GridIndex> {
        let k = self.k;
        (0..k * k).map(move |i| GridIndex::from_linear(i, k))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

pub(crate) fn bits_of_index(index: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect()
}

/// Quintuplet index `N*16 + E*8 + S*4 + W*2 + center`.
pub fn quintuplet(field: &TargetField, h: GridIndex) -> usize {
    let nb = neighbors_unchecked(h, field.k);
    let mut t = 0usize;
    for v in nb {
        t = (t << 1) | field.get(v) as usize;
    }
    (t << 1) | field.get(h) as usize
}

/// Center bit of a quintuplet index.
pub fn quintuplet_center(t: usize) -> u8 {
    (t & 1) as u8
}

/// Neighbor value `r` (0 = N, .., 3 = W) of a quintuplet index.
pub fn quintuplet_neighbor(t: usize, r: usize) -> u8 {
    ((t >> (4 - r)) & 1) as u8
}

/// Quintuplet histogram of a field, kept as exact counts over `k*k` sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldType {
    counts: [u64; QUINTUPLETS],
    total: u64,
}

impl FieldType {
    pub fn from_counts(counts: [u64; QUINTUPLETS]) -> Result<Self> {
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("empty field type".into()));
        }
        Ok(FieldType { counts, total })
    }

    pub fn counts(&self) -> &[u64; QUINTUPLETS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probs(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

pub fn field_type(field: &TargetField) -> FieldType {
    let mut counts = [0u64; QUINTUPLETS];
    for h in field.positions() {
        counts[quintuplet(field, h)] += 1;
    }
    FieldType {
        counts,
        total: (field.k * field.k) as u64,
    }
}

/// Node distribution `P_F` and edge conditional `P_{F|F'}(a|b) = p_edge[a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfModel {
    p_node: [f64; 2],
    p_edge: [[f64; 2]; 2],
    w: f64,
    /// `log2(W^-1 P_F(t5) prod_r P_{F|F'}(t5|t_r))` per quintuplet.
    clique_log2: [f64; QUINTUPLETS],
}

const SUM_TOL: f64 = 1e-9;

impl MrfModel {
    /// Zero entries are accepted (degenerate limits); every other value must
    /// be a probability and `W` must be positive.
    pub fn new(p_node: [f64; 2], p_edge: [[f64; 2]; 2]) -> Result<Self> {
        let all = p_node.iter().chain(p_edge.iter().flatten());
        if all.clone().any(|&v| !(0.0..=1.0).contains(&v) || v.is_nan()) {
            return Err(Error::InvalidModel("entries must lie in [0, 1]".into()));
        }
        if (p_node[0] + p_node[1] - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidModel("p_node must sum to 1".into()));
        }
        for b in 0..2 {
            if (p_edge[0][b] + p_edge[1][b] - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidModel(format!(
                    "p_edge(.|{b}) must sum to 1"
                )));
            }
        }
        let raw = raw_clique_weights(&p_node, &p_edge);
        let w: f64 = raw.iter().sum();
        if !(w > 0.0) {
            return Err(Error::InvalidModel("W must be positive".into()));
        }
        let mut clique_log2 = [0.0; QUINTUPLETS];
        for (t, r) in raw.iter().enumerate() {
            clique_log2[t] = r.log2() - w.log2();
        }
        Ok(MrfModel { p_node, p_edge, w, clique_log2 })
    }

    /// The one-parameter family `P_F = [p, 1-p]`,
    /// `P_{F|F'} = [[p, 1-p], [1-p, p]]`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new([p, 1.0 - p], [[p, 1.0 - p], [1.0 - p, p]])
    }

    pub fn p_node(&self) -> [f64; 2] {
        self.p_node
    }

    pub fn p_edge(&self) -> [[f64; 2]; 2] {
        self.p_edge
    }

    /// True when every entry of `P_F` and `P_{F|F'}` is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.p_node.iter().chain(self.p_edge.iter().flatten()).all(|&v| v > 0.0)
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn clique_log2(&self, t: usize) -> f64 {
        self.clique_log2[t]
    }

    pub fn clique_log2_table(&self) -> &[f64; QUINTUPLETS] {
        &self.clique_log2
    }

    /// `log2` of every factor of the unnormalized density containing site
    /// `h` when `f_h = value`; the rest of the field is read from `field`.
    pub(crate) fn site_log2_factor(&self, field: &TargetField, h: GridIndex, value: u8) -> f64 {
        let a = value as usize;
        let mut s = self.p_node[a].log2();
        for v in neighbors_unchecked(h, field.k) {
            let b = field.get(v) as usize;
            s += self.p_edge[a][b].log2() + self.p_edge[b][a].log2();
        }
        s
    }
}

fn raw_clique_weights(p_node: &[f64; 2], p_edge: &[[f64; 2]; 2]) -> [f64; QUINTUPLETS] {
    let mut out = [0.0; QUINTUPLETS];
    for (t, o) in out.iter_mut().enumerate() {
        let c = quintuplet_center(t) as usize;
        let mut v = p_node[c];
        for r in 0..4 {
            v *= p_edge[c][quintuplet_neighbor(t, r) as usize];
        }
        *o = v;
    }
    out
}

/// `W = sum_t P_F(t5) prod_r P_{F|F'}(t5|t_r)` by direct 32-term summation.
pub fn compute_w(model: &MrfModel) -> f64 {
    raw_clique_weights(&model.p_node, &model.p_edge).iter().sum()
}

/// `log2` of the Gibbs density without the `1/Z` factor, as a product of
/// per-site factors.
pub fn log_prob_unnorm(field: &TargetField, model: &MrfModel) -> f64 {
    let k = field.k;
    let lw = model.w.log2();
    let mut s = 0.0;
    for h in field.positions() {
        let a = field.get(h) as usize;
        s += model.p_node[a].log2() - lw;
        for v in neighbors_unchecked(h, k) {
            s += model.p_edge[a][field.get(v) as usize].log2();
        }
    }
    s
}

/// The same quantity written through the field type:
/// `k^2 * sum_t phi_t * log2(W^-1 P_F(t5) prod_r P_{F|F'}(t5|t_r))`.
pub fn log_prob_unnorm_from_type(phi: &FieldType, model: &MrfModel) -> f64 {
    phi.counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| c as f64 * model.clique_log2[t])
        .sum()
}

fn check_enumerable(k: usize) -> Result<()> {
    check_side(k)?;
    if k > MAX_ENUM_SIDE {
        return Err(Error::EnumerationTooLarge { cells: k * k });
    }
    Ok(())
}

/// Unnormalized `log2` scores of all `2^(k*k)` fields, by canonical index.
pub fn enumerate_log_scores(model: &MrfModel, k: usize) -> Result<Vec<f64>> {
    check_enumerable(k)?;
    let n = k * k;
    Ok((0..1u64 << n)
        .map(|i| {
            let f = TargetField { k, bits: bits_of_index(i, n) };
            log_prob_unnorm(&f, model)
        })
        .collect())
}

fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp2()).sum::<f64>().log2()
}

/// `Z` by exhaustive summation (`k <= 4`).
pub fn partition_z(model: &MrfModel, k: usize) -> Result<f64> {
    Ok(log2_partition_z(model, k)?.exp2())
}

pub fn log2_partition_z(model: &MrfModel, k: usize) -> Result<f64> {
    Ok(log2_sum_exp2(&enumerate_log_scores(model, k)?))
}

/// The normalized distribution over all `2^(k*k)` fields.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    k: usize,
    log2_z: f64,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl ExactDistribution {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn log2_z(&self) -> f64 {
        self.log2_z
    }

    /// Probabilities indexed by canonical field index.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (TargetField, f64)> + '_ {
        let n = self.k * self.k;
        self.probs.iter().enumerate().map(move |(i, &p)| {
            (TargetField { k: self.k, bits: bits_of_index(i as u64, n) }, p)
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TargetField {
        let u: f64 = rng.gen::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        TargetField {
            k: self.k,
            bits: bits_of_index(i as u64, self.k * self.k),
        }
    }
}

pub fn exact_distribution(model: &MrfModel, k: usize) -> Result<ExactDistribution> {
    let scores = enumerate_log_scores(model, k)?;
    let log2_z = log2_sum_exp2(&scores);
    let probs: Vec<f64> = scores.iter().map(|&s| (s - log2_z).exp2()).collect();
    let mut acc = 0.0;
    let cdf = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    Ok(ExactDistribution { k, log2_z, probs, cdf })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Raster,
    Random,
}

/// Single-site Gibbs sampler started from a uniformly random field.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    pub model: &'a MrfModel,
    pub k: usize,
    pub sweeps: usize,
    pub scan: ScanOrder,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(model: &'a MrfModel, k: usize, sweeps: usize) -> Result<Self> {
        check_side(k)?;
        if sweeps == 0 {
            return Err(Error::InvalidArgument("burn-in needs at least one sweep".into()));
        }
        Ok(GibbsSampler { model, k, sweeps, scan: ScanOrder::Raster })
    }

    pub fn with_scan(mut self, scan: ScanOrder) -> Self {
        self.scan = scan;
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TargetField {
        let mut field = TargetField {
            k: self.k,
            bits: (0..self.k * self.k).map(|_| rng.gen_range(0..2u8)).collect(),
        };
        self.run(&mut field, rng);
        field
    }

    /// Successive states of one chain, `sweeps` sweeps apart; the first is
    /// what [`GibbsSampler::sample`] returns.
    pub fn chain<'r, R: Rng + ?Sized>(&'r self, rng: &'r mut R) -> impl Iterator<Item = TargetField> + 'r {
        let mut field = TargetField {
            k: self.k,
            bits: (0..self.k * self.k).map(|_| rng.gen_range(0..2u8)).collect(),
        };
        std::iter::from_fn(move || {
            self.run(&mut field, rng);
            Some(field.clone())
        })
    }

    fn run<R: Rng + ?Sized>(&self, field: &mut TargetField, rng: &mut R) {
        let n = self.k * self.k;
        for _ in 0..self.sweeps {
            for step in 0..n {
                let i = match self.scan {
                    ScanOrder::Raster => step,
                    ScanOrder::Random => rng.gen_range(0..n),
                };
                self.update_site(field, GridIndex::from_linear(i, self.k), rng);
            }
        }
    }

    fn update_site<R: Rng + ?Sized>(&self, field: &mut TargetField, h: GridIndex, rng: &mut R) {
        let l0 = self.model.site_log2_factor(field, h, 0);
        let l1 = self.model.site_log2_factor(field, h, 1);
        // P(f_h = 1 | rest) = 1 / (1 + 2^(l0 - l1))
        let p1 = if l1 == f64::NEG_INFINITY {
            0.0
        } else {
            1.0 / (1.0 + (l0 - l1).exp2())
        };
        let v = u8::from(rng.gen::<f64>() < p1);
        field.set(h, v);
    }
}

/// One Gibbs draw after `burn_in_sweeps` raster sweeps; a pure function of
/// its arguments.
pub fn gibbs_sample(
    model: &MrfModel,
    k: usize,
    burn_in_sweeps: usize,
    seed: u64,
) -> Result<TargetField> {
    let sampler = GibbsSampler::new(model, k, burn_in_sweeps)?;
    Ok(sampler.sample(&mut rng::stream(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(r: usize, c: usize) -> GridIndex {
        GridIndex::new(r, c)
    }

    #[test]
    fn neighbor_order_and_wraparound() {
        assert_eq!(neighbors(g(0, 0), 3).unwrap(), [g(2, 0), g(0, 1), g(1, 0), g(0, 2)]);
        assert_eq!(neighbors(g(1, 2), 4).unwrap(), [g(0, 2), g(1, 3), g(2, 2), g(1, 1)]);
        assert_eq!(neighbors(g(2, 2), 3).unwrap(), [g(1, 2), g(2, 0), g(0, 2), g(2, 1)]);
        assert_eq!(neighbors(g(0, 0), 2), Err(Error::InvalidGrid { k: 2 }));
    }

    #[test]
    fn quintuplets_of_constant_and_checkerboard_fields() {
        let z = TargetField::zeros(4).unwrap();
        let o = TargetField::ones(4).unwrap();
        let cb = TargetField::checkerboard(4).unwrap();
        for h in z.positions() {
            assert_eq!(quintuplet(&z, h), 0);
            assert_eq!(quintuplet(&o, h), 31);
            let expected = if cb.get(h) == 0 { 30 } else { 1 };
            assert_eq!(quintuplet(&cb, h), expected);
        }
    }

    #[test]
    fn field_types_of_reference_fields() {
        let z = field_type(&TargetField::zeros(3).unwrap());
        assert_eq!(z.counts()[0], 9);
        assert_eq!(z.total(), 9);
        let o = field_type(&TargetField::ones(5).unwrap());
        assert_eq!(o.probs()[31], 1.0);
        let cb = field_type(&TargetField::checkerboard(4).unwrap()).probs();
        assert_eq!(cb[30], 0.5);
        assert_eq!(cb[1], 0.5);
        assert_eq!(cb.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn w_reference_values() {
        let uni = MrfModel::new([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!((compute_w(&uni) - 1.0).abs() < 1e-15);
        for p in [0.1, 0.5, 0.7, 0.93] {
            assert!((compute_w(&MrfModel::symmetric(p).unwrap()) - 1.0).abs() < 1e-12);
        }
        let asym = MrfModel::new([0.5, 0.5], [[0.9, 0.2], [0.1, 0.8]]).unwrap();
        assert!((compute_w(&asym) - 0.5 * (1.1f64.powi(4) + 0.9f64.powi(4))).abs() < 1e-12);
        assert!((compute_w(&asym) - 1.0601).abs() < 1e-12);
        assert_eq!(asym.w(), compute_w(&asym));
    }

    #[test]
    fn model_validation() {
        assert!(MrfModel::new([0.6, 0.6], [[0.5, 0.5], [0.5, 0.5]]).is_err());
        assert!(MrfModel::new([0.5, 0.5], [[0.5, 0.6], [0.5, 0.5]]).is_err());
        assert!(MrfModel::new([-0.1, 1.1], [[0.5, 0.5], [0.5, 0.5]]).is_err());
        assert!(!MrfModel::new([1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]).unwrap().is_positive());
    }

    #[test]
    fn uniform_model_scores() {
        let m = MrfModel::symmetric(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let f = TargetField::random_uniform(3, &mut rng).unwrap();
            assert!((log_prob_unnorm(&f, &m) + 45.0).abs() < 1e-12);
        }
        assert!((log2_partition_z(&m, 3).unwrap() + 36.0).abs() < 1e-9);
        assert!((log2_partition_z(&m, 4).unwrap() + 64.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_limit_is_dominated_by_the_all_zero_term() {
        let eps = 1e-6;
        let m = MrfModel::symmetric(1.0 - eps).unwrap();
        let z = TargetField::zeros(3).unwrap();
        let expected = 9.0 * (1.0 - eps).log2() + 36.0 * (1.0 - eps).log2();
        assert!((log_prob_unnorm(&z, &m) - expected).abs() < 1e-9);
    }

    #[test]
    fn factorized_and_type_forms_agree() {
        let m = MrfModel::new([0.3, 0.7], [[0.9, 0.2], [0.1, 0.8]]).unwrap();
        for i in 0..512u64 {
            let f = TargetField::from_index(3, i).unwrap();
            let a = log_prob_unnorm(&f, &m);
            let b = log_prob_unnorm_from_type(&field_type(&f), &m);
            assert!((a - b).abs() < 1e-9, "index {i}: {a} vs {b}");
        }
    }

    #[test]
    fn field_index_roundtrip() {
        for i in [0u64, 1, 77, 511] {
            assert_eq!(TargetField::from_index(3, i).unwrap().index(), i);
        }
        assert_eq!(TargetField::from_index(3, 0).unwrap(), TargetField::zeros(3).unwrap());
        assert!(TargetField::from_index(3, 512).is_err());
    }

    #[test]
    fn enumeration_limits() {
        let m = MrfModel::symmetric(0.7).unwrap();
        assert_eq!(partition_z(&m, 5), Err(Error::EnumerationTooLarge { cells: 25 }));
        assert!(exact_distribution(&m, 5).is_err());
    }

    #[test]
    fn exact_distribution_properties() {
        let uni = exact_distribution(&MrfModel::symmetric(0.5).unwrap(), 3).unwrap();
        assert!(uni.probs().iter().all(|&p| (p - 1.0 / 512.0).abs() < 1e-15));

        let d = exact_distribution(&MrfModel::symmetric(0.7).unwrap(), 3).unwrap();
        let total: f64 = d.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(d.probs().iter().all(|&p| p >= 0.0));
        assert!(d.probs()[0] > d.probs()[511]);
    }

    #[test]
    fn z_for_p07_matches_brute_force_sum() {
        let m = MrfModel::symmetric(0.7).unwrap();
        let mut z = 0.0;
        for i in 0..512u64 {
            let f = TargetField::from_index(3, i).unwrap();
            let mut prod = 1.0;
            for h in f.positions() {
                let a = f.get(h) as usize;
                prod *= m.p_node()[a] / m.w();
                for v in neighbors(h, 3).unwrap() {
                    prod *= m.p_edge()[a][f.get(v) as usize];
                }
            }
            z += prod;
        }
        let got = partition_z(&m, 3).unwrap();
        assert!(((got - z) / z).abs() < 1e-12);
    }

    #[test]
    fn shift_invariance() {
        let m = MrfModel::new([0.4, 0.6], [[0.9, 0.2], [0.1, 0.8]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = TargetField::random_uniform(5, &mut rng).unwrap();
        for (dr, dc) in [(1, 0), (0, 3), (-2, 4)] {
            let s = f.shifted(dr, dc);
            assert_eq!(field_type(&s), field_type(&f));
            assert!((log_prob_unnorm(&s, &m) - log_prob_unnorm(&f, &m)).abs() < 1e-9);
        }
    }

    #[test]
    fn gibbs_is_deterministic_and_unbiased_on_the_uniform_model() {
        let m = MrfModel::symmetric(0.7).unwrap();
        assert_eq!(gibbs_sample(&m, 5, 10, 42).unwrap(), gibbs_sample(&m, 5, 10, 42).unwrap());
        assert!(gibbs_sample(&m, 5, 0, 42).is_err());

        let uni = MrfModel::symmetric(0.5).unwrap();
        let n = 10_000;
        let ones: usize = (0..n)
            .map(|s| gibbs_sample(&uni, 3, 2, s).unwrap().get(g(1, 1)) as usize)
            .sum();
        let mean = ones as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn chain_starts_with_the_single_draw_and_mixes() {
        let m = MrfModel::symmetric(0.7).unwrap();
        let s = GibbsSampler::new(&m, 3, 20).unwrap();
        let first = s.chain(&mut ChaCha8Rng::seed_from_u64(9)).next().unwrap();
        assert_eq!(first, s.sample(&mut ChaCha8Rng::seed_from_u64(9)));

        let exact = exact_distribution(&m, 3).unwrap();
        let n = 20_000;
        let mut counts = vec![0usize; 512];
        let mut r = ChaCha8Rng::seed_from_u64(10);
        for f in s.chain(&mut r).take(n) {
            counts[f.index() as usize] += 1;
        }
        let tv: f64 = 0.5
            * counts.iter().zip(exact.probs()).map(|(&c, &p)| (c as f64 / n as f64 - p).abs()).sum::<f64>();
        assert!(tv < 0.05, "tv {tv}");
    }

    #[test]
    fn random_scan_runs() {
        let m = MrfModel::symmetric(0.7).unwrap();
        let s = GibbsSampler::new(&m, 4, 5).unwrap().with_scan(ScanOrder::Random);
        let f = s.sample(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(f.k(), 4);
    }
}
