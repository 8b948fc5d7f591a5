//! Method-of-types objects: sensor types, joint sensor and field types, the
//! maps between them, and the output distributions they induce.
//!
//! Types built from actual fields carry exact integer counts, so marginal
//! identities can be checked with `==`. Relaxed points (arbitrary entries of
//! the probability polytope, as used by the optimizer) carry probabilities
//! only.

use crate::mrf::{self, FieldType, TargetField, MAX_ENUM_SIDE, QUINTUPLETS};
use crate::sensing::{Coverage, NoiseChannel, SensingFunction};
use crate::{Error, Result};

/// Dense row-major matrix of probabilities.
pub type Matrix = Vec<Vec<f64>>;

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

/// `D(p || q)` in bits; `+inf` when `p` puts mass where `q` has none.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).log2();
        }
    }
    s
}

/// `-sum_i p_i log2 q_i`.
pub fn cross_entropy(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            s -= a * b.log2();
        }
    }
    s
}

pub fn matrix_entropy(m: &Matrix) -> f64 {
    m.iter().map(|r| entropy(r)).sum()
}

pub fn flatten(m: &Matrix) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

/// Exact counts over a finite index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Histogram { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn probs(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Index set of a type: footprint patterns for some range, or quintuplets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternSpace {
    Footprint(Coverage),
    Quintuplet,
}

impl PatternSpace {
    pub fn size(&self) -> Result<usize> {
        match self {
            PatternSpace::Footprint(cov) => cov.patterns(),
            PatternSpace::Quintuplet => Ok(QUINTUPLETS),
        }
    }

    pub fn center_bit(&self, idx: usize) -> u8 {
        match self {
            PatternSpace::Footprint(cov) => cov.center_bit(idx),
            PatternSpace::Quintuplet => mrf::quintuplet_center(idx),
        }
    }

    fn index_at(&self, field: &TargetField, h: mrf::GridIndex) -> usize {
        match self {
            PatternSpace::Footprint(cov) => cov.pattern_at(field, h),
            PatternSpace::Quintuplet => mrf::quintuplet(field, h),
        }
    }

    /// Output symbol of `psi` for every index of this space. Quintuplets
    /// are sensed through their center bit, which requires a range-0
    /// sensing function.
    pub fn symbols(&self, psi: &SensingFunction) -> Result<Vec<usize>> {
        match self {
            PatternSpace::Footprint(cov) => {
                if psi.width() != cov.size() {
                    return Err(Error::PatternSize { expected: cov.size(), got: psi.width() });
                }
                psi.table()
            }
            PatternSpace::Quintuplet => {
                if psi.width() != 1 {
                    return Err(Error::PatternSize { expected: 1, got: psi.width() });
                }
                Ok((0..QUINTUPLETS)
                    .map(|t| psi.sense_index(mrf::quintuplet_center(t) as usize))
                    .collect())
            }
        }
    }
}

/// `gamma`: histogram of footprint patterns over all `k^2` positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorType {
    coverage: Coverage,
    hist: Histogram,
}

impl SensorType {
    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    pub fn hist(&self) -> &Histogram {
        &self.hist
    }

    pub fn probs(&self) -> Vec<f64> {
        self.hist.probs()
    }
}

pub fn sensor_type(field: &TargetField, c: u32) -> Result<SensorType> {
    let coverage = Coverage::new(c);
    coverage.check_side(field.k())?;
    let mut counts = vec![0u64; coverage.patterns()?];
    for h in field.positions() {
        counts[coverage.pattern_at(field, h)] += 1;
    }
    Ok(SensorType { coverage, hist: Histogram::from_counts(counts) })
}

/// Joint histogram of pattern pairs (`lambda` over footprints, `mu` over
/// quintuplets), stored row-major with the first field indexing rows.
#[derive(Debug, Clone, PartialEq)]
pub struct JointType {
    space: PatternSpace,
    dim: usize,
    probs: Vec<f64>,
    counts: Option<Vec<u64>>,
}

pub type JointSensorType = JointType;
pub type JointFieldType = JointType;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realizability {
    /// Built from an actual pair of fields.
    Realized,
    /// An arbitrary point of the probability polytope.
    Relaxed,
}

impl JointType {
    fn from_fields(space: PatternSpace, fi: &TargetField, fj: &TargetField) -> Result<Self> {
        if fi.k() != fj.k() {
            return Err(Error::DimensionMismatch(format!(
                "fields of side {} and {}",
                fi.k(),
                fj.k()
            )));
        }
        let dim = space.size()?;
        let mut counts = vec![0u64; dim * dim];
        for h in fi.positions() {
            counts[space.index_at(fi, h) * dim + space.index_at(fj, h)] += 1;
        }
        let n = (fi.k() * fi.k()) as f64;
        let probs = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(JointType { space, dim, probs, counts: Some(counts) })
    }

    /// A free point of the joint-type polytope.
    pub fn relaxed(space: PatternSpace, probs: Vec<f64>) -> Result<Self> {
        let dim = space.size()?;
        if probs.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} joint type",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= -1e-12)) {
            return Err(Error::InvalidArgument("negative joint type entry".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("joint type sums to {s}")));
        }
        Ok(JointType { space, dim, probs, counts: None })
    }

    pub fn space(&self) -> &PatternSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, w: usize, u: usize) -> f64 {
        self.probs[w * self.dim + u]
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn realizability(&self) -> Realizability {
        if self.counts.is_some() {
            Realizability::Realized
        } else {
            Realizability::Relaxed
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    /// Exact row and column count marginals of a realized type.
    pub fn marginal_counts(&self) -> Option<(Vec<u64>, Vec<u64>)> {
        let counts = self.counts.as_ref()?;
        let mut rows = vec![0u64; self.dim];
        let mut cols = vec![0u64; self.dim];
        for w in 0..self.dim {
            for u in 0..self.dim {
                let c = counts[w * self.dim + u];
                rows[w] += c;
                cols[u] += c;
            }
        }
        Some((rows, cols))
    }

    /// Row marginal (`gamma_i` / `phi_i`) and column marginal.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; self.dim];
        let mut cols = vec![0.0; self.dim];
        for w in 0..self.dim {
            for u in 0..self.dim {
                let p = self.probs[w * self.dim + u];
                rows[w] += p;
                cols[u] += p;
            }
        }
        (rows, cols)
    }
}

pub fn joint_sensor_type(fi: &TargetField, fj: &TargetField, c: u32) -> Result<JointType> {
    let cov = Coverage::new(c);
    cov.check_side(fi.k())?;
    JointType::from_fields(PatternSpace::Footprint(cov), fi, fj)
}

pub fn joint_field_type(fi: &TargetField, fj: &TargetField) -> Result<JointType> {
    JointType::from_fields(PatternSpace::Quintuplet, fi, fj)
}

/// `(gamma_i, gamma_j)`: row and column sums.
pub fn lambda_marginals(lambda: &JointType) -> (Vec<f64>, Vec<f64>) {
    lambda.marginals()
}

/// Joint distribution of the two center bits; entry `[a][b]` is the mass
/// where the first field has center `a` and the second has center `b`.
pub fn center_pair(joint: &JointType) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    let centers: Vec<usize> = (0..joint.dim).map(|i| joint.space.center_bit(i) as usize).collect();
    for w in 0..joint.dim {
        for u in 0..joint.dim {
            out[centers[w]][centers[u]] += joint.probs[w * joint.dim + u];
        }
    }
    out
}

pub fn center_pair_counts(joint: &JointType) -> Option<[[u64; 2]; 2]> {
    let counts = joint.counts.as_ref()?;
    let mut out = [[0u64; 2]; 2];
    for w in 0..joint.dim {
        let a = joint.space.center_bit(w) as usize;
        for u in 0..joint.dim {
            out[a][joint.space.center_bit(u) as usize] += counts[w * joint.dim + u];
        }
    }
    Some(out)
}

/// `lambda_(1)(0) + lambda_(0)(1)`.
pub fn distortion(pair: &[[f64; 2]; 2]) -> f64 {
    pair[1][0] + pair[0][1]
}

/// Quintuplet index carried by a footprint pattern of range `c >= 1`.
pub fn pattern_to_quintuplet(cov: &Coverage, pattern: usize) -> Result<usize> {
    if cov.range() == 0 {
        return Err(Error::WrongDirection { c: 0 });
    }
    let order = [(-1, 0), (0, 1), (1, 0), (0, -1), (0, 0)];
    Ok(order.iter().fold(0usize, |acc, &o| {
        let pos = cov.position_of(o).expect("range >= 1 covers the cross");
        (acc << 1) | cov.bit(pattern, pos) as usize
    }))
}

/// Field type from a sensor type of range `c >= 1` (re-indexing at `c = 1`,
/// marginalization beyond).
pub fn gamma_to_phi(gamma: &SensorType) -> Result<FieldType> {
    let cov = &gamma.coverage;
    if cov.range() == 0 {
        return Err(Error::WrongDirection { c: 0 });
    }
    let mut counts = [0u64; QUINTUPLETS];
    for (w, &c) in gamma.hist.counts().iter().enumerate() {
        counts[pattern_to_quintuplet(cov, w)?] += c;
    }
    FieldType::from_counts(counts)
}

/// The same map on a probability vector over footprint patterns.
pub fn gamma_to_phi_probs(gamma: &[f64], cov: &Coverage) -> Result<Vec<f64>> {
    if gamma.len() != cov.patterns()? {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for range {}",
            gamma.len(),
            cov.range()
        )));
    }
    let mut phi = vec![0.0; QUINTUPLETS];
    for (w, &g) in gamma.iter().enumerate() {
        phi[pattern_to_quintuplet(cov, w)?] += g;
    }
    Ok(phi)
}

/// Range-0 sensor type from a field type: mass per center bit.
pub fn phi_to_gamma(phi: &FieldType) -> SensorType {
    let mut counts = vec![0u64; 2];
    for (t, &c) in phi.counts().iter().enumerate() {
        counts[mrf::quintuplet_center(t) as usize] += c;
    }
    SensorType { coverage: Coverage::new(0), hist: Histogram::from_counts(counts) }
}

pub fn phi_to_gamma_probs(phi: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; 2];
    for (t, &p) in phi.iter().enumerate() {
        g[mrf::quintuplet_center(t) as usize] += p;
    }
    g
}

fn check_len(got: usize, expected: usize, what: &str) -> Result<()> {
    if got != expected {
        return Err(Error::DimensionMismatch(format!("{what}: {got} entries, expected {expected}")));
    }
    Ok(())
}

/// `P^gamma(x) = sum_{w : psi(w) = x} gamma_w`.
pub fn output_dist(gamma: &[f64], psi: &SensingFunction) -> Result<Vec<f64>> {
    let table = psi.table()?;
    check_len(gamma.len(), table.len(), "sensor type")?;
    let mut out = vec![0.0; psi.output_size()];
    for (w, &g) in gamma.iter().enumerate() {
        out[table[w]] += g;
    }
    Ok(out)
}

/// `A(x, a) = sum_{psi(w) = x, psi(u) = a} lambda_(w)(u)`; its row sums are
/// `P^gamma_i`.
pub fn output_joint(joint: &JointType, psi: &SensingFunction) -> Result<Matrix> {
    let sym = joint.space.symbols(psi)?;
    let m = psi.output_size();
    let mut a = vec![vec![0.0; m]; m];
    for w in 0..joint.dim {
        for u in 0..joint.dim {
            a[sym[w]][sym[u]] += joint.probs[w * joint.dim + u];
        }
    }
    Ok(a)
}

/// `P^lambda(x_j | x_i)`; rows whose conditioning symbol has zero mass are
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDist {
    rows: Vec<Option<Vec<f64>>>,
}

impl ConditionalDist {
    pub fn row(&self, x: usize) -> Result<&[f64]> {
        self.rows
            .get(x)
            .and_then(|r| r.as_deref())
            .ok_or(Error::UndefinedConditional { x })
    }

    pub fn rows(&self) -> &[Option<Vec<f64>>] {
        &self.rows
    }
}

pub fn conditional_from_joint(a: &Matrix) -> ConditionalDist {
    ConditionalDist {
        rows: a
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                (s > 0.0).then(|| r.iter().map(|v| v / s).collect())
            })
            .collect(),
    }
}

pub fn cond_output_dist(lambda: &JointType, psi: &SensingFunction) -> Result<ConditionalDist> {
    Ok(conditional_from_joint(&output_joint(lambda, psi)?))
}

/// `P^gamma(x) P_{Y|X}(y|x)` from an output distribution.
pub fn pxy_from_output(px: &[f64], channel: &NoiseChannel) -> Result<Matrix> {
    check_len(px.len(), channel.input_size(), "output distribution")?;
    Ok(px
        .iter()
        .enumerate()
        .map(|(x, &p)| channel.row(x).iter().map(|&c| p * c).collect())
        .collect())
}

pub fn pxy(gamma: &[f64], psi: &SensingFunction, channel: &NoiseChannel) -> Result<Matrix> {
    pxy_from_output(&output_dist(gamma, psi)?, channel)
}

/// `Q(x, y) = sum_a A(x, a) P_{Y|X}(y|a)`, which equals
/// `sum_a P^gamma(x) P^lambda(a|x) P_{Y|X}(y|a)`.
pub fn qxy_from_joint(a: &Matrix, channel: &NoiseChannel) -> Result<Matrix> {
    check_len(a.len(), channel.input_size(), "output joint")?;
    let ny = channel.output_size();
    Ok(a
        .iter()
        .map(|row| {
            let mut q = vec![0.0; ny];
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    for (y, qy) in q.iter_mut().enumerate() {
                        *qy += v * channel.prob(j, y);
                    }
                }
            }
            q
        })
        .collect())
}

pub fn qxy(
    gamma: &[f64],
    lambda: &JointType,
    psi: &SensingFunction,
    channel: &NoiseChannel,
) -> Result<Matrix> {
    let px = output_dist(gamma, psi)?;
    let a = output_joint(lambda, psi)?;
    for (x, (row, &p)) in a.iter().zip(&px).enumerate() {
        let s: f64 = row.iter().sum();
        if (s - p).abs() > 1e-9 {
            return Err(Error::InconsistentTypes(format!(
                "joint type gives P(x={x}) = {s}, sensor type gives {p}"
            )));
        }
    }
    qxy_from_joint(&a, channel)
}

fn check_enumerable(k: usize) -> Result<()> {
    if k > MAX_ENUM_SIDE {
        return Err(Error::EnumerationTooLarge { cells: k * k });
    }
    Ok(())
}

/// Number of fields with field type `phi`, by enumeration.
pub fn alpha_count(phi: &FieldType, k: usize) -> Result<u64> {
    check_enumerable(k)?;
    let mut n = 0;
    for i in 0..1u64 << (k * k) {
        if &mrf::field_type(&TargetField::from_index(k, i)?) == phi {
            n += 1;
        }
    }
    Ok(n)
}

/// Number of fields `f_j` whose joint sensor type with `fi` equals the
/// realized type `lambda`, by enumeration.
pub fn beta_count(fi: &TargetField, lambda: &JointType, c: u32) -> Result<u64> {
    let k = fi.k();
    check_enumerable(k)?;
    let target = lambda
        .counts()
        .ok_or_else(|| Error::InvalidArgument("beta_count needs a realized joint type".into()))?;
    let mut n = 0;
    for i in 0..1u64 << (k * k) {
        let fj = TargetField::from_index(k, i)?;
        if joint_sensor_type(fi, &fj, c)?.counts() == Some(target) {
            n += 1;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrf::GridIndex;
    use crate::sensing::PsiKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_field(k: usize, seed: u64) -> TargetField {
        TargetField::random_uniform(k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn entropy_and_kl_reference_values() {
        assert!((entropy(&[1.0 / 32.0; 32]) - 5.0).abs() < 1e-12);
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl(&p, &p), 0.0);
        assert!((kl(&[1.0, 0.0], &[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(kl(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn sensor_type_examples() {
        let z = sensor_type(&TargetField::zeros(4).unwrap(), 1).unwrap();
        assert_eq!(z.hist().counts()[0], 16);
        let cb = sensor_type(&TargetField::checkerboard(4).unwrap(), 0).unwrap();
        assert_eq!(cb.probs(), vec![0.5, 0.5]);
        assert!(sensor_type(&TargetField::zeros(4).unwrap(), 2).is_err());
    }

    #[test]
    fn range_one_sensor_type_is_the_field_type() {
        for seed in 0..20 {
            let f = rand_field(5, seed);
            let gamma = sensor_type(&f, 1).unwrap();
            assert_eq!(gamma_to_phi(&gamma).unwrap(), mrf::field_type(&f));
        }
        let z = sensor_type(&TargetField::zeros(3).unwrap(), 1).unwrap();
        assert_eq!(gamma_to_phi(&z).unwrap().counts()[0], 9);
    }

    #[test]
    fn range_two_marginalizes_to_the_field_type() {
        let o = sensor_type(&TargetField::ones(5).unwrap(), 2).unwrap();
        assert_eq!(gamma_to_phi(&o).unwrap().probs()[31], 1.0);
        let f = rand_field(6, 3);
        let gamma = sensor_type(&f, 2).unwrap();
        assert_eq!(gamma_to_phi(&gamma).unwrap(), mrf::field_type(&f));
        let probs = gamma_to_phi_probs(&gamma.probs(), gamma.coverage()).unwrap();
        let direct = mrf::field_type(&f).probs();
        for (a, b) in probs.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_to_gamma_examples() {
        let z = mrf::field_type(&TargetField::zeros(3).unwrap());
        assert_eq!(phi_to_gamma(&z).probs(), vec![1.0, 0.0]);
        assert_eq!(phi_to_gamma_probs(&[1.0 / 32.0; 32]), vec![0.5, 0.5]);
        let f = rand_field(4, 8);
        assert_eq!(phi_to_gamma(&mrf::field_type(&f)), sensor_type(&f, 0).unwrap());
        assert_eq!(
            gamma_to_phi(&sensor_type(&f, 0).unwrap()),
            Err(Error::WrongDirection { c: 0 })
        );
    }

    #[test]
    fn joint_type_examples() {
        let f = rand_field(4, 1);
        let same = joint_sensor_type(&f, &f, 1).unwrap();
        let gamma = sensor_type(&f, 1).unwrap();
        for w in 0..32 {
            for u in 0..32 {
                let expected = if w == u { gamma.probs()[w] } else { 0.0 };
                assert_eq!(same.get(w, u), expected);
            }
        }
        let comp = joint_sensor_type(&f, &f.complement(), 0).unwrap();
        assert_eq!(comp.get(0, 0), 0.0);
        assert_eq!(comp.get(1, 1), 0.0);
        assert_eq!(distortion(&center_pair(&comp)), 1.0);
        assert_eq!(distortion(&center_pair(&same)), 0.0);
        assert_eq!(same.realizability(), Realizability::Realized);
        assert!(joint_sensor_type(&f, &rand_field(3, 1), 0).is_err());
    }

    #[test]
    fn single_flip_distortion() {
        let f = rand_field(3, 4);
        let mut g = f.clone();
        g.flip(GridIndex::new(2, 1));
        for c in [0, 1] {
            let pair = center_pair(&joint_sensor_type(&f, &g, c).unwrap());
            assert!((distortion(&pair) - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn marginals_of_diagonal_and_uniform_types() {
        let cov = Coverage::new(0);
        let diag = JointType::relaxed(PatternSpace::Footprint(cov.clone()), vec![0.3, 0.0, 0.0, 0.7])
            .unwrap();
        assert_eq!(lambda_marginals(&diag), (vec![0.3, 0.7], vec![0.3, 0.7]));
        let uni = JointType::relaxed(PatternSpace::Footprint(cov), vec![0.25; 4]).unwrap();
        assert_eq!(lambda_marginals(&uni), (vec![0.5, 0.5], vec![0.5, 0.5]));
        assert_eq!(uni.realizability(), Realizability::Relaxed);
        assert!(uni.marginal_counts().is_none());
    }

    #[test]
    fn marginals_match_sensor_types_exactly() {
        for seed in 0..30 {
            let fi = rand_field(4, seed);
            let fj = rand_field(4, seed + 100);
            for c in [0, 1] {
                let lam = joint_sensor_type(&fi, &fj, c).unwrap();
                let (r, col) = lam.marginal_counts().unwrap();
                assert_eq!(r, sensor_type(&fi, c).unwrap().hist().counts());
                assert_eq!(col, sensor_type(&fj, c).unwrap().hist().counts());
            }
        }
    }

    #[test]
    fn output_distributions() {
        let id = SensingFunction::identity();
        assert_eq!(output_dist(&[0.7, 0.3], &id).unwrap(), vec![0.7, 0.3]);
        let cov1 = Coverage::new(1);
        let count = SensingFunction::new(PsiKind::Count, &cov1).unwrap();
        let mut g = vec![0.0; 32];
        g[31] = 1.0;
        let p = output_dist(&g, &count).unwrap();
        assert_eq!(p[5], 1.0);
        assert!(output_dist(&[0.5, 0.5], &count).is_err());
    }

    #[test]
    fn conditional_output_distributions() {
        let sp = PatternSpace::Footprint(Coverage::new(0));
        let id = SensingFunction::identity();
        let diag = JointType::relaxed(sp.clone(), vec![0.4, 0.0, 0.0, 0.6]).unwrap();
        let cd = cond_output_dist(&diag, &id).unwrap();
        assert_eq!(cd.row(0).unwrap(), &[1.0, 0.0]);
        assert_eq!(cd.row(1).unwrap(), &[0.0, 1.0]);

        let (gi, gj) = ([0.3, 0.7], [0.6, 0.4]);
        let prod: Vec<f64> = gi.iter().flat_map(|a| gj.iter().map(move |b| a * b)).collect();
        let cd = cond_output_dist(&JointType::relaxed(sp.clone(), prod).unwrap(), &id).unwrap();
        for x in 0..2 {
            let r = cd.row(x).unwrap();
            assert!((r[0] - 0.6).abs() < 1e-12 && (r[1] - 0.4).abs() < 1e-12);
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        let zero_row = JointType::relaxed(sp, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let cd = cond_output_dist(&zero_row, &id).unwrap();
        assert_eq!(cd.row(1), Err(Error::UndefinedConditional { x: 1 }));
    }

    #[test]
    fn pxy_examples() {
        let id = SensingFunction::identity();
        let bsc = NoiseChannel::bsc(0.1).unwrap();
        let p = pxy(&[0.5, 0.5], &id, &bsc).unwrap();
        let expected = [[0.45, 0.05], [0.05, 0.45]];
        for x in 0..2 {
            for y in 0..2 {
                assert!((p[x][y] - expected[x][y]).abs() < 1e-15);
            }
        }
        let p = pxy(&[0.2, 0.8], &id, &NoiseChannel::identity(2).unwrap()).unwrap();
        assert_eq!(p, vec![vec![0.2, 0.0], vec![0.0, 0.8]]);
        let marg: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(marg, vec![0.2, 0.8]);
    }

    #[test]
    fn qxy_examples() {
        let sp = PatternSpace::Footprint(Coverage::new(0));
        let id = SensingFunction::identity();
        let bsc = NoiseChannel::bsc(0.1).unwrap();

        let lam = JointType::relaxed(sp.clone(), vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let q = qxy(&[0.5, 0.5], &lam, &id, &bsc).unwrap();
        assert!((q[0][0] - 0.37).abs() < 1e-15);
        let marg: Vec<f64> = q.iter().map(|r| r.iter().sum()).collect();
        assert!((marg[0] - 0.5).abs() < 1e-15 && (marg[1] - 0.5).abs() < 1e-15);

        let diag = JointType::relaxed(sp.clone(), vec![0.3, 0.0, 0.0, 0.7]).unwrap();
        assert_eq!(
            qxy(&[0.3, 0.7], &diag, &id, &bsc).unwrap(),
            pxy(&[0.3, 0.7], &id, &bsc).unwrap()
        );

        let (g, g2) = ([0.3, 0.7], [0.8, 0.2]);
        let prod: Vec<f64> = g.iter().flat_map(|a| g2.iter().map(move |b| a * b)).collect();
        let q = qxy(&g, &JointType::relaxed(sp.clone(), prod).unwrap(), &id, &bsc).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let e = g[x] * (0..2).map(|a| g2[a] * bsc.prob(a, y)).sum::<f64>();
                assert!((q[x][y] - e).abs() < 1e-15);
            }
        }

        assert!(matches!(
            qxy(&[0.6, 0.4], &lam, &id, &bsc),
            Err(Error::InconsistentTypes(_))
        ));
    }

    #[test]
    fn alpha_and_beta_counts() {
        let z = TargetField::zeros(3).unwrap();
        assert_eq!(alpha_count(&mrf::field_type(&z), 3).unwrap(), 1);
        let same = joint_sensor_type(&z, &z, 0).unwrap();
        assert_eq!(beta_count(&z, &same, 0).unwrap(), 1);

        let mut two = z.clone();
        two.set(GridIndex::new(0, 0), 1);
        two.set(GridIndex::new(1, 2), 1);
        let lam = joint_sensor_type(&z, &two, 0).unwrap();
        assert!((lam.get(0, 1) - 2.0 / 9.0).abs() < 1e-15);
        // binomial(9, 2)
        assert_eq!(beta_count(&z, &lam, 0).unwrap(), 36);

        assert!(alpha_count(&mrf::field_type(&TargetField::zeros(5).unwrap()), 5).is_err());
        let relaxed = JointType::relaxed(PatternSpace::Footprint(Coverage::new(0)), vec![0.25; 4])
            .unwrap();
        assert!(beta_count(&z, &relaxed, 0).is_err());
    }

    #[test]
    fn cross_entropy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..50 {
            let p: Vec<f64> = (0..32).map(|_| rng.gen::<f64>()).collect();
            let q: Vec<f64> = (0..32).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            let p: Vec<f64> = p.iter().map(|v| v / sp).collect();
            let q: Vec<f64> = q.iter().map(|v| v / sq).collect();
            let lhs = kl(&p, &q) + entropy(&p);
            assert!((lhs - cross_entropy(&p, &q)).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_field_type_commutes_with_center_pairs() {
        for seed in 0..20 {
            let fi = rand_field(4, seed);
            let fj = rand_field(4, seed + 50);
            let mu = joint_field_type(&fi, &fj).unwrap();
            let lam0 = joint_sensor_type(&fi, &fj, 0).unwrap();
            assert_eq!(center_pair_counts(&mu), center_pair_counts(&lam0));
            let (r, c) = mu.marginal_counts().unwrap();
            assert_eq!(&r[..], &mrf::field_type(&fi).counts()[..]);
            assert_eq!(&c[..], &mrf::field_type(&fj).counts()[..]);
        }
    }
}
