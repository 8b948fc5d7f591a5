//! Sensor footprints, sensing functions, noise channels and randomly placed
//! sensor networks.

use std::collections::BTreeSet;

use rand::Rng;

use crate::mrf::{GridIndex, TargetField};
use crate::rng;
use crate::{Error, Result};

/// Widest footprint for which per-pattern tables are materialized.
pub const MAX_TABLE_WIDTH: usize = 16;

/// Lattice offsets `(dr, dc)` with `dr^2 + dc^2 <= c^2`, sorted
/// lexicographically. A footprint pattern lists the covered bits in this
/// order, first offset as the most significant bit of its index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coverage {
    c: u32,
    offsets: Vec<(i64, i64)>,
}

impl Coverage {
    pub fn new(c: u32) -> Self {
        let r = c as i64;
        let mut offsets = Vec::new();
        for dr in -r..=r {
            for dc in -r..=r {
                if dr * dr + dc * dc <= r * r {
                    offsets.push((dr, dc));
                }
            }
        }
        Coverage { c, offsets }
    }

    pub fn range(&self) -> u32 {
        self.c
    }

    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    /// `|S_c|`.
    pub fn size(&self) -> usize {
        self.offsets.len()
    }

    /// Number of distinct footprint patterns, `2^|S_c|`.
    pub fn patterns(&self) -> Result<usize> {
        if self.size() > MAX_TABLE_WIDTH {
            return Err(Error::Unsupported(format!(
                "pattern tables for range {} ({} cells)",
                self.c,
                self.size()
            )));
        }
        Ok(1 << self.size())
    }

    pub fn position_of(&self, offset: (i64, i64)) -> Option<usize> {
        self.offsets.iter().position(|&o| o == offset)
    }

    pub fn center_position(&self) -> usize {
        self.position_of((0, 0)).expect("every footprint contains its center")
    }

    /// Center bit of a footprint pattern index.
    pub fn center_bit(&self, pattern: usize) -> u8 {
        self.bit(pattern, self.center_position())
    }

    /// Bit at footprint position `pos` of a pattern index.
    pub fn bit(&self, pattern: usize, pos: usize) -> u8 {
        ((pattern >> (self.size() - 1 - pos)) & 1) as u8
    }

    pub fn check_side(&self, k: usize) -> Result<()> {
        if k < 3 || k < 2 * self.c as usize + 1 {
            return Err(Error::CoverageOverlap { c: self.c, k });
        }
        Ok(())
    }

    /// Cells covered by a sensor at `h`, in offset order.
    pub fn cells(&self, h: GridIndex, k: usize) -> Result<Vec<GridIndex>> {
        self.check_side(k)?;
        Ok(self.cells_unchecked(h, k))
    }

    pub(crate) fn cells_unchecked(&self, h: GridIndex, k: usize) -> Vec<GridIndex> {
        self.offsets.iter().map(|&(dr, dc)| h.offset(dr, dc, k)).collect()
    }

    /// Pattern index of the footprint at `h`.
    pub fn pattern_at(&self, field: &TargetField, h: GridIndex) -> usize {
        let k = field.k();
        self.offsets
            .iter()
            .fold(0usize, |acc, &(dr, dc)| (acc << 1) | field.get(h.offset(dr, dc, k)) as usize)
    }
}

/// `S_{c,h}`: the cells within Euclidean distance `c` of `h`.
pub fn coverage(c: u32, h: GridIndex, k: usize) -> Result<Vec<GridIndex>> {
    Coverage::new(c).cells(h, k)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsiKind {
    /// The single covered bit; range 0 only.
    Identity,
    /// Number of targets in the footprint.
    Count,
    /// Sum of covered bits weighted per footprint position.
    WeightedSum(Vec<i64>),
    /// Explicit output per footprint pattern index.
    LookupTable(Vec<i64>),
}

/// A sensing function over footprints of a fixed width. Outputs are symbol
/// indices into an ordered alphabet of integer labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingFunction {
    kind: PsiKind,
    width: usize,
    alphabet: Vec<i64>,
}

impl SensingFunction {
    pub fn new(kind: PsiKind, coverage: &Coverage) -> Result<Self> {
        let width = coverage.size();
        let alphabet: Vec<i64> = match &kind {
            PsiKind::Identity => {
                if width != 1 {
                    return Err(Error::InvalidSensingFunction(
                        "identity is only defined for range 0; use a lookup table".into(),
                    ));
                }
                vec![0, 1]
            }
            PsiKind::Count => (0..=width as i64).collect(),
            PsiKind::WeightedSum(w) => {
                if w.len() != width {
                    return Err(Error::InvalidSensingFunction(format!(
                        "{} weights for a footprint of {width} cells",
                        w.len()
                    )));
                }
                let mut sums = BTreeSet::from([0i64]);
                for &wi in w {
                    let shifted: Vec<i64> = sums.iter().map(|s| s + wi).collect();
                    sums.extend(shifted);
                }
                sums.into_iter().collect()
            }
            PsiKind::LookupTable(t) => {
                if width > MAX_TABLE_WIDTH || t.len() != 1 << width {
                    return Err(Error::InvalidSensingFunction(format!(
                        "lookup table has {} entries, footprint has {} patterns",
                        t.len(),
                        1u64 << width.min(63)
                    )));
                }
                t.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
            }
        };
        Ok(SensingFunction { kind, width, alphabet })
    }

    pub fn identity() -> Self {
        SensingFunction::new(PsiKind::Identity, &Coverage::new(0)).expect("range 0")
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Ordered output labels `X`.
    pub fn alphabet(&self) -> &[i64] {
        &self.alphabet
    }

    pub fn output_size(&self) -> usize {
        self.alphabet.len()
    }

    fn label_bits(&self, pattern: &[u8]) -> i64 {
        match &self.kind {
            PsiKind::Identity => pattern[0] as i64,
            PsiKind::Count => pattern.iter().map(|&b| b as i64).sum(),
            PsiKind::WeightedSum(w) => pattern.iter().zip(w).map(|(&b, &wi)| b as i64 * wi).sum(),
            PsiKind::LookupTable(t) => t[pattern_index(pattern)],
        }
    }

    fn symbol(&self, label: i64) -> usize {
        self.alphabet.binary_search(&label).expect("label in alphabet")
    }

    /// Output label for a footprint given bit by bit in offset order.
    pub fn eval(&self, pattern: &[u8]) -> Result<i64> {
        if pattern.len() != self.width {
            return Err(Error::PatternSize { expected: self.width, got: pattern.len() });
        }
        Ok(self.label_bits(pattern))
    }

    /// Output symbol index for a footprint given bit by bit.
    pub fn sense(&self, pattern: &[u8]) -> Result<usize> {
        self.eval(pattern).map(|l| self.symbol(l))
    }

    /// Output symbol index for a footprint pattern index.
    pub fn sense_index(&self, pattern: usize) -> usize {
        let label = match &self.kind {
            PsiKind::LookupTable(t) => t[pattern],
            _ => {
                let bits: Vec<u8> = (0..self.width)
                    .map(|i| ((pattern >> (self.width - 1 - i)) & 1) as u8)
                    .collect();
                self.label_bits(&bits)
            }
        };
        self.symbol(label)
    }

    /// Output symbol for every pattern index `0..2^width`.
    pub fn table(&self) -> Result<Vec<usize>> {
        if self.width > MAX_TABLE_WIDTH {
            return Err(Error::Unsupported(format!("tables over {} cells", self.width)));
        }
        Ok((0..1usize << self.width).map(|w| self.sense_index(w)).collect())
    }
}

fn pattern_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Row-stochastic `P_{Y|X}(y|x) = matrix[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    rows: Vec<Vec<f64>>,
}

impl NoiseChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidChannel("empty input alphabet".into()));
        };
        let ny = first.len();
        if ny == 0 {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::InvalidChannel(format!("row {x} has {} entries", row.len())));
            }
            if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidChannel(format!("row {x} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChannel(format!("row {x} sums to {s}")));
            }
        }
        Ok(NoiseChannel { rows })
    }

    /// Binary symmetric channel with crossover probability `q`.
    pub fn bsc(q: f64) -> Result<Self> {
        Self::symmetric(2, q)
    }

    /// `m`-ary symmetric channel: the input survives with probability
    /// `1 - q`, otherwise one of the other `m - 1` symbols is drawn uniformly.
    pub fn symmetric(m: usize, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidChannel(format!("flip probability {q}")));
        }
        if m < 2 {
            return Err(Error::InvalidChannel("symmetric channel needs two symbols".into()));
        }
        let off = q / (m - 1) as f64;
        Self::new(
            (0..m)
                .map(|x| (0..m).map(|y| if x == y { 1.0 - q } else { off }).collect())
                .collect(),
        )
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(
            (0..m)
                .map(|x| (0..m).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// True when all rows coincide, i.e. the output carries no information
    /// about the input.
    pub fn is_uninformative(&self) -> bool {
        self.rows.iter().all(|r| r == &self.rows[0])
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let row = &self.rows[x];
        let mut acc = 0.0;
        for (y, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
    }

    /// `log2 prod_l P(y_l | x_l)`.
    pub fn log2_likelihood(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&xi, &yi)| self.rows[xi][yi].log2()).sum()
    }
}

/// `S(k^2, n, c)`: sensor placements plus the shared sensing function and
/// noise channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorNetwork {
    k: usize,
    coverage: Coverage,
    placements: Vec<GridIndex>,
    psi: SensingFunction,
    channel: NoiseChannel,
}

impl SensorNetwork {
    pub fn new(
        k: usize,
        c: u32,
        placements: Vec<GridIndex>,
        psi: SensingFunction,
        channel: NoiseChannel,
    ) -> Result<Self> {
        let coverage = Coverage::new(c);
        coverage.check_side(k)?;
        if psi.width() != coverage.size() {
            return Err(Error::PatternSize { expected: coverage.size(), got: psi.width() });
        }
        if channel.input_size() != psi.output_size() {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} inputs, sensing function has {} outputs",
                channel.input_size(),
                psi.output_size()
            )));
        }
        if let Some(p) = placements.iter().find(|p| p.row >= k || p.col >= k) {
            return Err(Error::InvalidArgument(format!("placement {p:?} outside grid")));
        }
        Ok(SensorNetwork { k, coverage, placements, psi, channel })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.placements.len()
    }

    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    pub fn placements(&self) -> &[GridIndex] {
        &self.placements
    }

    pub fn psi(&self) -> &SensingFunction {
        &self.psi
    }

    pub fn channel(&self) -> &NoiseChannel {
        &self.channel
    }

    pub fn shifted(&self, dr: i64, dc: i64) -> SensorNetwork {
        SensorNetwork {
            placements: self.placements.iter().map(|p| p.offset(dr, dc, self.k)).collect(),
            ..self.clone()
        }
    }

    /// Linear cell indices covered by each sensor.
    pub fn footprints(&self) -> Vec<Vec<usize>> {
        self.placements
            .iter()
            .map(|&h| {
                self.coverage
                    .cells_unchecked(h, self.k)
                    .into_iter()
                    .map(|g| g.linear(self.k))
                    .collect()
            })
            .collect()
    }
}

/// Places `n` sensors independently and uniformly over the `k^2` cells.
pub fn generate_network(
    k: usize,
    n: usize,
    c: u32,
    psi: SensingFunction,
    channel: NoiseChannel,
    seed: u64,
) -> Result<SensorNetwork> {
    let mut rng = rng::stream(seed, 1);
    generate_network_with(k, n, c, psi, channel, &mut rng)
}

pub fn generate_network_with<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    c: u32,
    psi: SensingFunction,
    channel: NoiseChannel,
    rng: &mut R,
) -> Result<SensorNetwork> {
    Coverage::new(c).check_side(k)?;
    let placements = (0..n)
        .map(|_| GridIndex::from_linear(rng.gen_range(0..k * k), k))
        .collect();
    SensorNetwork::new(k, c, placements, psi, channel)
}

/// Noise-free sensor outputs (symbol indices).
pub fn ideal_output(network: &SensorNetwork, field: &TargetField) -> Result<Vec<usize>> {
    if field.k() != network.k {
        return Err(Error::DimensionMismatch(format!(
            "field side {} vs network side {}",
            field.k(),
            network.k
        )));
    }
    Ok(network
        .placements
        .iter()
        .map(|&h| network.psi.sense_index(network.coverage.pattern_at(field, h)))
        .collect())
}

/// Independent channel noise applied per sensor.
pub fn noisy_output(x: &[usize], channel: &NoiseChannel, seed: u64) -> Result<Vec<usize>> {
    noisy_output_with(x, channel, &mut rng::stream(seed, 2))
}

pub fn noisy_output_with<R: Rng + ?Sized>(
    x: &[usize],
    channel: &NoiseChannel,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if let Some(&bad) = x.iter().find(|&&xi| xi >= channel.input_size()) {
        return Err(Error::DimensionMismatch(format!("output symbol {bad} outside channel input")));
    }
    Ok(x.iter().map(|&xi| channel.sample(xi, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coverage_sizes() {
        assert_eq!(Coverage::new(0).size(), 1);
        assert_eq!(Coverage::new(1).size(), 5);
        assert_eq!(Coverage::new(2).size(), 13);
        assert_eq!(
            Coverage::new(1).offsets(),
            &[(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]
        );
    }

    #[test]
    fn coverage_cells() {
        let h = GridIndex::new(1, 1);
        assert_eq!(coverage(0, h, 3).unwrap(), vec![h]);
        let cross = coverage(1, GridIndex::new(0, 0), 3).unwrap();
        assert_eq!(
            cross,
            vec![
                GridIndex::new(2, 0),
                GridIndex::new(0, 2),
                GridIndex::new(0, 0),
                GridIndex::new(0, 1),
                GridIndex::new(1, 0)
            ]
        );
        assert_eq!(coverage(2, h, 5).unwrap().len(), 13);
        assert_eq!(coverage(2, h, 4), Err(Error::CoverageOverlap { c: 2, k: 4 }));
    }

    #[test]
    fn sensing_function_examples() {
        assert_eq!(SensingFunction::identity().eval(&[1]).unwrap(), 1);
        let cov1 = Coverage::new(1);
        let count = SensingFunction::new(PsiKind::Count, &cov1).unwrap();
        assert_eq!(count.eval(&[1, 1, 1, 1, 1]).unwrap(), 5);
        assert_eq!(count.sense(&[1, 1, 1, 1, 1]).unwrap(), 5);
        let ws = SensingFunction::new(PsiKind::WeightedSum(vec![1, 2, 3, 4, 5]), &cov1).unwrap();
        assert_eq!(ws.eval(&[1, 0, 0, 0, 1]).unwrap(), 6);
        assert_eq!(ws.alphabet().len(), 16);
        assert_eq!(
            count.eval(&[1, 1]),
            Err(Error::PatternSize { expected: 5, got: 2 })
        );
        assert!(SensingFunction::new(PsiKind::Identity, &cov1).is_err());
        assert!(SensingFunction::new(PsiKind::LookupTable(vec![0; 31]), &cov1).is_err());
    }

    #[test]
    fn sense_index_matches_bitwise_evaluation() {
        let cov = Coverage::new(1);
        let ws = SensingFunction::new(PsiKind::WeightedSum(vec![3, -1, 2, 0, 7]), &cov).unwrap();
        for w in 0..32usize {
            let bits: Vec<u8> = (0..5).map(|i| cov.bit(w, i)).collect();
            assert_eq!(ws.sense_index(w), ws.sense(&bits).unwrap());
        }
    }

    #[test]
    fn channel_validation() {
        assert!(NoiseChannel::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(NoiseChannel::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(NoiseChannel::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(NoiseChannel::bsc(0.5).unwrap().is_uninformative());
        assert!(!NoiseChannel::bsc(0.1).unwrap().is_uninformative());
        let s = NoiseChannel::symmetric(4, 0.3).unwrap();
        assert!((s.prob(0, 3) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn network_generation() {
        let psi = SensingFunction::identity();
        let ch = NoiseChannel::bsc(0.1).unwrap();
        let empty = generate_network(4, 0, 0, psi.clone(), ch.clone(), 1).unwrap();
        assert!(empty.placements().is_empty());
        let a = generate_network(5, 20, 0, psi.clone(), ch.clone(), 7).unwrap();
        let b = generate_network(5, 20, 0, psi.clone(), ch.clone(), 7).unwrap();
        assert_eq!(a, b);
        assert!(generate_network(4, 3, 2, psi, ch, 1).is_err());
    }

    #[test]
    fn placement_frequencies_are_uniform() {
        let n = 100_000;
        let net = generate_network(
            8,
            n,
            0,
            SensingFunction::identity(),
            NoiseChannel::bsc(0.1).unwrap(),
            11,
        )
        .unwrap();
        let mut counts = [0usize; 64];
        for p in net.placements() {
            counts[p.linear(8)] += 1;
        }
        let p = 1.0 / 64.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        // 3 standard errors per cell, with a Bonferroni-free allowance of a
        // couple of cells outside the band.
        let outside = counts
            .iter()
            .filter(|&&c| (c as f64 / n as f64 - p).abs() > 3.0 * se)
            .count();
        assert!(outside <= 2, "{outside} cells outside 3 se");
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let e = n as f64 * p;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // chi-square with 63 dof: 99.9% quantile is about 103.4
        assert!(chi2 < 103.4, "chi2 {chi2}");
    }

    #[test]
    fn ideal_output_examples() {
        let cov1 = Coverage::new(1);
        let count = SensingFunction::new(PsiKind::Count, &cov1).unwrap();
        let net = generate_network(5, 30, 1, count, NoiseChannel::symmetric(6, 0.1).unwrap(), 3)
            .unwrap();
        let zero = TargetField::zeros(5).unwrap();
        assert!(ideal_output(&net, &zero).unwrap().iter().all(|&x| x == 0));
        assert!(ideal_output(&net, &TargetField::zeros(4).unwrap()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = TargetField::random_uniform(6, &mut rng).unwrap();
        let idn = generate_network(
            6,
            25,
            0,
            SensingFunction::identity(),
            NoiseChannel::bsc(0.2).unwrap(),
            9,
        )
        .unwrap();
        let x = ideal_output(&idn, &f).unwrap();
        for (xi, p) in x.iter().zip(idn.placements()) {
            assert_eq!(*xi, f.get(*p) as usize);
        }
    }

    #[test]
    fn locality_of_ideal_output() {
        let cov1 = Coverage::new(1);
        let count = SensingFunction::new(PsiKind::Count, &cov1).unwrap();
        let net = SensorNetwork::new(
            7,
            1,
            vec![GridIndex::new(1, 1), GridIndex::new(2, 2)],
            count,
            NoiseChannel::symmetric(6, 0.1).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = TargetField::random_uniform(7, &mut rng).unwrap();
        let mut g = f.clone();
        g.flip(GridIndex::new(5, 5));
        assert_eq!(ideal_output(&net, &f).unwrap(), ideal_output(&net, &g).unwrap());
        g.flip(GridIndex::new(1, 2));
        assert_ne!(ideal_output(&net, &f).unwrap(), ideal_output(&net, &g).unwrap());
    }

    #[test]
    fn shift_equivariance() {
        let cov1 = Coverage::new(1);
        let ws = SensingFunction::new(PsiKind::WeightedSum(vec![1, 2, 3, 4, 5]), &cov1).unwrap();
        let ch = NoiseChannel::symmetric(ws.output_size(), 0.2).unwrap();
        let net = generate_network(6, 40, 1, ws, ch, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = TargetField::random_uniform(6, &mut rng).unwrap();
        for (dr, dc) in [(1, 2), (-3, 5)] {
            assert_eq!(
                ideal_output(&net.shifted(dr, dc), &f.shifted(dr, dc)).unwrap(),
                ideal_output(&net, &f).unwrap()
            );
        }
    }

    #[test]
    fn noisy_output_examples() {
        let x: Vec<usize> = (0..100_000).map(|i| i % 2).collect();
        let y = noisy_output(&x, &NoiseChannel::identity(2).unwrap(), 3).unwrap();
        assert_eq!(x, y);

        let bsc = NoiseChannel::bsc(0.1).unwrap();
        let y = noisy_output(&x, &bsc, 4).unwrap();
        let flips = x.iter().zip(&y).filter(|(a, b)| a != b).count() as f64 / x.len() as f64;
        let se = (0.1 * 0.9 / x.len() as f64).sqrt();
        assert!((flips - 0.1).abs() < 3.0 * se, "flip rate {flips}");
        assert_eq!(y, noisy_output(&x, &bsc, 4).unwrap());
        assert!(bsc.log2_likelihood(&x, &y).is_finite());

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let xr: Vec<usize> = (0..100_000).map(|_| rng.gen_range(0..2)).collect();
        let yr = noisy_output(&xr, &NoiseChannel::bsc(0.5).unwrap(), 5).unwrap();
        let n = xr.len() as f64;
        let mx = xr.iter().sum::<usize>() as f64 / n;
        let my = yr.iter().sum::<usize>() as f64 / n;
        let cov = xr.iter().zip(&yr).map(|(&a, &b)| (a as f64 - mx) * (b as f64 - my)).sum::<f64>() / n;
        let corr = cov / (mx * (1.0 - mx) * my * (1.0 - my)).sqrt();
        assert!(corr.abs() < 3.0 / n.sqrt(), "corr {corr}");

        assert!(noisy_output(&[2], &bsc, 1).is_err());
    }
}
