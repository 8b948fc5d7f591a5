//! Monte Carlo estimation of the decoding error probability.
//!
//! A trial draws a field from the MRF, a random sensor network, and channel
//! noise, decodes, and succeeds when the reconstruction lies within the
//! tolerated distortion. Each trial owns a seed derived from the
//! configuration seed and its index, so parallel runs reproduce sequential
//! ones exactly.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::mrf::{self, ExactDistribution, GibbsSampler, GridIndex, MrfModel, TargetField, MAX_ENUM_SIDE};
use crate::rng;
use crate::sensing::{self, NoiseChannel, SensingFunction, SensorNetwork};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Number of cells where the two fields differ.
pub fn hamming_count(a: &TargetField, b: &TargetField) -> Result<usize> {
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch(format!("field sides {} and {}", a.k(), b.k())));
    }
    Ok(a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count())
}

/// `D_H(a, b) / k^2`.
pub fn hamming_distortion(a: &TargetField, b: &TargetField) -> Result<f64> {
    Ok(hamming_count(a, b)? as f64 / (a.k() * a.k()) as f64)
}

/// Whether a reconstruction with `count` wrong cells out of `cells` is
/// inside the tolerated region `distortion < d`. For `d = 0` exact recovery
/// is required.
pub fn within_distortion(count: usize, cells: usize, d: f64) -> bool {
    if d <= 0.0 {
        return count == 0;
    }
    (count as f64) < d * cells as f64 - 1e-9
}

/// Per-sensor `log2 P(y | symbol)` rows.
fn likelihood_table(y: &[usize], channel: &NoiseChannel) -> Vec<Vec<f64>> {
    y.iter()
        .map(|&yi| (0..channel.input_size()).map(|x| channel.prob(x, yi).log2()).collect())
        .collect()
}

fn check_observation(y: &[usize], network: &SensorNetwork) -> Result<()> {
    if y.len() != network.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for {} sensors",
            y.len(),
            network.n()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&v| v >= network.channel().output_size()) {
        return Err(Error::DimensionMismatch(format!("observation {bad} outside channel output")));
    }
    Ok(())
}

/// `log2 P(y | x(f)) + log2 P_F(f) + log2 Z`: the posterior score up to a
/// constant.
pub fn posterior_score(
    field: &TargetField,
    y: &[usize],
    network: &SensorNetwork,
    model: &MrfModel,
) -> Result<f64> {
    check_observation(y, network)?;
    let x = sensing::ideal_output(network, field)?;
    Ok(network.channel().log2_likelihood(&x, y) + mrf::log_prob_unnorm(field, model))
}

/// Exhaustive MAP decoding with the prior scores of every field cached.
#[derive(Debug, Clone)]
pub struct MapDecoder {
    k: usize,
    prior: Vec<f64>,
}

impl MapDecoder {
    pub fn new(model: &MrfModel, k: usize) -> Result<Self> {
        Ok(MapDecoder { k, prior: mrf::enumerate_log_scores(model, k)? })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Field maximizing the posterior; ties go to the lowest canonical index.
    pub fn decode(&self, y: &[usize], network: &SensorNetwork) -> Result<TargetField> {
        if network.k() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "decoder side {} vs network side {}",
                self.k,
                network.k()
            )));
        }
        check_observation(y, network)?;
        let cells = self.k * self.k;
        let table = network.psi().table()?;
        let ll = likelihood_table(y, network.channel());
        let shifts: Vec<Vec<u32>> = network
            .footprints()
            .into_iter()
            .map(|fp| fp.into_iter().map(|c| (cells - 1 - c) as u32).collect())
            .collect();
        let mut best = (f64::NEG_INFINITY, 0u64);
        for (idx, &prior) in self.prior.iter().enumerate() {
            if prior == f64::NEG_INFINITY {
                continue;
            }
            let idx = idx as u64;
            let mut score = prior;
            for (sh, row) in shifts.iter().zip(&ll) {
                let pattern = sh.iter().fold(0usize, |acc, &s| (acc << 1) | ((idx >> s) & 1) as usize);
                score += row[table[pattern]];
            }
            if score > best.0 {
                best = (score, idx);
            }
        }
        TargetField::from_index(self.k, best.1)
    }
}

/// Exhaustive MAP decoding (`k <= 4`).
pub fn map_decode(y: &[usize], network: &SensorNetwork, model: &MrfModel) -> Result<TargetField> {
    MapDecoder::new(model, network.k())?.decode(y, network)
}

/// Iterated conditional modes: repeatedly set each cell to the value with
/// the higher posterior score given the rest, until a sweep changes
/// nothing or `sweeps` is reached. A local maximum, not MAP.
pub fn icm_decode_from(
    y: &[usize],
    network: &SensorNetwork,
    model: &MrfModel,
    init: TargetField,
    sweeps: usize,
    order: Option<&mut dyn rand::RngCore>,
) -> Result<TargetField> {
    check_observation(y, network)?;
    let k = network.k();
    if init.k() != k {
        return Err(Error::DimensionMismatch(format!("init side {} vs network side {k}", init.k())));
    }
    let cells = k * k;
    let footprints = network.footprints();
    let mut covering = vec![Vec::new(); cells];
    for (s, fp) in footprints.iter().enumerate() {
        for &c in fp {
            if !covering[c].contains(&s) {
                covering[c].push(s);
            }
        }
    }
    let table = network.psi().table()?;
    let ll = likelihood_table(y, network.channel());
    let sensor_ll = |field: &TargetField, s: usize| {
        let bits = field.bits();
        let pattern = footprints[s].iter().fold(0usize, |acc, &c| (acc << 1) | bits[c] as usize);
        ll[s][table[pattern]]
    };
    let mut field = init;
    let mut sites: Vec<usize> = (0..cells).collect();
    let mut order = order;
    for _ in 0..sweeps {
        if let Some(r) = order.as_deref_mut() {
            sites.shuffle(r);
        }
        let mut changed = false;
        for &i in &sites {
            let h = GridIndex::from_linear(i, k);
            let cur = field.get(h);
            let score_with = |f: &mut TargetField, v: u8| {
                f.set(h, v);
                let local: f64 = covering[i].iter().map(|&s| sensor_ll(f, s)).sum();
                local + model.site_log2_factor(f, h, v)
            };
            let keep = score_with(&mut field, cur);
            let flip = score_with(&mut field, 1 - cur);
            if flip > keep {
                changed = true;
            } else {
                field.set(h, cur);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(field)
}

/// ICM from the all-zero, all-one and a seeded random field, in seeded
/// random site order; returns the best local maximum found.
pub fn icm_decode(
    y: &[usize],
    network: &SensorNetwork,
    model: &MrfModel,
    sweeps: usize,
    seed: u64,
) -> Result<TargetField> {
    let k = network.k();
    let mut r = rng::stream(seed, 3);
    let starts = [
        TargetField::zeros(k)?,
        TargetField::ones(k)?,
        TargetField::random_uniform(k, &mut r)?,
    ];
    let mut best: Option<(f64, TargetField)> = None;
    for init in starts {
        let f = icm_decode_from(y, network, model, init, sweeps, Some(&mut r))?;
        let s = posterior_score(&f, y, network, model)?;
        if best.as_ref().map_or(true, |b| s > b.0) {
            best = Some((s, f));
        }
    }
    Ok(best.expect("three starts").1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    /// Enumerates all `2^(k^2)` fields (`k <= 4`).
    ExhaustiveMap,
    /// Heuristic local search for larger grids.
    Icm { sweeps: usize },
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub model: MrfModel,
    pub k: usize,
    pub n: usize,
    pub c: u32,
    pub psi: SensingFunction,
    pub channel: NoiseChannel,
    pub distortion: f64,
    pub trials: usize,
    pub seed: u64,
    pub decoder: Decoder,
    /// Burn-in sweeps of the Gibbs sampler used when `k > 4`.
    pub gibbs_sweeps: usize,
    /// Reuse one network for every trial instead of drawing a fresh one.
    pub network: Option<SensorNetwork>,
}

impl TrialConfig {
    /// Exhaustive MAP for `k <= 4`, ICM otherwise; 100 Gibbs sweeps.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: MrfModel,
        k: usize,
        n: usize,
        c: u32,
        psi: SensingFunction,
        channel: NoiseChannel,
        distortion: f64,
        trials: usize,
        seed: u64,
    ) -> Self {
        let decoder = if k <= MAX_ENUM_SIDE { Decoder::ExhaustiveMap } else { Decoder::Icm { sweeps: 50 } };
        TrialConfig {
            model,
            k,
            n,
            c,
            psi,
            channel,
            distortion,
            trials,
            seed,
            decoder,
            gibbs_sweeps: 100,
            network: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        mrf::check_side(self.k)?;
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.distortion) {
            return Err(Error::InvalidArgument(format!("distortion {} outside [0, 1]", self.distortion)));
        }
        if self.decoder == Decoder::ExhaustiveMap && self.k > MAX_ENUM_SIDE {
            return Err(Error::EnumerationTooLarge { cells: self.k * self.k });
        }
        if let Some(net) = &self.network {
            if net.k() != self.k || net.n() != self.n {
                return Err(Error::DimensionMismatch(format!(
                    "fixed network is {}x{} with {} sensors, config says k={} n={}",
                    net.k(),
                    net.k(),
                    net.n(),
                    self.k,
                    self.n
                )));
            }
        }
        // Surface coverage, width and channel mismatches before any trial.
        SensorNetwork::new(self.k, self.c, Vec::new(), self.psi.clone(), self.channel.clone())?;
        Ok(())
    }
}

/// Per-configuration state shared by all trials.
struct Simulation<'a> {
    config: &'a TrialConfig,
    exact: Option<ExactDistribution>,
    map: Option<MapDecoder>,
}

impl<'a> Simulation<'a> {
    fn new(config: &'a TrialConfig) -> Result<Self> {
        config.validate()?;
        let exact = if config.k <= MAX_ENUM_SIDE {
            Some(mrf::exact_distribution(&config.model, config.k)?)
        } else {
            None
        };
        let map = match config.decoder {
            Decoder::ExhaustiveMap => Some(MapDecoder::new(&config.model, config.k)?),
            Decoder::Icm { .. } => None,
        };
        Ok(Simulation { config, exact, map })
    }

    fn run(&self, index: u64) -> Result<bool> {
        let cfg = self.config;
        let seed = rng::derive(cfg.seed, index);
        let field = match &self.exact {
            Some(d) => d.sample(&mut rng::stream(seed, 0)),
            None => GibbsSampler::new(&cfg.model, cfg.k, cfg.gibbs_sweeps)?
                .sample(&mut rng::stream(seed, 0)),
        };
        let network = match &cfg.network {
            Some(net) => net.clone(),
            None => sensing::generate_network(
                cfg.k,
                cfg.n,
                cfg.c,
                cfg.psi.clone(),
                cfg.channel.clone(),
                seed,
            )?,
        };
        let x = sensing::ideal_output(&network, &field)?;
        let y = sensing::noisy_output(&x, &cfg.channel, seed)?;
        let decoded = match (&self.map, cfg.decoder) {
            (Some(map), _) => map.decode(&y, &network)?,
            (None, Decoder::Icm { sweeps }) => icm_decode(&y, &network, &cfg.model, sweeps, seed)?,
            (None, Decoder::ExhaustiveMap) => unreachable!("validated"),
        };
        let count = hamming_count(&field, &decoded)?;
        Ok(within_distortion(count, cfg.k * cfg.k, cfg.distortion))
    }
}

/// Whether trial `index` of `config` decodes within the distortion.
pub fn run_trial(config: &TrialConfig, index: u64) -> Result<bool> {
    Simulation::new(config)?.run(index)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub p_e_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
    pub failures: usize,
}

/// Wilson score interval at 95% for `failures` out of `trials`.
pub fn wilson_interval(failures: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

pub fn estimate_pe(config: &TrialConfig) -> Result<ErrorEstimate> {
    let sim = Simulation::new(config)?;
    let outcomes: Vec<bool> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| sim.run(i))
        .collect::<Result<_>>()?;
    let failures = outcomes.iter().filter(|&&ok| !ok).count();
    let (ci_lo, ci_hi) = wilson_interval(failures, config.trials);
    Ok(ErrorEstimate {
        p_e_hat: failures as f64 / config.trials as f64,
        ci_lo,
        ci_hi,
        trials: config.trials,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    /// `k^2 / n`.
    pub rate: f64,
    pub estimate: ErrorEstimate,
}

/// One [`estimate_pe`] per sensor count, all with the same seed.
pub fn rate_sweep(config: &TrialConfig, n_list: &[usize]) -> Result<Vec<SweepRow>> {
    if config.network.is_some() {
        return Err(Error::InvalidArgument("a rate sweep draws its own networks".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidArgument("sensor counts must be at least 1".into()));
            }
            let cfg = TrialConfig { n, ..config.clone() };
            Ok(SweepRow {
                n,
                rate: (config.k * config.k) as f64 / n as f64,
                estimate: estimate_pe(&cfg)?,
            })
        })
        .collect()
}
