//! JSON run configuration.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use senscap_core::capacity::{CapacityQuery, OptimizerOptions};
use senscap_core::montecarlo::TrialConfig;
use senscap_core::mrf::MrfModel;
use senscap_core::sensing::{Coverage, NoiseChannel, PsiKind, SensingFunction};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub p: Option<f64>,
    pub p_node: Option<[f64; 2]>,
    pub p_edge: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    pub kind: String,
    pub weights: Option<Vec<i64>>,
    pub table: Option<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: String,
    pub q: Option<f64>,
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub theta_tol: Option<f64>,
    pub inner_tol: Option<f64>,
    pub eps_dist: Option<f64>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: ModelSpec,
    pub c: u32,
    pub psi: PsiSpec,
    pub channel: ChannelSpec,
    #[serde(rename = "D")]
    pub distortions: Vec<f64>,
    pub k: Option<usize>,
    pub n: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
}

/// A parsed configuration with every core object constructed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: MrfModel,
    pub c: u32,
    pub psi: SensingFunction,
    pub channel: NoiseChannel,
    pub distortions: Vec<f64>,
    pub k: Option<usize>,
    pub n: Vec<usize>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub options: OptimizerOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).context("parsing config")?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let model = match (raw.model.p, raw.model.p_node, raw.model.p_edge) {
            (Some(p), None, None) => MrfModel::symmetric(p)?,
            (None, Some(node), Some(edge)) => MrfModel::new(node, edge)?,
            _ => bail!("model needs either p or both p_node and p_edge"),
        };
        let cov = Coverage::new(raw.c);
        let psi = match (raw.psi.kind.as_str(), raw.psi.weights, raw.psi.table) {
            ("identity", None, None) => {
                if raw.c != 0 {
                    bail!("identity sensing needs c = 0");
                }
                SensingFunction::identity()
            }
            ("count", None, None) => SensingFunction::new(PsiKind::Count, &cov)?,
            ("weighted_sum", Some(w), None) => SensingFunction::new(PsiKind::WeightedSum(w), &cov)?,
            ("lookup", None, Some(t)) => SensingFunction::new(PsiKind::LookupTable(t), &cov)?,
            (kind @ ("identity" | "count" | "weighted_sum" | "lookup"), _, _) => {
                bail!("psi kind {kind:?} given the wrong parameters")
            }
            (kind, _, _) => bail!("unknown psi kind {kind:?}"),
        };
        let m = psi.output_size();
        let channel = match (raw.channel.kind.as_str(), raw.channel.q, raw.channel.matrix) {
            ("bsc", Some(q), None) => NoiseChannel::symmetric(m, q)?,
            ("identity", None, None) => NoiseChannel::identity(m)?,
            ("matrix", None, Some(rows)) => NoiseChannel::new(rows)?,
            (kind @ ("bsc" | "identity" | "matrix"), _, _) => {
                bail!("channel kind {kind:?} given the wrong parameters")
            }
            (kind, _, _) => bail!("unknown channel kind {kind:?}"),
        };
        if channel.input_size() != m {
            bail!("channel has {} inputs, sensing function has {m} outputs", channel.input_size());
        }
        if raw.distortions.is_empty() {
            bail!("D must list at least one distortion");
        }
        if let Some(d) = raw.distortions.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            bail!("distortion {d} outside [0, 1]");
        }
        let seed = raw.seed.unwrap_or(0);
        let defaults = OptimizerOptions::default();
        let options = OptimizerOptions {
            theta_tol: raw.optimizer.theta_tol.unwrap_or(defaults.theta_tol),
            inner_tol: raw.optimizer.inner_tol.unwrap_or(defaults.inner_tol),
            eps_dist: raw.optimizer.eps_dist.unwrap_or(defaults.eps_dist),
            restarts: raw.optimizer.restarts.unwrap_or(defaults.restarts),
            seed,
            ..defaults
        };
        options.validate()?;
        Ok(RunConfig {
            model,
            c: raw.c,
            psi,
            channel,
            distortions: raw.distortions,
            k: raw.k,
            n: raw.n.unwrap_or_default(),
            trials: raw.trials,
            seed,
            options,
        })
    }

    /// One query per distortion, each checked for feasibility.
    pub fn queries(&self) -> Result<Vec<CapacityQuery>> {
        if self.c > 1 {
            bail!("bounds are available for c = 0 and c = 1 only");
        }
        self.distortions
            .iter()
            .map(|&d| {
                let q = CapacityQuery::new(self.model.clone(), self.c, self.psi.clone(), self.channel.clone(), d)
                    .with_options(self.options.clone());
                q.full_problem().with_context(|| format!("D = {d}"))?;
                Ok(q)
            })
            .collect()
    }

    /// The base trial configuration for a rate sweep over `n`.
    pub fn trial_config(&self) -> Result<TrialConfig> {
        let k = self.k.ok_or_else(|| anyhow!("simulate needs k"))?;
        let trials = self.trials.ok_or_else(|| anyhow!("simulate needs trials"))?;
        if self.n.is_empty() {
            bail!("simulate needs a nonempty n list");
        }
        if let Some(n) = self.n.iter().find(|&&n| n == 0) {
            bail!("sensor count {n} must be at least 1");
        }
        let [d] = self.distortions[..] else {
            bail!("simulate takes exactly one distortion in D");
        };
        let cfg = TrialConfig::new(
            self.model.clone(),
            k,
            self.n[0],
            self.c,
            self.psi.clone(),
            self.channel.clone(),
            d,
            trials,
            self.seed,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}
