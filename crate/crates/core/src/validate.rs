//! Invariant suites run by `senscap validate`.
//!
//! Each check reports pass/fail and the largest deviation it observed. The
//! field-probability bound is reported as a warning when violated, never as
//! a failure.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::capacity;
use crate::mrf::{self, MrfModel, TargetField};
use crate::rng;
use crate::sensing::{Coverage, NoiseChannel, PsiKind, SensingFunction};
use crate::types::{self, JointType, PatternSpace};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level {other:?} (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub max_deviation: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, max_deviation: f64, detail: String) -> Self {
        Check {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            max_deviation,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    /// True when no check failed; warnings do not count.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<4}  {:<28} max_dev={:<12.4e} {}", c.status, c.name, c.max_deviation, c.detail)?;
        }
        Ok(())
    }
}

pub fn run(level: Level) -> Result<Report> {
    let full = level == Level::Full;
    let checks = vec![
        gibbs_consistency(if full { 200 } else { 20 })?,
        w_identity()?,
        type_identities(if full { 1000 } else { 100 })?,
        exponent_zero(100)?,
        exponent_slope(if full { 100 } else { 20 })?,
        beta_bound(if full { 512 } else { 32 })?,
        field_bound(if full { &[3, 4][..] } else { &[3][..] })?,
    ];
    Ok(Report { checks })
}

/// Factorized and type-form log-probabilities agree; the exact
/// distribution is normalized.
pub fn gibbs_consistency(random_k4: usize) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for &p in &[0.5, 0.7, 0.9] {
        let model = MrfModel::symmetric(p)?;
        let mut r = rng::stream(1, (p * 100.0) as u64);
        let fields = (0..512u64)
            .map(|i| TargetField::from_index(3, i))
            .chain((0..random_k4).map(|_| TargetField::random_uniform(4, &mut r)))
            .collect::<Result<Vec<_>>>()?;
        for f in &fields {
            let a = mrf::log_prob_unnorm(f, &model);
            let b = mrf::log_prob_unnorm_from_type(&mrf::field_type(f), &model);
            worst = worst.max((a - b).abs());
        }
        let s: f64 = mrf::exact_distribution(&model, 3)?.probs().iter().sum();
        norm = norm.max((s - 1.0).abs());
    }
    let ok = worst <= 1e-9 && norm <= 1e-9;
    Ok(Check::new("gibbs_consistency", ok, worst.max(norm), format!("normalization error {norm:.2e}")))
}

/// `W = 1` across the symmetric family.
pub fn w_identity() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &p in &[0.5, 0.6, 0.7, 0.8, 0.9, 0.99] {
        worst = worst.max((MrfModel::symmetric(p)?.w() - 1.0).abs());
    }
    Ok(Check::new("w_identity", worst <= 1e-12, worst, String::new()))
}

/// Marginals of joint types equal the directly computed sensor types,
/// center-pair distortion is the Hamming distortion, and the range-1
/// sensor type is the field type.
pub fn type_identities(pairs: usize) -> Result<Check> {
    let mut r = rng::stream(2, 0);
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    for i in 0..pairs {
        let k = if i % 2 == 0 { 3 } else { 4 };
        let fi = TargetField::random_uniform(k, &mut r)?;
        let fj = TargetField::random_uniform(k, &mut r)?;
        for c in 0..=1 {
            let lambda = types::joint_sensor_type(&fi, &fj, c)?;
            let (rows, cols) = lambda.marginal_counts().expect("realized");
            if rows != types::sensor_type(&fi, c)?.hist().counts()
                || cols != types::sensor_type(&fj, c)?.hist().counts()
            {
                mismatches += 1;
            }
            let hamming = fi.bits().iter().zip(fj.bits()).filter(|(a, b)| a != b).count() as u64;
            let pair = types::center_pair_counts(&lambda).expect("realized");
            if pair[0][1] + pair[1][0] != hamming {
                mismatches += 1;
            }
            let d = types::distortion(&types::center_pair(&lambda));
            worst = worst.max((d - hamming as f64 / (k * k) as f64).abs());
        }
        if types::gamma_to_phi(&types::sensor_type(&fi, 1)?)? != mrf::field_type(&fi) {
            mismatches += 1;
        }
    }
    Ok(Check::new("type_identities", mismatches == 0, worst, format!("{mismatches} mismatches in {pairs} pairs")))
}

struct ExponentDraw {
    lambda: JointType,
    psi: SensingFunction,
    channel: NoiseChannel,
}

fn random_simplex<R: Rng + ?Sized>(n: usize, r: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| Exp1.sample(r)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn random_channel<R: Rng + ?Sized>(n: usize, r: &mut R) -> Result<NoiseChannel> {
    NoiseChannel::new((0..n).map(|_| random_simplex(n, r)).collect())
}

fn exponent_draw<R: Rng + ?Sized>(i: usize, r: &mut R) -> Result<ExponentDraw> {
    let (cov, psi) = match i % 3 {
        0 => (Coverage::new(0), SensingFunction::identity()),
        1 => {
            let cov = Coverage::new(1);
            let psi = SensingFunction::new(PsiKind::Count, &cov)?;
            (cov, psi)
        }
        _ => {
            let cov = Coverage::new(1);
            let w = (0..5).map(|_| r.gen_range(0..3)).collect();
            let psi = SensingFunction::new(PsiKind::WeightedSum(w), &cov)?;
            (cov, psi)
        }
    };
    let dim = PatternSpace::Footprint(cov.clone()).size()?;
    let lambda = JointType::relaxed(PatternSpace::Footprint(cov), random_simplex(dim * dim, r))?;
    let channel = random_channel(psi.output_size(), r)?;
    Ok(ExponentDraw { lambda, psi, channel })
}

/// `E(0, lambda) = 0`.
pub fn exponent_zero(draws: usize) -> Result<Check> {
    let mut r = rng::stream(3, 0);
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let d = exponent_draw(i, &mut r)?;
        worst = worst.max(capacity::exponent_e(0.0, &d.lambda, &d.psi, &d.channel)?.abs());
    }
    Ok(Check::new("exponent_zero", worst <= 1e-15, worst, String::new()))
}

/// The slope of `E` at `rho = 0` is the divergence between the true and
/// mismatched output-observation joints.
pub fn exponent_slope(draws: usize) -> Result<Check> {
    let mut r = rng::stream(4, 0);
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for i in 0..draws {
        let d = exponent_draw(i, &mut r)?;
        let a = types::output_joint(&d.lambda, &d.psi)?;
        let px: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
        let pxy = types::pxy_from_output(&px, &d.channel)?;
        let qxy = types::qxy_from_joint(&a, &d.channel)?;
        let target = types::kl(&types::flatten(&pxy), &types::flatten(&qxy));
        // One-sided stencil: E is only defined for rho >= 0.
        let e1 = capacity::exponent_e_joint(h, &a, &d.channel)?;
        let e2 = capacity::exponent_e_joint(2.0 * h, &a, &d.channel)?;
        let slope = (4.0 * e1 - e2) / (2.0 * h);
        worst = worst.max((slope - target).abs() / target.abs().max(1e-12));
    }
    Ok(Check::new("exponent_slope", worst <= 1e-5, worst, "relative error".into()))
}

/// `beta(i, lambda) <= 2^{k^2 (H(lambda) - H(gamma_i))}` at `k = 3`,
/// `c = 0`, for the first `fields` fields `f_i` and every realizable
/// `lambda`.
pub fn beta_bound(fields: usize) -> Result<Check> {
    let k = 3;
    let n = (k * k) as f64;
    let all = (0..512u64).map(|i| TargetField::from_index(k, i)).collect::<Result<Vec<_>>>()?;
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut lambdas = 0;
    for fi in all.iter().take(fields) {
        let mut beta: HashMap<Vec<u64>, (u64, f64)> = HashMap::new();
        for fj in &all {
            let lambda = types::joint_sensor_type(fi, fj, 0)?;
            let h = lambda.entropy();
            beta.entry(lambda.counts().expect("realized").to_vec()).or_insert((0, h)).0 += 1;
        }
        let h_gamma = types::entropy(&types::sensor_type(fi, 0)?.probs());
        for (count, h_lambda) in beta.values() {
            let excess = (*count as f64).log2() - n * (h_lambda - h_gamma);
            worst = worst.max(excess);
            if excess > 1e-9 {
                violations += 1;
            }
            lambdas += 1;
        }
    }
    Ok(Check::new(
        "beta_bound",
        violations == 0,
        worst.max(0.0),
        format!("{violations} violations over {lambdas} (f_i, lambda) pairs"),
    ))
}

/// Exact field probabilities against the type bound; violations are
/// warnings.
pub fn field_bound(sides: &[usize]) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    let mut violated = false;
    for &k in sides {
        for &p in &[0.5, 0.7, 0.9] {
            let rep = capacity::check_field_bound(&MrfModel::symmetric(p)?, k)?;
            worst = worst.max(rep.max_log2_excess);
            if rep.violations > 0 {
                violated = true;
                notes.push(format!(
                    "k={k} p={p}: {}/{} fields exceed by up to 2^{:.3} (log2 Z = {:.3})",
                    rep.violations, rep.fields, rep.max_log2_excess, rep.log2_z
                ));
            }
        }
    }
    Ok(Check {
        name: "field_bound".into(),
        status: if violated { Status::Warn } else { Status::Pass },
        max_deviation: worst.max(0.0),
        detail: notes.join("; "),
    })
}
