//! Capacity lower bound for sensor ranges 0 and 1.
//!
//! The bound is the minimum, over joint types whose first field is
//! typical and whose center-bit disagreement exceeds `D`, of
//!
//! ```text
//! D(P^gamma_{X_i Y} || Q^lambda_{X_i Y}) / DENOM
//! ```
//!
//! with `DENOM = H(lambda) - H(gamma_i) + H(phi*) + sum_t phi_j(t) log2 phi*(t)`
//! for range 1 and `DENOM = H(mu) + sum_t phi_j(t) log2 phi*(t)` for range 0.
//! Feasible points with `DENOM <= 0` put no constraint on the rate and are
//! excluded. The program is solved by Dinkelbach iteration whose convex
//! subproblems are handled by projected gradient descent; see [`problem`]
//! for the coordinates the solver works in.
//!
//! Ranges `c >= 2` are not supported here: their footprint alphabet has
//! `2^13` patterns.

mod exponent;
mod oracle;
pub mod problem;
mod solver;

pub use exponent::{default_rho_grid, exponent_e, exponent_e_joint, exponent_er, ErResult};
pub use oracle::oracle_local_search;
pub use problem::{FullProblem, ReducedProblem};

use crate::mrf::{self, MrfModel, QUINTUPLETS};
use crate::sensing::{Coverage, NoiseChannel, SensingFunction};
use crate::types::{self, cross_entropy, entropy, kl, JointType, PatternSpace};
use crate::{Error, Result};

use solver::{Fractional, Polytope};

/// `phi*(t) = P_F(t5) prod_r P_{F|F'}(t5|t_r) / W`.
pub fn typical_field_type(model: &MrfModel) -> Vec<f64> {
    (0..QUINTUPLETS).map(|t| model.clique_log2(t).exp2()).collect()
}

/// `log2` of `2^(k^2 (-D(phi || phi*) - H(phi)))`.
pub fn field_type_log2_bound(phi: &[f64], model: &MrfModel, k: usize) -> f64 {
    let star = typical_field_type(model);
    (k * k) as f64 * (-kl(phi, &star) - entropy(phi))
}

/// The per-field probability bound `2^(k^2 (-D(phi || phi*) - H(phi)))`.
pub fn field_type_prob_bound(phi: &[f64], model: &MrfModel, k: usize) -> f64 {
    field_type_log2_bound(phi, model, k).exp2()
}

/// Exact per-field probabilities compared against
/// [`field_type_prob_bound`]. The bound omits the `1/Z` normalization, so it
/// holds for every field exactly when `Z >= 1`; violations are reported,
/// not assumed away.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBoundReport {
    pub k: usize,
    pub fields: usize,
    pub violations: usize,
    /// Largest `log2(P(f) / bound)` over all fields.
    pub max_log2_excess: f64,
    pub log2_z: f64,
}

pub fn check_field_bound(model: &MrfModel, k: usize) -> Result<FieldBoundReport> {
    let dist = mrf::exact_distribution(model, k)?;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for (field, p) in dist.iter() {
        let phi = mrf::field_type(&field).probs();
        let excess = p.log2() - field_type_log2_bound(&phi, model, k);
        if excess > 1e-9 {
            violations += 1;
        }
        worst = worst.max(excess);
    }
    Ok(FieldBoundReport {
        k,
        fields: dist.probs().len(),
        violations,
        max_log2_excess: worst,
        log2_z: dist.log2_z(),
    })
}

fn footprint_cov(joint: &JointType) -> Result<&Coverage> {
    match joint.space() {
        PatternSpace::Footprint(cov) if cov.range() >= 1 => Ok(cov),
        _ => Err(Error::InvalidArgument("expected a joint sensor type of range >= 1".into())),
    }
}

fn check_phi(phi_star: &[f64]) -> Result<()> {
    if phi_star.len() != QUINTUPLETS {
        return Err(Error::DimensionMismatch(format!(
            "typical field type has {} entries",
            phi_star.len()
        )));
    }
    Ok(())
}

/// Range >= 1 denominator through the cross-entropy identity:
/// `H(lambda) - H(gamma_i) + H(phi*) - CE(phi_j, phi*)`, with `gamma_i` the
/// row marginal of `lambda` and `phi_j` marginalized from its column marginal.
pub fn denom_t1(lambda: &JointType, phi_star: &[f64]) -> Result<f64> {
    check_phi(phi_star)?;
    let cov = footprint_cov(lambda)?;
    let (gamma_i, gamma_j) = lambda.marginals();
    let phi_j = types::gamma_to_phi_probs(&gamma_j, cov)?;
    Ok(lambda.entropy() - entropy(&gamma_i) + entropy(phi_star) - cross_entropy(&phi_j, phi_star))
}

/// The same denominator written with divergence and entropy terms,
/// `H(lambda) - H(gamma_i) + H(phi*) - D(phi_j || phi*) - H(phi_j)`.
pub fn denom_t1_divergence_form(lambda: &JointType, phi_star: &[f64]) -> Result<f64> {
    check_phi(phi_star)?;
    let cov = footprint_cov(lambda)?;
    let (gamma_i, gamma_j) = lambda.marginals();
    let phi_j = types::gamma_to_phi_probs(&gamma_j, cov)?;
    Ok(lambda.entropy() - entropy(&gamma_i) + entropy(phi_star)
        - kl(&phi_j, phi_star)
        - entropy(&phi_j))
}

fn quintuplet_joint(mu: &JointType) -> Result<()> {
    match mu.space() {
        PatternSpace::Quintuplet => Ok(()),
        _ => Err(Error::InvalidArgument("expected a joint field type".into())),
    }
}

/// Range-0 denominator `H(mu) - CE(phi_j, phi*)`, `phi_j` the column
/// marginal of `mu`.
pub fn denom_t2(mu: &JointType, phi_star: &[f64]) -> Result<f64> {
    check_phi(phi_star)?;
    quintuplet_joint(mu)?;
    let (_, phi_j) = mu.marginals();
    Ok(mu.entropy() - cross_entropy(&phi_j, phi_star))
}

/// `H(mu) - D(phi_j || phi*) - H(phi_j)`.
pub fn denom_t2_divergence_form(mu: &JointType, phi_star: &[f64]) -> Result<f64> {
    check_phi(phi_star)?;
    quintuplet_joint(mu)?;
    let (_, phi_j) = mu.marginals();
    Ok(mu.entropy() - kl(&phi_j, phi_star) - entropy(&phi_j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Dinkelbach stops once `theta` moves by less than this.
    pub theta_tol: f64,
    /// Target accuracy of each subproblem minimum; also the certificate bound.
    pub inner_tol: f64,
    /// Closure margin: the distortion constraint is `>= D + eps_dist`.
    pub eps_dist: f64,
    pub restarts: usize,
    /// Dinkelbach iteration cap.
    pub max_iters: usize,
    /// Projected-gradient iteration cap per start.
    pub inner_max_iters: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            theta_tol: 1e-9,
            inner_tol: 1e-7,
            eps_dist: 0.0,
            restarts: 16,
            max_iters: 100,
            inner_max_iters: 20_000,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_tol > 0.0) || !(self.inner_tol > 0.0) || !(self.eps_dist >= 0.0) {
            return Err(Error::InvalidArgument(
                "tolerances must be positive and eps_dist nonnegative".into(),
            ));
        }
        if self.max_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidArgument("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// One bound evaluation: model, sensing, channel and target distortion.
#[derive(Debug, Clone)]
pub struct CapacityQuery {
    pub model: MrfModel,
    pub c: u32,
    pub psi: SensingFunction,
    pub channel: NoiseChannel,
    pub distortion: f64,
    pub options: OptimizerOptions,
}

impl CapacityQuery {
    pub fn new(
        model: MrfModel,
        c: u32,
        psi: SensingFunction,
        channel: NoiseChannel,
        distortion: f64,
    ) -> Self {
        CapacityQuery { model, c, psi, channel, distortion, options: OptimizerOptions::default() }
    }

    pub fn with_options(mut self, options: OptimizerOptions) -> Self {
        self.options = options;
        self
    }

    /// The fractional program in joint-type coordinates (`mu` for range 0,
    /// `lambda` for range 1).
    pub fn full_problem(&self) -> Result<FullProblem> {
        self.options.validate()?;
        if !(0.0..=1.0).contains(&self.distortion) {
            return Err(Error::InvalidArgument(format!("distortion {} outside [0, 1]", self.distortion)));
        }
        if self.distortion >= 1.0 || self.distortion + self.options.eps_dist > 1.0 {
            return Err(Error::Infeasible(format!(
                "no joint type has distortion above {}",
                self.distortion
            )));
        }
        if self.channel.input_size() != self.psi.output_size() {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} inputs, sensing function has {} outputs",
                self.channel.input_size(),
                self.psi.output_size()
            )));
        }
        let star = typical_field_type(&self.model);
        let h_star = entropy(&star);
        let min_distortion = self.distortion + self.options.eps_dist;
        let log_star: Vec<f64> = star.iter().map(|p| p.log2()).collect();
        match self.c {
            0 => {
                let space = PatternSpace::Quintuplet;
                let sym = space.symbols(&self.psi)?;
                let bits: Vec<u8> = (0..QUINTUPLETS).map(mrf::quintuplet_center).collect();
                Ok(FullProblem::new(
                    star,
                    sym.clone(),
                    bits.clone(),
                    log_star,
                    sym,
                    bits,
                    -h_star,
                    h_star,
                    self.channel.clone(),
                    min_distortion,
                ))
            }
            1 => {
                let cov = Coverage::new(1);
                let space = PatternSpace::Footprint(cov.clone());
                let sym = space.symbols(&self.psi)?;
                let quint: Vec<usize> = (0..QUINTUPLETS)
                    .map(|w| types::pattern_to_quintuplet(&cov, w))
                    .collect::<Result<_>>()?;
                let gamma_i: Vec<f64> = quint.iter().map(|&q| star[q]).collect();
                let col_log: Vec<f64> = quint.iter().map(|&q| log_star[q]).collect();
                let bits: Vec<u8> = (0..QUINTUPLETS).map(|w| cov.center_bit(w)).collect();
                let h_gamma = entropy(&gamma_i);
                Ok(FullProblem::new(
                    gamma_i,
                    sym.clone(),
                    bits.clone(),
                    col_log,
                    sym,
                    bits,
                    -h_gamma,
                    h_star,
                    self.channel.clone(),
                    min_distortion,
                ))
            }
            c => Err(Error::Unsupported(format!(
                "bound evaluation for range {c}; only ranges 0 and 1 are optimized"
            ))),
        }
    }

    fn space(&self) -> PatternSpace {
        if self.c == 0 {
            PatternSpace::Quintuplet
        } else {
            PatternSpace::Footprint(Coverage::new(self.c))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Finite,
    /// Every feasible joint type has `DENOM <= 0`: no rate constraint at
    /// this distortion. The value is reported as `+inf`.
    Unconstrained,
}

/// The minimizing joint type and the quantities derived from it.
#[derive(Debug, Clone)]
pub struct Witness {
    /// `lambda` (range 1) or `mu` (range 0); a relaxed point.
    pub joint: JointType,
    pub gamma_i: Vec<f64>,
    pub phi_j: Vec<f64>,
    pub distortion: f64,
    pub numerator: f64,
    pub denominator: f64,
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub value: f64,
    pub status: BoundStatus,
    pub witness: Option<Witness>,
    /// Final subproblem minimum `min (N - value * DENOM)`.
    pub certificate: f64,
    pub iterations: usize,
}

fn witness(query: &CapacityQuery, full: &FullProblem, m: Vec<f64>) -> Result<Witness> {
    let joint = JointType::relaxed(query.space(), m.clone())?;
    let (gamma_i, col) = joint.marginals();
    let phi_j = if query.c == 0 {
        col
    } else {
        types::gamma_to_phi_probs(&col, &Coverage::new(query.c))?
    };
    Ok(Witness {
        distortion: full.distortion(&m),
        numerator: full.numerator(&m),
        denominator: full.denominator(&m),
        joint,
        gamma_i,
        phi_j,
    })
}

/// Evaluates the bound for `query.c` in `{0, 1}`.
pub fn clb(query: &CapacityQuery) -> Result<CapacityResult> {
    let full = query.full_problem()?;
    let reduced = ReducedProblem::new(full.clone());
    let poly = Polytope::new(&reduced, full.min_distortion());
    if poly.max_distortion() < full.min_distortion() {
        return Err(Error::Infeasible(format!(
            "largest attainable distortion {} is below {}",
            poly.max_distortion(),
            full.min_distortion()
        )));
    }
    match solver::dinkelbach(&reduced, &poly, &query.options, query.channel.is_uninformative()) {
        Fractional::NoFiniteStart => Err(Error::Infeasible(
            "no feasible joint type with a finite numerator was found".into(),
        )),
        Fractional::Unconstrained => Ok(CapacityResult {
            value: f64::INFINITY,
            status: BoundStatus::Unconstrained,
            witness: None,
            certificate: 0.0,
            iterations: 0,
        }),
        Fractional::Solved { theta, point, certificate, iterations } => {
            let m = reduced.lift(&point);
            Ok(CapacityResult {
                value: theta,
                status: BoundStatus::Finite,
                witness: Some(witness(query, &full, m)?),
                certificate,
                iterations,
            })
        }
    }
}

/// Range-0 bound, optimized over joint field types `mu`.
pub fn clb_c0(
    model: &MrfModel,
    psi: &SensingFunction,
    channel: &NoiseChannel,
    distortion: f64,
    options: &OptimizerOptions,
) -> Result<CapacityResult> {
    clb(&CapacityQuery::new(model.clone(), 0, psi.clone(), channel.clone(), distortion)
        .with_options(options.clone()))
}

/// Range-1 bound, optimized over joint sensor types `lambda`.
pub fn clb_c1(
    model: &MrfModel,
    psi: &SensingFunction,
    channel: &NoiseChannel,
    distortion: f64,
    options: &OptimizerOptions,
) -> Result<CapacityResult> {
    clb(&CapacityQuery::new(model.clone(), 1, psi.clone(), channel.clone(), distortion)
        .with_options(options.clone()))
}
