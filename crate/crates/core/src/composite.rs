//! Composite alternatives: a prior over `Θ1` induces a mixture experiment
//! whose density is the marginal likelihood `m1(x^n)`. The reciprocal Bayes
//! factor `p(x^n|θ0) / m1(x^n)` has unit expectation under that mixture,
//! which is what certifies it as an e-value for Type II control. The
//! guarantee holds for the mixture, not for each `θ` separately.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::enumerate::Enumeration;
use crate::error::{Error, Result};
use crate::evidence::{
    markov_bound_check, unit_moment_check, Alternative, BoundReport, Direction, EvidenceSpec,
    Method, MomentReport,
};
use crate::models::{Dataset, Family, Model};
use crate::numeric::{gauss_legendre, ln_beta, log_sum_exp, NeumaierSum, LOG_TIE_TOLERANCE};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const PRIOR_MASS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorKind {
    /// Conjugate to Bernoulli.
    Beta { a: f64, b: f64 },
    /// `N(mean, variance · I)` over a Gaussian mean; conjugate to
    /// `GaussianKnownVar`.
    Gaussian { mean: Vec<f64>, variance: f64 },
    /// Finitely many atoms; any family.
    Grid {
        nodes: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    GaussLegendre,
    Midpoint,
}

/// Fixed-rule quadrature used instead of the conjugate closed form when
/// explicitly requested. One-dimensional continuous priors only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub scheme: QuadratureScheme,
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(flatten)]
    pub kind: PriorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Quadrature>,
}

impl PriorSpec {
    pub fn beta(a: f64, b: f64) -> Self {
        PriorSpec {
            kind: PriorKind::Beta { a, b },
            quadrature: None,
        }
    }

    pub fn gaussian(mean: Vec<f64>, variance: f64) -> Self {
        PriorSpec {
            kind: PriorKind::Gaussian { mean, variance },
            quadrature: None,
        }
    }

    pub fn grid(nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        PriorSpec {
            kind: PriorKind::Grid { nodes, weights },
            quadrature: None,
        }
    }

    /// A single atom at `theta`.
    pub fn point_mass(theta: Vec<f64>) -> Self {
        Self::grid(vec![theta], vec![1.0])
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = Some(quadrature);
        self
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self.kind, PriorKind::Grid { .. })
    }
}

/// The declared `Θ1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSpace {
    /// Open interval.
    Interval { lower: f64, upper: f64 },
    Euclidean { dim: usize },
}

impl ParamSpace {
    pub fn of(family: &Family) -> Self {
        match family {
            Family::Bernoulli => ParamSpace::Interval {
                lower: 0.0,
                upper: 1.0,
            },
            Family::Exponential => ParamSpace::Interval {
                lower: 0.0,
                upper: f64::INFINITY,
            },
            Family::GaussianKnownVar { dim, .. } => ParamSpace::Euclidean { dim: *dim },
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        match *self {
            ParamSpace::Interval { lower, upper } => {
                theta.len() == 1 && theta[0] > lower && theta[0] < upper
            }
            ParamSpace::Euclidean { dim } => {
                theta.len() == dim && theta.iter().all(|t| t.is_finite())
            }
        }
    }

    fn contains_closed_range(&self, lower: f64, upper: f64) -> bool {
        match *self {
            ParamSpace::Interval {
                lower: lo,
                upper: hi,
            } => lower >= lo && upper <= hi,
            ParamSpace::Euclidean { .. } => lower.is_finite() && upper.is_finite(),
        }
    }
}

impl fmt::Display for ParamSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSpace::Interval { lower, upper } => write!(f, "({lower}, {upper})"),
            ParamSpace::Euclidean { dim } => write!(f, "R^{dim}"),
        }
    }
}

/// A prior over `Θ1` for a given family. Construct with
/// [`MixtureAlternative::new`], which validates the pairing and normalisation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixtureSpec", into = "MixtureSpec")]
pub struct MixtureAlternative {
    family: Family,
    prior: PriorSpec,
    param_space: ParamSpace,
    /// Atoms `(θ_k, ln w_k)` for grid priors and quadrature mode.
    atoms: Option<Arc<Vec<(Model, f64)>>>,
}

impl PartialEq for MixtureAlternative {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.prior == other.prior
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    #[serde(flatten)]
    pub family: Family,
    pub prior: PriorSpec,
}

impl TryFrom<MixtureSpec> for MixtureAlternative {
    type Error = Error;
    fn try_from(spec: MixtureSpec) -> Result<Self> {
        MixtureAlternative::new(spec.family, spec.prior)
    }
}

impl From<MixtureAlternative> for MixtureSpec {
    fn from(mix: MixtureAlternative) -> Self {
        MixtureSpec {
            family: mix.family,
            prior: mix.prior,
        }
    }
}

impl fmt::Display for MixtureAlternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.prior.kind {
            PriorKind::Beta { a, b } => write!(f, "Beta({a}, {b}) mixture of {}", self.family.name()),
            PriorKind::Gaussian { mean, variance } => {
                write!(f, "N({mean:?}, {variance}·I) mixture of {}", self.family.name())
            }
            PriorKind::Grid { nodes, .. } => {
                write!(f, "{}-atom grid mixture of {}", nodes.len(), self.family.name())
            }
        }
    }
}

impl MixtureAlternative {
    pub fn new(family: Family, prior: PriorSpec) -> Result<Self> {
        family.validate()?;
        let param_space = ParamSpace::of(&family);
        let mut mix = MixtureAlternative {
            family,
            prior,
            param_space,
            atoms: None,
        };
        match &mix.prior.kind {
            PriorKind::Beta { a, b } => {
                if family != Family::Bernoulli {
                    return Err(Error::InvalidPrior(format!(
                        "beta prior requires the bernoulli family, got {}",
                        family.name()
                    )));
                }
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::InvalidPrior(format!(
                        "beta parameters must be positive, got ({a}, {b})"
                    )));
                }
            }
            PriorKind::Gaussian { mean, variance } => {
                let Family::GaussianKnownVar { dim, .. } = family else {
                    return Err(Error::InvalidPrior(format!(
                        "gaussian prior requires the gaussian_known_var family, got {}",
                        family.name()
                    )));
                };
                if mean.len() != dim {
                    return Err(Error::InvalidPrior(format!(
                        "prior mean has dimension {}, family has {dim}",
                        mean.len()
                    )));
                }
                if !(variance.is_finite() && *variance > 0.0) || mean.iter().any(|m| !m.is_finite()) {
                    return Err(Error::InvalidPrior(
                        "gaussian prior needs a finite mean and positive variance".into(),
                    ));
                }
            }
            PriorKind::Grid { nodes, weights } => {
                if mix.prior.quadrature.is_some() {
                    return Err(Error::InvalidPrior(
                        "quadrature applies to continuous priors only".into(),
                    ));
                }
                if nodes.is_empty() || nodes.len() != weights.len() {
                    return Err(Error::InvalidPrior(format!(
                        "grid needs matching non-empty nodes and weights ({} vs {})",
                        nodes.len(),
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::InvalidPrior("grid weights must be nonnegative".into()));
                }
                let total: f64 = weights.iter().copied().collect::<NeumaierSum>().value();
                if (total - 1.0).abs() > PRIOR_MASS_TOLERANCE {
                    return Err(Error::InvalidPrior(format!(
                        "grid weights sum to {total}, expected 1"
                    )));
                }
                let mut atoms = Vec::with_capacity(nodes.len());
                for (theta, &w) in nodes.iter().zip(weights) {
                    if !param_space.contains(theta) {
                        return Err(Error::InvalidPrior(format!(
                            "grid node {theta:?} lies outside {param_space}"
                        )));
                    }
                    atoms.push((family.model(theta.clone())?, w.ln()));
                }
                mix.atoms = Some(Arc::new(atoms));
            }
        }
        if let Some(q) = mix.prior.quadrature.clone() {
            mix.atoms = Some(Arc::new(mix.quadrature_atoms(&q)?));
        }
        Ok(mix)
    }

    fn quadrature_atoms(&self, q: &Quadrature) -> Result<Vec<(Model, f64)>> {
        if self.family.dim() != 1 {
            return Err(Error::Unsupported(
                "quadrature is implemented for one-dimensional parameters only".into(),
            ));
        }
        if q.nodes == 0 {
            return Err(Error::InvalidPrior("quadrature needs at least one node".into()));
        }
        let (default_lo, default_hi) = match &self.prior.kind {
            PriorKind::Beta { .. } => (0.0, 1.0),
            PriorKind::Gaussian { mean, variance } => {
                let half = 12.0 * variance.sqrt();
                (mean[0] - half, mean[0] + half)
            }
            PriorKind::Grid { .. } => unreachable!("rejected earlier"),
        };
        let lower = q.lower.unwrap_or(default_lo);
        let upper = q.upper.unwrap_or(default_hi);
        if !(lower < upper) || !self.param_space.contains_closed_range(lower, upper) {
            return Err(Error::QuadratureOutsideSupport {
                lower,
                upper,
                space: self.param_space.to_string(),
            });
        }
        let (nodes, weights) = match q.scheme {
            QuadratureScheme::GaussLegendre => gauss_legendre(q.nodes, lower, upper),
            QuadratureScheme::Midpoint => {
                let h = (upper - lower) / q.nodes as f64;
                let nodes = (0..q.nodes).map(|i| lower + (i as f64 + 0.5) * h).collect();
                (nodes, vec![h; q.nodes])
            }
        };
        let mut atoms = Vec::with_capacity(nodes.len());
        let mut mass = NeumaierSum::default();
        for (theta, w) in nodes.into_iter().zip(weights) {
            let lp = self.prior_log_density(&[theta])?;
            if lp == f64::NEG_INFINITY {
                continue;
            }
            mass.add(w * lp.exp());
            atoms.push((self.family.model(vec![theta])?, w.ln() + lp));
        }
        let mass = mass.value();
        if (mass - 1.0).abs() > PRIOR_MASS_TOLERANCE {
            return Err(Error::InvalidPrior(format!(
                "prior integrates to {mass} under the requested quadrature, expected 1 within {PRIOR_MASS_TOLERANCE}"
            )));
        }
        Ok(atoms)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn param_space(&self) -> &ParamSpace {
        &self.param_space
    }

    /// `ln π1(θ)`. Grid priors have no density.
    pub fn prior_log_density(&self, theta: &[f64]) -> Result<f64> {
        match &self.prior.kind {
            PriorKind::Beta { a, b } => {
                let t = theta[0];
                if !(t > 0.0 && t < 1.0) {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok((a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p() - ln_beta(*a, *b))
            }
            PriorKind::Gaussian { mean, variance } => {
                if theta.len() != mean.len() {
                    return Err(Error::InvalidArgument(format!(
                        "parameter has dimension {}, prior has {}",
                        theta.len(),
                        mean.len()
                    )));
                }
                let sq: f64 = theta
                    .iter()
                    .zip(mean)
                    .map(|(t, m)| (t - m) * (t - m))
                    .sum();
                Ok(-0.5 * mean.len() as f64 * (LN_2PI + variance.ln()) - sq / (2.0 * variance))
            }
            PriorKind::Grid { .. } => Err(Error::Unsupported(
                "grid priors have no density; a continuous prior is required".into(),
            )),
        }
    }

    /// Draws `θ ~ π1`.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Model {
        match &self.prior.kind {
            PriorKind::Beta { a, b } => {
                let beta = Beta::new(*a, *b).expect("validated beta prior");
                loop {
                    let p = beta.sample(rng);
                    if let Ok(m) = Model::bernoulli(p) {
                        return m;
                    }
                }
            }
            PriorKind::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                let theta = mean
                    .iter()
                    .map(|&m| Normal::new(m, sd).expect("validated").sample(rng))
                    .collect();
                self.family.model(theta).expect("gaussian means are unconstrained")
            }
            PriorKind::Grid { weights, .. } => {
                let atoms = self.atoms.as_ref().expect("grid atoms are built on construction");
                let u: f64 = rng.random();
                let mut cumulative = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    cumulative += w;
                    if u < cumulative {
                        return atoms[i].0.clone();
                    }
                }
                let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
                atoms[last].0.clone()
            }
        }
    }

    /// One replicate of the mixture experiment: `θ` drawn once, then `n`
    /// i.i.d. observations from `P_θ`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Dataset {
        let theta = self.sample_theta(rng);
        theta.sample_with(rng, n)
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.dim() != self.family.observation_dim() {
            return Err(Error::FamilyMismatch(format!(
                "dataset has observation dimension {}, {} expects {}",
                data.dim(),
                self.family.name(),
                self.family.observation_dim()
            )));
        }
        Ok(())
    }

    /// Sequential posterior-predictive evaluation of `ln m1` one observation
    /// at a time.
    pub fn predictive(&self) -> Predictive<'_> {
        let state = match (&self.atoms, &self.prior.kind) {
            (Some(atoms), _) => {
                let raw: Vec<f64> = atoms.iter().map(|(_, lw)| *lw).collect();
                let total = log_sum_exp(&raw);
                PredictiveState::Weighted {
                    log_weights: raw.iter().map(|lw| lw - total).collect(),
                }
            }
            (None, PriorKind::Beta { .. }) => PredictiveState::Beta { ones: 0, n: 0 },
            (None, PriorKind::Gaussian { mean, .. }) => PredictiveState::Gaussian {
                sums: vec![0.0; mean.len()],
                n: 0,
            },
            (None, PriorKind::Grid { .. }) => unreachable!("grid priors always carry atoms"),
        };
        Predictive { mix: self, state }
    }
}

/// `ln m1(x^n) = ln ∫ p(x^n | θ) π1(θ) dθ`.
pub fn marginal_log_likelihood(mix: &MixtureAlternative, data: &Dataset) -> Result<f64> {
    mix.check_data(data)?;
    if let Some(atoms) = &mix.atoms {
        let mut terms = Vec::with_capacity(atoms.len());
        for (model, lw) in atoms.iter() {
            if *lw == f64::NEG_INFINITY {
                continue;
            }
            terms.push(lw + model.log_density(data)?);
        }
        return Ok(log_sum_exp(&terms));
    }
    match &mix.prior.kind {
        PriorKind::Beta { a, b } => {
            let ones = count_ones(data)?;
            let n = data.len() as f64;
            Ok(ln_beta(a + ones, b + n - ones) - ln_beta(*a, *b))
        }
        PriorKind::Gaussian { mean, variance: tau2 } => {
            let Family::GaussianKnownVar { variance: sigma2, .. } = mix.family else {
                unreachable!("validated pairing")
            };
            Ok(gaussian_log_marginal(data, mean, *tau2, sigma2))
        }
        PriorKind::Grid { .. } => unreachable!("grid priors always carry atoms"),
    }
}

fn count_ones(data: &Dataset) -> Result<f64> {
    let mut ones = 0u64;
    for (index, x) in data.observations().enumerate() {
        if x[0] == 1.0 {
            ones += 1;
        } else if x[0] != 0.0 {
            return Err(Error::Domain {
                family: "bernoulli",
                index,
                value: x.to_vec(),
            });
        }
    }
    Ok(ones as f64)
}

fn gaussian_log_marginal(data: &Dataset, mean: &[f64], tau2: f64, sigma2: f64) -> f64 {
    let n = data.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut total = 0.0;
    for (j, &m) in mean.iter().enumerate() {
        let xbar = data.observations().map(|x| x[j]).sum::<f64>() / nf;
        let ss: f64 = data
            .observations()
            .map(|x| (x[j] - xbar) * (x[j] - xbar))
            .sum();
        total += -0.5 * nf * (LN_2PI + sigma2.ln())
            - 0.5 * (nf * tau2 / sigma2).ln_1p()
            - ss / (2.0 * sigma2)
            - nf * (xbar - m) * (xbar - m) / (2.0 * (sigma2 + nf * tau2));
    }
    total
}

/// Running one-step predictive factors of a mixture. Summing the returned
/// factors over a sequence gives `ln m1` of that sequence.
#[derive(Debug, Clone)]
pub struct Predictive<'a> {
    mix: &'a MixtureAlternative,
    state: PredictiveState,
}

#[derive(Debug, Clone)]
enum PredictiveState {
    Beta { ones: u64, n: u64 },
    Gaussian { sums: Vec<f64>, n: u64 },
    Weighted { log_weights: Vec<f64> },
}

impl Predictive<'_> {
    /// `ln m1(x_{t+1} | x^t)`, then conditions on `x`.
    pub fn observe(&mut self, x: &[f64]) -> Result<f64> {
        let domain = || Error::Domain {
            family: self.mix.family.name(),
            index: 0,
            value: x.to_vec(),
        };
        match (&mut self.state, &self.mix.prior.kind, &self.mix.family) {
            (PredictiveState::Beta { ones, n }, PriorKind::Beta { a, b }, _) => {
                let p1 = (a + *ones as f64) / (a + b + *n as f64);
                let lp = if x[0] == 1.0 {
                    *ones += 1;
                    p1.ln()
                } else if x[0] == 0.0 {
                    (-p1).ln_1p()
                } else {
                    return Err(domain());
                };
                *n += 1;
                Ok(lp)
            }
            (
                PredictiveState::Gaussian { sums, n },
                PriorKind::Gaussian { mean, variance: tau2 },
                Family::GaussianKnownVar { variance: sigma2, .. },
            ) => {
                if x.len() != mean.len() || x.iter().any(|v| !v.is_finite()) {
                    return Err(domain());
                }
                let post_var = 1.0 / (1.0 / tau2 + *n as f64 / sigma2);
                let pred_var = sigma2 + post_var;
                let mut lp = 0.0;
                for j in 0..mean.len() {
                    let post_mean = post_var * (mean[j] / tau2 + sums[j] / sigma2);
                    let d = x[j] - post_mean;
                    lp += -0.5 * (LN_2PI + pred_var.ln()) - d * d / (2.0 * pred_var);
                    sums[j] += x[j];
                }
                *n += 1;
                Ok(lp)
            }
            (PredictiveState::Weighted { log_weights }, _, _) => {
                let atoms = self.mix.atoms.as_ref().expect("weighted state has atoms");
                let mut joint = Vec::with_capacity(atoms.len());
                for ((model, _), lw) in atoms.iter().zip(log_weights.iter()) {
                    let lp = model.log_density_one(x).map_err(|_| domain())?;
                    joint.push(lw + lp);
                }
                let lp = log_sum_exp(&joint);
                if lp > f64::NEG_INFINITY {
                    for (lw, j) in log_weights.iter_mut().zip(joint) {
                        *lw = j - lp;
                    }
                }
                Ok(lp)
            }
            _ => unreachable!("predictive state always matches its prior"),
        }
    }
}

/// `ln B01 = ln p(x^n | θ0) − ln m1(x^n)`.
pub fn reciprocal_bayes_factor(
    null: &Model,
    mix: &MixtureAlternative,
    data: &Dataset,
) -> Result<f64> {
    check_same_family(null, mix)?;
    let l0 = null.log_density(data)?;
    let l1 = marginal_log_likelihood(mix, data)?;
    if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
        return Err(Error::ZeroUnderBoth { index: 0 });
    }
    Ok(l0 - l1)
}

pub(crate) fn check_same_family(model: &Model, mix: &MixtureAlternative) -> Result<()> {
    if model.family() != mix.family() {
        return Err(Error::FamilyMismatch(format!(
            "{model} vs {mix}: laws must share a family and its fixed constants"
        )));
    }
    Ok(())
}

fn mixture_spec(null: &Model, mix: &MixtureAlternative, n: usize) -> Result<EvidenceSpec> {
    check_same_family(null, mix)?;
    Ok(EvidenceSpec {
        null: null.clone(),
        alt: Alternative::Mixture(mix.clone()),
        direction: Direction::ForAlt,
        n,
    })
}

/// `E_{π1}[B01]`. Under Monte Carlo each replicate draws `θ ~ π1` once and
/// then `x^n ~ P_θ`.
pub fn mixture_certification_check(
    null: &Model,
    mix: &MixtureAlternative,
    n: usize,
    method: &Method,
) -> Result<MomentReport> {
    unit_moment_check(&mixture_spec(null, mix, n)?, method)
}

/// `P_{π1}(B01 ≥ 1/β) ≤ β`.
pub fn composite_type2_check(
    null: &Model,
    mix: &MixtureAlternative,
    n: usize,
    beta: f64,
    method: &Method,
) -> Result<BoundReport> {
    markov_bound_check(&mixture_spec(null, mix, n)?, beta, method)
}

/// Exact `P_θ(B01 ≥ 1/β)` at a fixed `θ ∈ Θ1`, where `B01` uses the mixture
/// marginal.
pub fn pointwise_type2_exceedance(
    null: &Model,
    mix: &MixtureAlternative,
    theta: &Model,
    n: usize,
    beta: f64,
    cap: u64,
) -> Result<f64> {
    check_same_family(theta, mix)?;
    let enumeration = Enumeration::new(mix.family(), n, cap)?;
    let threshold = -beta.ln() - LOG_TIE_TOLERANCE;
    let mut prob = NeumaierSum::default();
    for x in enumeration.iter() {
        if reciprocal_bayes_factor(null, mix, &x)? >= threshold {
            prob.add(theta.log_density(&x)?.exp());
        }
    }
    Ok(prob.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseViolation {
    pub theta: Model,
    pub n: usize,
    pub level: f64,
    pub exceed_prob: f64,
}

/// Searches `candidates` for a `θ` at which the mixture-level Type II bound
/// fails pointwise. Returns the first candidate with the largest violation.
pub fn find_pointwise_violation(
    null: &Model,
    mix: &MixtureAlternative,
    n: usize,
    beta: f64,
    candidates: &[Model],
    cap: u64,
) -> Result<Option<PointwiseViolation>> {
    let mut worst: Option<PointwiseViolation> = None;
    for theta in candidates {
        if !mix.param_space().contains(theta.theta()) {
            return Err(Error::InvalidArgument(format!(
                "{theta} lies outside {}",
                mix.param_space()
            )));
        }
        let p = pointwise_type2_exceedance(null, mix, theta, n, beta, cap)?;
        if p > beta && worst.as_ref().is_none_or(|w| p > w.exceed_prob) {
            worst = Some(PointwiseViolation {
                theta: theta.clone(),
                n,
                level: beta,
                exceed_prob: p,
            });
        }
    }
    Ok(worst)
}
