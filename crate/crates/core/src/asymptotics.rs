//! Large-sample behaviour of the reciprocal Bayes factor at a fixed `θ1`:
//!
//! `E_{θ1}[ln p(X^n|θ0)/m1(X^n)] ≈ −n·KL(θ1‖θ0) + (d/2)·ln n + ln(√det I(θ1) / π1(θ1))`
//!
//! together with the redundancy `E_θ[ln p(X^n|θ)/m1(X^n)]` of the mixture
//! code against the oracle that knows `θ`.

use serde::{Deserialize, Serialize};

use crate::composite::{marginal_log_likelihood, MixtureAlternative, PriorKind, PriorSpec};
use crate::enumerate::{Enumeration, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::models::{fisher_information, kl_divergence, Dataset, Family, Model};
use crate::montecarlo::replicate;
use crate::numeric::{gauss_hermite_normal, ln_binomial, mean_and_std_error, NeumaierSum};

const HERMITE_NODES: usize = 40;

/// The three terms of the expansion at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcPrediction {
    pub n: usize,
    /// `−n·KL(θ1‖θ0)`.
    pub kl_term: f64,
    /// `(d/2)·ln n`.
    pub log_n_term: f64,
    /// `ln(√det I(θ1) / π1(θ1))`.
    pub constant_term: f64,
    pub total: f64,
}

pub fn bc_prediction(
    theta1: &Model,
    theta0: &Model,
    mix: &MixtureAlternative,
    n: usize,
) -> Result<BcPrediction> {
    check_bc_inputs(theta1, theta0, mix)?;
    if n == 0 {
        return Err(Error::InvalidArgument("the expansion needs n >= 1".into()));
    }
    let log_prior = mix.prior_log_density(theta1.theta())?;
    if log_prior == f64::NEG_INFINITY {
        return Err(Error::ZeroPriorDensity {
            theta: theta1.theta().to_vec(),
        });
    }
    let d = theta1.dim() as f64;
    let kl_term = -(n as f64) * kl_divergence(theta1, theta0)?;
    let log_n_term = 0.5 * d * (n as f64).ln();
    let constant_term = 0.5 * fisher_information(theta1).log_det() - log_prior;
    Ok(BcPrediction {
        n,
        kl_term,
        log_n_term,
        constant_term,
        total: kl_term + log_n_term + constant_term,
    })
}

fn check_bc_inputs(theta1: &Model, theta0: &Model, mix: &MixtureAlternative) -> Result<()> {
    if theta1.family() != theta0.family() || theta1.family() != mix.family() {
        return Err(Error::FamilyMismatch(
            "theta1, theta0 and the mixture must share a family".into(),
        ));
    }
    if !mix.prior().is_continuous() {
        return Err(Error::InvalidArgument(
            "grid priors are rejected: the expansion needs a prior density at theta1".into(),
        ));
    }
    if !mix.param_space().contains(theta1.theta()) {
        return Err(Error::InvalidArgument(format!(
            "theta1 = {:?} is not in the interior of {}",
            theta1.theta(),
            mix.param_space()
        )));
    }
    Ok(())
}

/// How an expectation over `X^n ~ P_θ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// Full enumeration of the finite sample space.
    Enumerate {
        #[serde(default = "default_cap")]
        cap: u64,
    },
    /// Exact reduction to a sufficient statistic: the binomial count for
    /// Bernoulli, Gauss–Hermite over the sample mean for Gaussian means.
    SufficientStatistic,
    MonteCarlo { reps: usize, seed: u64 },
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl Expectation {
    pub fn enumerate() -> Self {
        Expectation::Enumerate {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Zero for exact methods.
    pub std_error: f64,
    pub exact: bool,
}

/// `E_{data_law}[ln p(X^n | competitor) − ln m1(X^n)]`.
pub fn expected_log_ratio(
    data_law: &Model,
    competitor: &Model,
    mix: &MixtureAlternative,
    n: usize,
    method: &Expectation,
) -> Result<Estimate> {
    if data_law.family() != competitor.family() || data_law.family() != mix.family() {
        return Err(Error::FamilyMismatch(
            "data law, competitor and mixture must share a family".into(),
        ));
    }
    let log_ratio =
        |x: &Dataset| -> Result<f64> { Ok(competitor.log_density(x)? - marginal_log_likelihood(mix, x)?) };
    match *method {
        Expectation::Enumerate { cap } => {
            let enumeration = Enumeration::new(data_law.family(), n, cap)?;
            let mut sum = NeumaierSum::default();
            for x in enumeration.iter() {
                let lp = data_law.log_density(&x)?;
                if lp > f64::NEG_INFINITY {
                    sum.add(lp.exp() * log_ratio(&x)?);
                }
            }
            Ok(exact(sum.value()))
        }
        Expectation::SufficientStatistic => sufficient_statistic_expectation(data_law, competitor, mix, n),
        Expectation::MonteCarlo { reps, seed } => {
            if reps < 2 {
                return Err(Error::InvalidArgument(format!(
                    "monte carlo needs at least 2 replicates, got {reps}"
                )));
            }
            let values: Vec<f64> = replicate(seed, reps, |rng, _| log_ratio(&data_law.sample_with(rng, n)))
                .into_iter()
                .collect::<Result<_>>()?;
            let (value, std_error) = mean_and_std_error(&values);
            Ok(Estimate {
                value,
                std_error,
                exact: false,
            })
        }
    }
}

fn exact(value: f64) -> Estimate {
    Estimate {
        value,
        std_error: 0.0,
        exact: true,
    }
}

fn sufficient_statistic_expectation(
    data_law: &Model,
    competitor: &Model,
    mix: &MixtureAlternative,
    n: usize,
) -> Result<Estimate> {
    match *data_law.family() {
        Family::Bernoulli => {
            // Any prior over i.i.d. Bernoulli draws is exchangeable, so the
            // log ratio depends on the data only through the count of ones.
            let p = data_law.theta()[0];
            let mut sum = NeumaierSum::default();
            for s in 0..=n {
                let mut values = vec![1.0; s];
                values.resize(n, 0.0);
                let x = Dataset::scalar(values);
                let log_weight = ln_binomial(n as u64, s as u64)
                    + s as f64 * p.ln()
                    + (n - s) as f64 * (-p).ln_1p();
                let ratio = competitor.log_density(&x)? - marginal_log_likelihood(mix, &x)?;
                sum.add(log_weight.exp() * ratio);
            }
            Ok(exact(sum.value()))
        }
        Family::GaussianKnownVar { variance, dim } => {
            if n == 0 {
                return Ok(exact(0.0));
            }
            if dim == 1 {
                return Ok(exact(gaussian_mean_expectation(
                    data_law.theta()[0],
                    competitor,
                    mix,
                    variance,
                    n,
                )?));
            }
            // Isotropic Gaussian prior and likelihood factor across
            // coordinates, and so does the log ratio.
            let PriorKind::Gaussian { mean, variance: tau2 } = &mix.prior().kind else {
                return Err(Error::Unsupported(
                    "multivariate sufficient-statistic expectation needs a gaussian prior".into(),
                ));
            };
            let family = Family::GaussianKnownVar { variance, dim: 1 };
            let mut total = 0.0;
            for j in 0..dim {
                let mix_j = MixtureAlternative::new(family, PriorSpec::gaussian(vec![mean[j]], *tau2))?;
                let competitor_j = Model::gaussian(vec![competitor.theta()[j]], variance)?;
                total += gaussian_mean_expectation(data_law.theta()[j], &competitor_j, &mix_j, variance, n)?;
            }
            Ok(exact(total))
        }
        Family::Exponential => Err(Error::Unsupported(
            "sufficient-statistic expectations are not implemented for the exponential family".into(),
        )),
    }
}

/// For one-dimensional Gaussian data the within-sample sum of squares
/// cancels between competitor and mixture, so the ratio is a function of the
/// sample mean, `x̄ ~ N(θ, σ²/n)`. Evaluated on a constant dataset at each
/// Gauss–Hermite node.
fn gaussian_mean_expectation(
    theta: f64,
    competitor: &Model,
    mix: &MixtureAlternative,
    sigma2: f64,
    n: usize,
) -> Result<f64> {
    let (nodes, weights) = gauss_hermite_normal(HERMITE_NODES, theta, sigma2 / n as f64);
    let mut sum = NeumaierSum::default();
    for (xbar, w) in nodes.into_iter().zip(weights) {
        let x = Dataset::scalar(vec![xbar; n]);
        sum.add(w * (competitor.log_density(&x)? - marginal_log_likelihood(mix, &x)?));
    }
    Ok(sum.value())
}

/// Monte Carlo estimate of the left-hand side of the expansion.
pub fn empirical_expected_log_ratio(
    theta1: &Model,
    theta0: &Model,
    mix: &MixtureAlternative,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    expected_log_ratio(theta1, theta0, mix, n, &Expectation::MonteCarlo { reps, seed })
}

/// `E_θ[ln p(X^n|θ)/m1(X^n)]`, a KL divergence and hence nonnegative.
pub fn redundancy(theta: &Model, mix: &MixtureAlternative, n: usize, method: &Expectation) -> Result<Estimate> {
    expected_log_ratio(theta, theta, mix, n, method)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcConfig {
    pub theta1: Model,
    pub theta0: Model,
    pub mix: MixtureAlternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedundancyRow {
    pub n: usize,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    /// `empirical − predicted`.
    pub gap: f64,
    pub prediction: BcPrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyReport {
    pub rows: Vec<RedundancyRow>,
    pub method: Expectation,
}

impl RedundancyReport {
    /// `|gap|` at row `later` is below `|gap|` at row `earlier` by more than
    /// `k` combined standard errors.
    pub fn gap_shrinks(&self, earlier: usize, later: usize, k: f64) -> bool {
        let (a, b) = (&self.rows[earlier], &self.rows[later]);
        let combined = (a.se * a.se + b.se * b.se).sqrt();
        a.gap.abs() - b.gap.abs() > k * combined
    }

    pub fn abs_gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap.abs()).collect()
    }
}

/// Empirical versus predicted expectation across an increasing `n_grid`.
/// Monte Carlo runs use a distinct seed stream per grid point.
pub fn bc_convergence_report(
    config: &BcConfig,
    n_grid: &[usize],
    method: &Expectation,
) -> Result<RedundancyReport> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_grid must be non-empty and strictly increasing".into()));
    }
    check_bc_inputs(&config.theta1, &config.theta0, &config.mix)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let prediction = bc_prediction(&config.theta1, &config.theta0, &config.mix, n)?;
        let point_method = match *method {
            Expectation::MonteCarlo { reps, seed } => Expectation::MonteCarlo {
                reps,
                seed: crate::montecarlo::child_seed(seed, i as u64),
            },
            other => other,
        };
        let est = expected_log_ratio(&config.theta1, &config.theta0, &config.mix, n, &point_method)?;
        rows.push(RedundancyRow {
            n,
            empirical: est.value,
            se: est.std_error,
            predicted: prediction.total,
            gap: est.value - prediction.total,
            prediction,
        });
    }
    Ok(RedundancyReport {
        rows,
        method: *method,
    })
}
