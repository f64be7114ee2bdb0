//! Likelihood-ratio e-processes `B_t = Π_{s≤t} p1(x_s)/p0(x_s)`.
//!
//! `B_t` is a martingale under `P0` and `1/B_t` is a martingale under `P1`,
//! so Ville's inequality bounds the probability that `B_t` ever reaches
//! `1/α` under the null. Under the alternative `(1/t)·ln B_t → KL(P1‖P0)`.
//! Against a Bayesian mixture `R`, the log ratio `ln Q(x^t)/R(x^t)` of any
//! fixed competitor `Q` stays bounded on typical paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::{check_same_family, MixtureAlternative};
use crate::error::{Error, Result};
use crate::evidence::{unit_moment_check, BoundReport, Direction, EvidenceSpec, Method, MomentReport};
use crate::models::{kl_divergence, Dataset, Family, Model};
use crate::montecarlo::{child_seed, replicate, replicate_rng};
use crate::numeric::{gauss_legendre, mean_and_std_error, median, NeumaierSum, LOG_TIE_TOLERANCE};

/// Relative half-width of the band around the KL rate.
pub const KL_RATE_BAND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopKind {
    /// Stop the first time `B_t ≥ 1/alpha`.
    FirstCrossing { alpha: f64 },
    FixedHorizon { horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    kind: StopKind,
    horizon_cap: usize,
}

impl StoppingRule {
    pub fn new(kind: StopKind, horizon_cap: usize) -> Result<Self> {
        if horizon_cap == 0 {
            return Err(Error::InvalidArgument("horizon cap must be at least 1".into()));
        }
        if let StopKind::FirstCrossing { alpha } = kind {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "crossing level must lie in (0, 1), got {alpha}"
                )));
            }
        }
        Ok(StoppingRule { kind, horizon_cap })
    }

    pub fn first_crossing(alpha: f64, horizon_cap: usize) -> Result<Self> {
        Self::new(StopKind::FirstCrossing { alpha }, horizon_cap)
    }

    pub fn fixed_horizon(horizon: usize) -> Result<Self> {
        Self::new(StopKind::FixedHorizon { horizon }, horizon.max(1))
    }

    pub fn kind(&self) -> StopKind {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        match self.kind {
            StopKind::FixedHorizon { horizon } => horizon.min(self.horizon_cap),
            StopKind::FirstCrossing { .. } => self.horizon_cap,
        }
    }

    fn crossing_log_level(&self) -> Option<f64> {
        match self.kind {
            StopKind::FirstCrossing { alpha } => Some(-alpha.ln() - LOG_TIE_TOLERANCE),
            StopKind::FixedHorizon { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ThresholdCrossed,
    HorizonReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EProcessTrace {
    /// `ln B_t` for `t = 0..=T`, with `log_b[0] = 0`.
    pub log_b: Vec<f64>,
    pub observations: Dataset,
    /// The crossing time, when the threshold was reached.
    pub stop_time: Option<usize>,
    pub stop_reason: StopReason,
}

fn check_pair(null: &Model, alt: &Model) -> Result<()> {
    if null.family() != alt.family() {
        return Err(Error::FamilyMismatch(format!("{null} vs {alt}")));
    }
    Ok(())
}

/// `ln p1(x) − ln p0(x)` for one observation.
pub fn one_step_log_ratio(null: &Model, alt: &Model, x: &[f64]) -> Result<f64> {
    let domain = || Error::Domain {
        family: null.family().name(),
        index: 0,
        value: x.to_vec(),
    };
    let l0 = null.log_density_one(x).map_err(|_| domain())?;
    let l1 = alt.log_density_one(x).map_err(|_| domain())?;
    if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
        return Err(Error::ZeroUnderBoth { index: 0 });
    }
    Ok(l1 - l0)
}

fn run_with<R: Rng + ?Sized>(
    rng: &mut R,
    null: &Model,
    alt: &Model,
    truth: &Model,
    rule: &StoppingRule,
) -> Result<EProcessTrace> {
    let horizon = rule.horizon();
    let level = rule.crossing_log_level();
    let mut log_b = Vec::with_capacity(horizon + 1);
    log_b.push(0.0);
    let mut obs = Vec::with_capacity(horizon * truth.dim());
    if level.is_some_and(|l| 0.0 >= l) {
        return Ok(EProcessTrace {
            log_b,
            observations: Dataset::new(truth.dim(), obs)?,
            stop_time: Some(0),
            stop_reason: StopReason::ThresholdCrossed,
        });
    }
    let mut current = 0.0;
    for t in 1..=horizon {
        let start = obs.len();
        truth.draw_into(rng, &mut obs);
        current += one_step_log_ratio(null, alt, &obs[start..])?;
        log_b.push(current);
        if level.is_some_and(|l| current >= l) {
            return Ok(EProcessTrace {
                log_b,
                observations: Dataset::new(truth.dim(), obs)?,
                stop_time: Some(t),
                stop_reason: StopReason::ThresholdCrossed,
            });
        }
    }
    Ok(EProcessTrace {
        log_b,
        observations: Dataset::new(truth.dim(), obs)?,
        stop_time: None,
        stop_reason: StopReason::HorizonReached,
    })
}

/// Streams observations from `truth` and accumulates `ln B_t` until the rule
/// stops.
pub fn run_eprocess(
    null: &Model,
    alt: &Model,
    truth: &Model,
    rule: &StoppingRule,
    seed: u64,
) -> Result<EProcessTrace> {
    check_pair(null, alt)?;
    check_pair(null, truth)?;
    run_with(&mut replicate_rng(seed, 0), null, alt, truth, rule)
}

/// `ln B_t` along a fixed observation sequence.
pub fn log_b_path(null: &Model, alt: &Model, observations: &Dataset) -> Result<Vec<f64>> {
    check_pair(null, alt)?;
    let mut out = Vec::with_capacity(observations.len() + 1);
    let mut current = 0.0;
    out.push(current);
    for x in observations.observations() {
        current += one_step_log_ratio(null, alt, x)?;
        out.push(current);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMoment {
    pub t: usize,
    /// `E_{P0}[B_t]`.
    pub under_null: MomentReport,
    /// `E_{P1}[1/B_t]`.
    pub under_alt: MomentReport,
}

/// Unit moments of `B_t` under `P0` and of `1/B_t` under `P1` for every
/// `t ≤ t_max`.
pub fn stepwise_moment_check(
    null: &Model,
    alt: &Model,
    t_max: usize,
    method: &Method,
) -> Result<Vec<StepMoment>> {
    check_pair(null, alt)?;
    match *method {
        Method::Enumerate { .. } => (1..=t_max)
            .map(|t| {
                let under = |direction| {
                    let spec = EvidenceSpec::new(null.clone(), alt.clone(), direction, t)?;
                    unit_moment_check(&spec, method)
                };
                Ok(StepMoment {
                    t,
                    under_null: under(Direction::ForNull)?,
                    under_alt: under(Direction::ForAlt)?,
                })
            })
            .collect(),
        Method::MonteCarlo { reps, seed } => {
            if reps < 2 {
                return Err(Error::InvalidArgument("monte carlo needs at least 2 replicates".into()));
            }
            let rule = StoppingRule::fixed_horizon(t_max)?;
            let paths = |truth: &Model, tag: u64| -> Result<Vec<Vec<f64>>> {
                replicate(child_seed(seed, tag), reps, |rng, _| {
                    run_with(rng, null, alt, truth, &rule).map(|tr| tr.log_b)
                })
                .into_iter()
                .collect()
            };
            let null_paths = paths(null, 0)?;
            let alt_paths = paths(alt, 1)?;
            let report = |paths: &[Vec<f64>], t: usize, sign: f64, direction, law: &Model| {
                let values: Vec<f64> = paths.iter().map(|p| (sign * p[t]).exp()).collect();
                let (mean, se) = mean_and_std_error(&values);
                MomentReport {
                    certifier: match direction {
                        Direction::ForNull => format!("P_H0 = {law}"),
                        Direction::ForAlt => format!("P_H1 = {law}"),
                    },
                    direction,
                    n: t,
                    mean,
                    std_error: Some(se),
                    exact: false,
                    samples: reps as u64,
                }
            };
            Ok((1..=t_max)
                .map(|t| StepMoment {
                    t,
                    under_null: report(&null_paths, t, 1.0, Direction::ForNull, null),
                    under_alt: report(&alt_paths, t, -1.0, Direction::ForAlt, alt),
                })
                .collect())
        }
    }
}

/// `E_{P0}[p1(X)/p0(X)]` for a single observation, by summation over a
/// finite space or quadrature of `p0 · (p1/p0)` over the real line.
pub fn one_step_moment(null: &Model, alt: &Model) -> Result<f64> {
    check_pair(null, alt)?;
    if let Some(support) = null.family().finite_support() {
        let mut sum = NeumaierSum::default();
        for &x in support {
            let l0 = null.log_density_one(&[x]).expect("support point");
            let lr = one_step_log_ratio(null, alt, &[x])?;
            sum.add(l0.exp() * lr.exp());
        }
        return Ok(sum.value());
    }
    match *null.family() {
        Family::GaussianKnownVar { variance, .. } => {
            // The ratio factors across coordinates.
            let sd = variance.sqrt();
            let mut product = 1.0;
            for (m0, m1) in null.theta().iter().zip(alt.theta()) {
                let n0 = Model::gaussian(vec![*m0], variance)?;
                let n1 = Model::gaussian(vec![*m1], variance)?;
                let lo = m0.min(*m1) - 40.0 * sd;
                let hi = m0.max(*m1) + 40.0 * sd;
                product *= integrate_lr(&n0, &n1, lo, hi)?;
            }
            Ok(product)
        }
        Family::Exponential => {
            let slowest = null.theta()[0].min(alt.theta()[0]);
            integrate_lr(null, alt, 0.0, 80.0 / slowest)
        }
        Family::Bernoulli => unreachable!("finite support handled above"),
    }
}

fn integrate_lr(null: &Model, alt: &Model, lower: f64, upper: f64) -> Result<f64> {
    const PANELS: usize = 400;
    const NODES: usize = 16;
    let width = (upper - lower) / PANELS as f64;
    let mut sum = NeumaierSum::default();
    for p in 0..PANELS {
        let a = lower + p as f64 * width;
        let (xs, ws) = gauss_legendre(NODES, a, a + width);
        for (x, w) in xs.into_iter().zip(ws) {
            let l0 = null.log_density_one(&[x]).expect("finite point");
            let lr = one_step_log_ratio(null, alt, &[x])?;
            sum.add(w * l0.exp() * lr.exp());
        }
    }
    Ok(sum.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheckpoint {
    pub t: usize,
    /// Mean over trajectories of `(1/t)·ln B_t`.
    pub mean_rate: f64,
    pub std_error: f64,
    /// Share of trajectories with `|(1/t)·ln B_t − KL| ≤ band·KL`.
    pub fraction_within_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub target_kl: f64,
    pub band: f64,
    pub t_max: usize,
    pub reps: usize,
    pub checkpoints: Vec<RateCheckpoint>,
}

impl RateReport {
    pub fn at_t_max(&self) -> &RateCheckpoint {
        self.checkpoints.last().expect("t_max is always a checkpoint")
    }

    /// Mean rate at `t_max` within the band around the KL target.
    pub fn mean_within_band(&self) -> bool {
        (self.at_t_max().mean_rate - self.target_kl).abs() <= self.band * self.target_kl
    }
}

fn checkpoints(t_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = 10;
    while t < t_max {
        out.push(t);
        t *= 10;
    }
    out.push(t_max);
    out
}

/// Trajectories drawn from the alternative; `(1/t)·ln B_t` against
/// `KL(P1‖P0)` at decade checkpoints and at `t_max`.
pub fn kl_rate_check(null: &Model, alt: &Model, t_max: usize, reps: usize, seed: u64) -> Result<RateReport> {
    check_pair(null, alt)?;
    if t_max == 0 || reps < 2 {
        return Err(Error::InvalidArgument("kl rate check needs t_max >= 1 and reps >= 2".into()));
    }
    let target_kl = kl_divergence(alt, null)?;
    let marks = checkpoints(t_max);
    let rule = StoppingRule::fixed_horizon(t_max)?;
    let rates: Vec<Vec<f64>> = replicate(seed, reps, |rng, _| {
        run_with(rng, null, alt, alt, &rule).map(|tr| marks.iter().map(|&t| tr.log_b[t] / t as f64).collect())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let checkpoints = marks
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let values: Vec<f64> = rates.iter().map(|r| r[i]).collect();
            let (mean_rate, std_error) = mean_and_std_error(&values);
            let within = values
                .iter()
                .filter(|&&r| (r - target_kl).abs() <= KL_RATE_BAND * target_kl)
                .count();
            RateCheckpoint {
                t,
                mean_rate,
                std_error,
                fraction_within_band: within as f64 / reps as f64,
            }
        })
        .collect();
    Ok(RateReport {
        target_kl,
        band: KL_RATE_BAND,
        t_max,
        reps,
        checkpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementStat {
    pub t: usize,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementReport {
    pub t_max: usize,
    pub reps: usize,
    /// Mean one-step change of `ln Q(x^t)/R(x^t)` across trajectories.
    pub increments: Vec<IncrementStat>,
    /// Per trajectory, `max_{1≤t≤t_max} ln Q(x^t)/R(x^t)`.
    pub max_log_ratio: Vec<f64>,
    /// Per trajectory, `ln B01` at `t_max`.
    pub terminal_log_b01: Vec<f64>,
    pub median_terminal: f64,
    pub max_terminal: f64,
}

impl IncrementReport {
    pub fn all_terminal_negative(&self) -> bool {
        self.terminal_log_b01.iter().all(|&v| v < 0.0)
    }
}

/// Competitor `Q = null` against the mixture `R`, on data drawn from
/// `theta`. `R(x^t)` is advanced with one-step posterior predictives.
pub fn dawid_supermartingale_check(
    null: &Model,
    mix: &MixtureAlternative,
    theta: &Model,
    t_max: usize,
    reps: usize,
    seed: u64,
) -> Result<IncrementReport> {
    check_same_family(null, mix)?;
    check_same_family(theta, mix)?;
    if !mix.param_space().contains(theta.theta()) {
        return Err(Error::InvalidArgument(format!(
            "{theta} lies outside the prior support {}",
            mix.param_space()
        )));
    }
    if t_max == 0 || reps < 2 {
        return Err(Error::InvalidArgument("dawid check needs t_max >= 1 and reps >= 2".into()));
    }
    let paths: Vec<Vec<f64>> = replicate(seed, reps, |rng, _| -> Result<Vec<f64>> {
        let mut predictive = mix.predictive();
        let mut x = Vec::with_capacity(theta.dim());
        let mut increments = Vec::with_capacity(t_max);
        for _ in 0..t_max {
            x.clear();
            theta.draw_into(rng, &mut x);
            let lq = null.log_density_one(&x).map_err(|_| Error::Domain {
                family: null.family().name(),
                index: 0,
                value: x.clone(),
            })?;
            let lr = predictive.observe(&x)?;
            increments.push(lq - lr);
        }
        Ok(increments)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let increments = (0..t_max)
        .map(|t| {
            let values: Vec<f64> = paths.iter().map(|p| p[t]).collect();
            let (mean, std_error) = mean_and_std_error(&values);
            IncrementStat {
                t: t + 1,
                mean,
                std_error,
            }
        })
        .collect();
    let mut max_log_ratio = Vec::with_capacity(reps);
    let mut terminal_log_b01 = Vec::with_capacity(reps);
    for p in &paths {
        let mut current = 0.0;
        let mut best = f64::NEG_INFINITY;
        for inc in p {
            current += inc;
            best = best.max(current);
        }
        max_log_ratio.push(best);
        terminal_log_b01.push(current);
    }
    Ok(IncrementReport {
        t_max,
        reps,
        increments,
        median_terminal: median(&terminal_log_b01),
        max_terminal: terminal_log_b01.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        max_log_ratio,
        terminal_log_b01,
    })
}

/// Under the null, the frequency with which `sup_{t ≤ t_max} B_t ≥ 1/α`,
/// tested against `α` with the exact binomial upper limit. The running
/// supremum dominates every stopping rule.
pub fn optional_stopping_check(
    null: &Model,
    alt: &Model,
    alpha: f64,
    t_max: usize,
    reps: usize,
    seed: u64,
) -> Result<BoundReport> {
    check_pair(null, alt)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("optional stopping check needs replicates".into()));
    }
    let level = -alpha.ln() - LOG_TIE_TOLERANCE;
    let crossed: Vec<bool> = replicate(seed, reps, |rng, _| -> Result<bool> {
        if 0.0 >= level {
            return Ok(true);
        }
        let mut current = 0.0;
        let mut x = Vec::with_capacity(null.dim());
        for _ in 0..t_max {
            x.clear();
            null.draw_into(rng, &mut x);
            current += one_step_log_ratio(null, alt, &x)?;
            if current >= level {
                return Ok(true);
            }
        }
        Ok(false)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let k = crossed.iter().filter(|&&c| c).count() as u64;
    Ok(BoundReport::from_counts(
        format!("P_H0 = {null} (running supremum, t <= {t_max})"),
        alpha,
        k,
        reps as u64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair() -> (Model, Model) {
        (Model::bernoulli(0.5).unwrap(), Model::bernoulli(0.7).unwrap())
    }

    #[test]
    fn unit_process_when_alt_equals_null() {
        let (null, _) = pair();
        let rule = StoppingRule::first_crossing(0.05, 200).unwrap();
        let tr = run_eprocess(&null, &null, &null, &rule, 9).unwrap();
        assert!(tr.log_b.iter().all(|&v| v == 0.0));
        assert_eq!(tr.stop_reason, StopReason::HorizonReached);
        assert_eq!(tr.log_b.len(), 201);
        let r = optional_stopping_check(&null, &null, 0.05, 100, 200, 1).unwrap();
        assert_eq!(r.exceedances, Some(0));
    }

    #[test]
    fn trace_increments_are_one_step_ratios() {
        let (null, alt) = pair();
        let rule = StoppingRule::fixed_horizon(300).unwrap();
        let tr = run_eprocess(&null, &alt, &alt, &rule, 4).unwrap();
        assert_eq!(tr.log_b[0], 0.0);
        for t in 0..tr.observations.len() {
            let inc = one_step_log_ratio(&null, &alt, tr.observations.observation(t)).unwrap();
            assert_relative_eq!(tr.log_b[t + 1], tr.log_b[t] + inc, epsilon = 1e-12);
        }
        assert_eq!(log_b_path(&null, &alt, &tr.observations).unwrap(), tr.log_b);
    }

    #[test]
    fn first_crossing_stops_at_first_exceedance() {
        let (null, alt) = pair();
        let rule = StoppingRule::first_crossing(0.05, 5000).unwrap();
        let tr = run_eprocess(&null, &alt, &alt, &rule, 2).unwrap();
        let level = -(0.05f64).ln();
        let tau = tr.stop_time.expect("crosses under the alternative");
        assert_eq!(tr.stop_reason, StopReason::ThresholdCrossed);
        assert!(tr.log_b[tau] >= level - LOG_TIE_TOLERANCE);
        assert!(tr.log_b[..tau].iter().all(|&v| v < level - LOG_TIE_TOLERANCE));
        assert_eq!(tr.log_b.len(), tau + 1);
    }

    #[test]
    fn stopping_rule_validation() {
        assert!(StoppingRule::first_crossing(1.0, 10).is_err());
        assert!(StoppingRule::first_crossing(0.05, 0).is_err());
        assert!(StoppingRule::first_crossing(0.05, 1).is_ok());
    }

    #[test]
    fn one_step_moments_per_family() {
        let (null, alt) = pair();
        assert_relative_eq!(one_step_moment(&null, &alt).unwrap(), 1.0, epsilon = 1e-15);
        let g0 = Model::gaussian(vec![0.0, 1.0], 2.0).unwrap();
        let g1 = Model::gaussian(vec![1.5, -1.0], 2.0).unwrap();
        assert_relative_eq!(one_step_moment(&g0, &g1).unwrap(), 1.0, epsilon = 1e-10);
        let e0 = Model::exponential(1.0).unwrap();
        let e1 = Model::exponential(2.5).unwrap();
        assert_relative_eq!(one_step_moment(&e0, &e1).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(one_step_moment(&e1, &e0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn vacuous_alpha_crosses_immediately_and_passes() {
        let (null, alt) = pair();
        let r = optional_stopping_check(&null, &alt, 1.0, 10, 100, 5).unwrap();
        assert_eq!(r.exceedances, Some(100));
        assert!(r.pass);
    }

    #[test]
    fn zero_divergence_rate() {
        let (null, _) = pair();
        let r = kl_rate_check(&null, &null, 100, 10, 3).unwrap();
        assert_eq!(r.target_kl, 0.0);
        assert_eq!(r.at_t_max().mean_rate, 0.0);
        assert_eq!(r.at_t_max().fraction_within_band, 1.0);
    }

    #[test]
    fn dawid_point_mass_at_competitor_is_identically_zero() {
        let theta = Model::bernoulli(0.6).unwrap();
        let mix = MixtureAlternative::new(
            Family::Bernoulli,
            crate::composite::PriorSpec::point_mass(vec![0.6]),
        )
        .unwrap();
        let r = dawid_supermartingale_check(&theta, &mix, &theta, 50, 20, 8).unwrap();
        assert!(r.terminal_log_b01.iter().all(|&v| v == 0.0));
        assert!(r.increments.iter().all(|s| s.mean == 0.0));
    }

    #[test]
    fn dawid_rejects_theta_outside_support() {
        let family = Family::GaussianKnownVar { variance: 1.0, dim: 1 };
        let mix = MixtureAlternative::new(family, crate::composite::PriorSpec::gaussian(vec![0.0], 1.0)).unwrap();
        let other = Model::bernoulli(0.5).unwrap();
        assert!(dawid_supermartingale_check(&other, &mix, &other, 10, 10, 1).is_err());
    }
}
