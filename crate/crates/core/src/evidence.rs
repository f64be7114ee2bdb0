//! Typed e-values.
//!
//! A likelihood ratio only becomes an e-value once a probability law
//! certifies its unit moment. `B10 = p1/p0` satisfies `E_{H0}[B10] = 1` and
//! controls Type I error; its reciprocal `B01` satisfies `E_{H1}[B01] = 1` and
//! controls Type II error. [`CertifiedEValue`] carries the certifying law with
//! the value, and its label is derived from that law, so a `B01` certified by
//! the null cannot be built.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::{marginal_log_likelihood, MixtureAlternative};
use crate::enumerate::{Enumeration, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::models::{Dataset, Family, Model};
use crate::montecarlo::replicate;
use crate::numeric::{
    clopper_pearson_upper, mean_and_std_error, NeumaierSum, ACCUMULATION_TOLERANCE,
    LOG_TIE_TOLERANCE,
};

/// Confidence of the one-sided exact binomial limit behind every Monte Carlo
/// pass/fail decision.
pub const MC_CONFIDENCE: f64 = 0.99;

/// The alternative hypothesis: a single law, or a prior-induced mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Simple(Model),
    Mixture(MixtureAlternative),
}

impl Alternative {
    pub fn family(&self) -> &Family {
        match self {
            Alternative::Simple(m) => m.family(),
            Alternative::Mixture(mix) => mix.family(),
        }
    }

    /// `ln p(x^n | H1)`: the density, or the marginal likelihood.
    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        match self {
            Alternative::Simple(m) => m.log_density(data),
            Alternative::Mixture(mix) => marginal_log_likelihood(mix, data),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Dataset {
        match self {
            Alternative::Simple(m) => m.sample_with(rng, n),
            Alternative::Mixture(mix) => mix.sample_with(rng, n),
        }
    }

    pub fn certifier(&self) -> Certifier {
        match self {
            Alternative::Simple(m) => Certifier::SimpleAlt(m.clone()),
            Alternative::Mixture(mix) => Certifier::MixtureAlt(mix.clone()),
        }
    }
}

impl From<Model> for Alternative {
    fn from(m: Model) -> Self {
        Alternative::Simple(m)
    }
}

impl From<MixtureAlternative> for Alternative {
    fn from(mix: MixtureAlternative) -> Self {
        Alternative::Mixture(mix)
    }
}

/// The governing measure under which a unit-moment condition holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certifier {
    Null(Model),
    SimpleAlt(Model),
    MixtureAlt(MixtureAlternative),
}

impl fmt::Display for Certifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certifier::Null(m) => write!(f, "P_H0 = {m}"),
            Certifier::SimpleAlt(m) => write!(f, "P_H1 = {m}"),
            Certifier::MixtureAlt(mix) => write!(f, "P_pi1 = {mix}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    B10,
    B01,
}

/// Which side of the duality a likelihood ratio is certified for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `B10` under `P_H0`: Type I control.
    ForNull,
    /// `B01` under `P_H1` (or the mixture): Type II control.
    ForAlt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCertified", into = "RawCertified")]
pub struct CertifiedEValue {
    log_value: f64,
    certifier: Certifier,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCertified {
    log_value: f64,
    label: Label,
    certifier: Certifier,
}

impl TryFrom<RawCertified> for CertifiedEValue {
    type Error = Error;
    fn try_from(raw: RawCertified) -> Result<Self> {
        CertifiedEValue::new(raw.log_value, raw.certifier, raw.label)
    }
}

impl From<CertifiedEValue> for RawCertified {
    fn from(e: CertifiedEValue) -> Self {
        RawCertified {
            label: e.label(),
            log_value: e.log_value,
            certifier: e.certifier,
        }
    }
}

impl CertifiedEValue {
    /// Validating constructor: `B10` requires the null as certifier, `B01` an
    /// alternative.
    pub fn new(log_value: f64, certifier: Certifier, label: Label) -> Result<Self> {
        let expected = label_for(&certifier);
        if expected != label {
            return Err(Error::InvalidArgument(format!(
                "{label:?} cannot be certified by {certifier}"
            )));
        }
        if log_value.is_nan() {
            return Err(Error::InvalidArgument("log evidence is NaN".into()));
        }
        Ok(CertifiedEValue {
            log_value,
            certifier,
        })
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    pub fn certifier(&self) -> &Certifier {
        &self.certifier
    }

    pub fn label(&self) -> Label {
        label_for(&self.certifier)
    }

    pub fn direction(&self) -> Direction {
        match self.label() {
            Label::B10 => Direction::ForNull,
            Label::B01 => Direction::ForAlt,
        }
    }

    /// The underlying `ln B10`, whichever side this value is certified for.
    pub fn log_b10(&self) -> f64 {
        match self.label() {
            Label::B10 => self.log_value,
            Label::B01 => -self.log_value,
        }
    }

    /// Markov exceedance `value ≥ 1/level`, decided in log space with ties
    /// counted as exceedances.
    pub fn exceeds(&self, level: f64) -> bool {
        exceeds_level(self.log_value, level)
    }
}

fn label_for(certifier: &Certifier) -> Label {
    match certifier {
        Certifier::Null(_) => Label::B10,
        Certifier::SimpleAlt(_) | Certifier::MixtureAlt(_) => Label::B01,
    }
}

pub(crate) fn exceeds_level(log_value: f64, level: f64) -> bool {
    log_value >= -level.ln() - LOG_TIE_TOLERANCE
}

/// `ln B10 = ln p(x^n | H1) − ln p(x^n | H0)`. Infinite values are allowed
/// when exactly one side has zero density.
pub fn bayes_factor(alt: &Alternative, null: &Model, data: &Dataset) -> Result<f64> {
    check_pair(null, alt)?;
    let (l0, l1) = (null.log_density(data)?, alt.log_likelihood(data)?);
    log_ratio(l1, l0)
}

fn log_ratio(numerator: f64, denominator: f64) -> Result<f64> {
    if numerator == f64::NEG_INFINITY && denominator == f64::NEG_INFINITY {
        return Err(Error::ZeroUnderBoth { index: 0 });
    }
    Ok(numerator - denominator)
}

fn check_pair(null: &Model, alt: &Alternative) -> Result<()> {
    if null.family() != alt.family() {
        return Err(Error::FamilyMismatch(format!(
            "null {} and alternative {} must share a family",
            null.family().name(),
            alt.family().name()
        )));
    }
    Ok(())
}

/// Binds `ln B10` to a certifying measure. `ForAlt` inverts in log space.
pub fn certify(log_b10: f64, direction: Direction, null: &Model, alt: &Alternative) -> CertifiedEValue {
    match direction {
        Direction::ForNull => CertifiedEValue {
            log_value: log_b10,
            certifier: Certifier::Null(null.clone()),
        },
        Direction::ForAlt => CertifiedEValue {
            log_value: -log_b10,
            certifier: alt.certifier(),
        },
    }
}

/// How an expectation or probability is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Exact summation over the finite sample space.
    Enumerate {
        #[serde(default = "default_cap")]
        cap: u64,
    },
    /// Seeded replicates drawn from the certifying law. For a mixture each
    /// replicate draws its own `θ`.
    MonteCarlo { reps: usize, seed: u64 },
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl Method {
    pub fn enumerate() -> Self {
        Method::Enumerate {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn monte_carlo(reps: usize, seed: u64) -> Self {
        Method::MonteCarlo { reps, seed }
    }
}

/// A likelihood-ratio e-value family: which pair, which side, how many
/// observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSpec {
    pub null: Model,
    pub alt: Alternative,
    pub direction: Direction,
    pub n: usize,
}

impl EvidenceSpec {
    pub fn new(null: Model, alt: impl Into<Alternative>, direction: Direction, n: usize) -> Result<Self> {
        let alt = alt.into();
        check_pair(&null, &alt)?;
        Ok(EvidenceSpec {
            null,
            alt,
            direction,
            n,
        })
    }

    pub fn certifier(&self) -> Certifier {
        match self.direction {
            Direction::ForNull => Certifier::Null(self.null.clone()),
            Direction::ForAlt => self.alt.certifier(),
        }
    }

    pub fn certify(&self, data: &Dataset) -> Result<CertifiedEValue> {
        let lb = bayes_factor(&self.alt, &self.null, data)?;
        Ok(certify(lb, self.direction, &self.null, &self.alt))
    }

    /// `(ln value, ln density under the certifier)` for one outcome, or
    /// `None` when the outcome is impossible under both laws.
    fn evaluate(&self, data: &Dataset) -> Result<Option<(f64, f64)>> {
        let l0 = self.null.log_density(data)?;
        let l1 = self.alt.log_likelihood(data)?;
        if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
            return Ok(None);
        }
        Ok(Some(match self.direction {
            Direction::ForNull => (l1 - l0, l0),
            Direction::ForAlt => (l0 - l1, l1),
        }))
    }

    fn sample_certifier<R: Rng + ?Sized>(&self, rng: &mut R) -> Dataset {
        match self.direction {
            Direction::ForNull => self.null.sample_with(rng, self.n),
            Direction::ForAlt => self.alt.sample_with(rng, self.n),
        }
    }

    fn log_value(&self, data: &Dataset) -> Result<f64> {
        let lb = bayes_factor(&self.alt, &self.null, data)?;
        Ok(match self.direction {
            Direction::ForNull => lb,
            Direction::ForAlt => -lb,
        })
    }

    /// `(ln value, ln certifier density)` over the whole sample space.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<(f64, f64)>> {
        let enumeration = Enumeration::new(self.null.family(), self.n, cap)?;
        let mut out = Vec::with_capacity(enumeration.len() as usize);
        for x in enumeration.iter() {
            if let Some(pair) = self.evaluate(&x)? {
                out.push(pair);
            }
        }
        Ok(out)
    }

    /// `ln value` of `reps` seeded draws from the certifying law.
    pub fn monte_carlo(&self, reps: usize, seed: u64) -> Result<Vec<f64>> {
        replicate(seed, reps, |rng, _| {
            let x = self.sample_certifier(rng);
            self.log_value(&x)
        })
        .into_iter()
        .collect()
    }
}

/// Estimate of `E_certifier[value]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub certifier: String,
    pub direction: Direction,
    pub n: usize,
    pub mean: f64,
    /// `None` for exact enumeration.
    pub std_error: Option<f64>,
    pub exact: bool,
    /// Outcomes enumerated or replicates drawn.
    pub samples: u64,
}

impl MomentReport {
    /// Pass rule for a unit-moment claim: within `tolerance` when exact,
    /// within `k_se` standard errors otherwise.
    pub fn agrees_with(&self, target: f64, tolerance: f64, k_se: f64) -> bool {
        match self.std_error {
            None => (self.mean - target).abs() <= tolerance,
            Some(se) => (self.mean - target).abs() <= k_se * se + tolerance,
        }
    }
}

pub fn unit_moment_check(spec: &EvidenceSpec, method: &Method) -> Result<MomentReport> {
    let certifier = spec.certifier().to_string();
    match *method {
        Method::Enumerate { cap } => {
            let pairs = spec.enumerate(cap)?;
            let mut sum = NeumaierSum::default();
            for &(lv, lw) in &pairs {
                if lw > f64::NEG_INFINITY {
                    sum.add((lw + lv).exp());
                }
            }
            Ok(MomentReport {
                certifier,
                direction: spec.direction,
                n: spec.n,
                mean: sum.value(),
                std_error: None,
                exact: true,
                samples: pairs.len() as u64,
            })
        }
        Method::MonteCarlo { reps, seed } => {
            require_reps(reps, 2)?;
            let values: Vec<f64> = spec.monte_carlo(reps, seed)?.into_iter().map(f64::exp).collect();
            let (mean, se) = mean_and_std_error(&values);
            Ok(MomentReport {
                certifier,
                direction: spec.direction,
                n: spec.n,
                mean,
                std_error: Some(se),
                exact: false,
                samples: reps as u64,
            })
        }
    }
}

fn require_reps(reps: usize, min: usize) -> Result<()> {
    if reps < min {
        return Err(Error::InvalidArgument(format!(
            "monte carlo needs at least {min} replicates, got {reps}"
        )));
    }
    Ok(())
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must lie in (0, 1], got {level}"
        )));
    }
    Ok(())
}

/// Outcome of testing `P_certifier(value ≥ 1/level) ≤ level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub certifier: String,
    pub level: f64,
    /// `1/level`.
    pub threshold: f64,
    /// Exact probability, or the Monte Carlo frequency.
    pub exceed_prob: f64,
    pub exceedances: Option<u64>,
    pub trials: Option<u64>,
    /// One-sided exact binomial upper limit at [`MC_CONFIDENCE`].
    pub ci_upper: Option<f64>,
    pub bound: f64,
    pub exact: bool,
    pub pass: bool,
    pub rule: String,
}

impl BoundReport {
    pub fn exact(certifier: String, level: f64, exceed_prob: f64) -> Self {
        BoundReport {
            certifier,
            level,
            threshold: 1.0 / level,
            exceed_prob,
            exceedances: None,
            trials: None,
            ci_upper: None,
            bound: level,
            exact: true,
            pass: exceed_prob <= level + ACCUMULATION_TOLERANCE,
            rule: format!("exact exceedance probability <= level (+{ACCUMULATION_TOLERANCE:e} accumulation slack)"),
        }
    }

    pub fn from_counts(certifier: String, level: f64, exceedances: u64, trials: u64) -> Self {
        let upper = clopper_pearson_upper(exceedances, trials, MC_CONFIDENCE);
        BoundReport {
            certifier,
            level,
            threshold: 1.0 / level,
            exceed_prob: exceedances as f64 / trials as f64,
            exceedances: Some(exceedances),
            trials: Some(trials),
            ci_upper: Some(upper),
            bound: level,
            exact: false,
            pass: upper <= level,
            rule: "one-sided 99% Clopper-Pearson upper limit <= level".into(),
        }
    }
}

pub fn markov_bound_check(spec: &EvidenceSpec, level: f64, method: &Method) -> Result<BoundReport> {
    check_level(level)?;
    let certifier = spec.certifier().to_string();
    match *method {
        Method::Enumerate { cap } => {
            let pairs = spec.enumerate(cap)?;
            let mut prob = NeumaierSum::default();
            for &(lv, lw) in &pairs {
                if exceeds_level(lv, level) && lw > f64::NEG_INFINITY {
                    prob.add(lw.exp());
                }
            }
            Ok(BoundReport::exact(certifier, level, prob.value()))
        }
        Method::MonteCarlo { reps, seed } => {
            require_reps(reps, 1)?;
            let k = spec
                .monte_carlo(reps, seed)?
                .into_iter()
                .filter(|&lv| exceeds_level(lv, level))
                .count();
            Ok(BoundReport::from_counts(certifier, level, k as u64, reps as u64))
        }
    }
}

/// Markov check for an arbitrary nonnegative statistic with
/// `E_certifier[E] ≤ 1`, given exact `(ln E, probability)` atoms.
pub fn markov_bound_from_atoms(certifier: String, atoms: &[(f64, f64)], level: f64) -> Result<BoundReport> {
    check_level(level)?;
    let prob: NeumaierSum = atoms
        .iter()
        .filter(|(lv, _)| exceeds_level(*lv, level))
        .map(|(_, p)| *p)
        .collect();
    Ok(BoundReport::exact(certifier, level, prob.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair() -> (Model, Model) {
        (Model::bernoulli(0.5).unwrap(), Model::bernoulli(0.7).unwrap())
    }

    #[test]
    fn bayes_factor_examples() {
        let (null, alt) = pair();
        let alt = Alternative::Simple(alt);
        let lb = bayes_factor(&alt, &null, &Dataset::scalar(vec![1.0])).unwrap();
        assert_relative_eq!(lb, 0.336_472_236_621_212_9, epsilon = 1e-12);
        let lb = bayes_factor(&alt, &null, &Dataset::scalar(vec![1.0, 0.0])).unwrap();
        assert_relative_eq!(lb, (0.21f64 / 0.25).ln(), epsilon = 1e-12);
        assert_relative_eq!(lb, -0.174_353_387_144_778, epsilon = 1e-12);
        let same = Alternative::Simple(null.clone());
        assert_eq!(bayes_factor(&same, &null, &Dataset::scalar(vec![1.0, 0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn bayes_factor_infinite_when_null_density_vanishes() {
        let null = Model::exponential(1.0).unwrap();
        let alt = Alternative::Simple(Model::exponential(2.0).unwrap());
        let err = bayes_factor(&alt, &null, &Dataset::scalar(vec![-1.0])).unwrap_err();
        assert!(matches!(err, Error::ZeroUnderBoth { .. }));
    }

    #[test]
    fn certify_examples() {
        let (null, alt) = pair();
        let alt = Alternative::Simple(alt);
        let e = certify(0.0, Direction::ForAlt, &null, &alt);
        assert_eq!(e.log_value(), 0.0);
        assert!(matches!(e.certifier(), Certifier::SimpleAlt(_)));
        let l20 = 20f64.ln();
        let e = certify(l20, Direction::ForAlt, &null, &alt);
        assert_eq!(e.log_value(), -l20);
        assert_eq!(e.label(), Label::B01);
        let e = certify(l20, Direction::ForNull, &null, &alt);
        assert_eq!(e.log_value(), l20);
        assert_eq!(e.label(), Label::B10);
        assert!(matches!(e.certifier(), Certifier::Null(_)));
    }

    #[test]
    fn b01_certified_by_null_is_rejected() {
        let (null, _) = pair();
        let err = CertifiedEValue::new(-1.0, Certifier::Null(null.clone()), Label::B01);
        assert!(err.is_err());
        let json = r#"{"log_value":-1.0,"label":"B01","certifier":{"null":{"family":"bernoulli","theta":[0.5]}}}"#;
        assert!(serde_json::from_str::<CertifiedEValue>(json).is_err());
        let ok = r#"{"log_value":-1.0,"label":"B10","certifier":{"null":{"family":"bernoulli","theta":[0.5]}}}"#;
        assert!(serde_json::from_str::<CertifiedEValue>(ok).is_ok());
    }

    #[test]
    fn alt_equal_null_has_unit_moment_exactly() {
        let (null, _) = pair();
        for n in [0, 3, 8] {
            let spec = EvidenceSpec::new(null.clone(), null.clone(), Direction::ForAlt, n).unwrap();
            let r = unit_moment_check(&spec, &Method::enumerate()).unwrap();
            assert_relative_eq!(r.mean, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn vacuous_level_passes() {
        let (null, alt) = pair();
        let spec = EvidenceSpec::new(null, alt, Direction::ForNull, 10).unwrap();
        let r = markov_bound_check(&spec, 1.0, &Method::enumerate()).unwrap();
        assert!(r.pass);
        assert_eq!(r.threshold, 1.0);
        let r = markov_bound_check(&spec, 1.0, &Method::monte_carlo(500, 3)).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn level_outside_unit_interval_is_rejected() {
        let (null, alt) = pair();
        let spec = EvidenceSpec::new(null, alt, Direction::ForNull, 4).unwrap();
        assert!(markov_bound_check(&spec, 0.0, &Method::enumerate()).is_err());
        assert!(markov_bound_check(&spec, 1.5, &Method::enumerate()).is_err());
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let (null, alt) = pair();
        let spec = EvidenceSpec::new(null, alt, Direction::ForNull, 12).unwrap();
        let err = unit_moment_check(&spec, &Method::Enumerate { cap: 1024 }).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { cap: 1024, .. }));
    }

    #[test]
    fn sub_unit_moment_statistics_are_accepted() {
        // E = 0.5 * B10 has E_H0[E] = 1/2.
        let (null, alt) = pair();
        let spec = EvidenceSpec::new(null, alt, Direction::ForNull, 6).unwrap();
        let atoms: Vec<(f64, f64)> = spec
            .enumerate(DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .into_iter()
            .map(|(lv, lw)| (lv - 2f64.ln(), lw.exp()))
            .collect();
        let r = markov_bound_from_atoms("P_H0".into(), &atoms, 0.1).unwrap();
        assert!(r.pass);
    }
}
