//! Bayes risk `r(δ) = π0·c_I·α(δ) + π1·c_II·β(δ)` and its minimiser, the
//! likelihood-ratio threshold rule at `t* = π0·c_I / (π1·c_II)`.
//!
//! On a discrete sample space `B10` has finitely many atoms, the risk is a
//! step function of `t`, and the minimiser is a union of intervals between
//! consecutive atoms. Optimality of `t*` is therefore checked as membership
//! of that argmin set.

use serde::{Deserialize, Serialize};

use crate::enumerate::Enumeration;
use crate::error::{Error, Result};
use crate::evidence::{Alternative, Method};
use crate::models::Model;
use crate::montecarlo::{child_seed, replicate};
use crate::numeric::{NeumaierSum, LOG_TIE_TOLERANCE};

const PRIOR_SUM_TOLERANCE: f64 = 1e-12;
const RISK_TIE_TOLERANCE: f64 = 1e-12;

/// Priors and loss weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRiskSpec")]
pub struct RiskSpec {
    pi0: f64,
    pi1: f64,
    c1: f64,
    c2: f64,
}

#[derive(Deserialize)]
struct RawRiskSpec {
    pi0: f64,
    pi1: f64,
    c1: f64,
    c2: f64,
}

impl TryFrom<RawRiskSpec> for RiskSpec {
    type Error = Error;
    fn try_from(r: RawRiskSpec) -> Result<Self> {
        RiskSpec::new(r.pi0, r.pi1, r.c1, r.c2)
    }
}

impl RiskSpec {
    pub fn new(pi0: f64, pi1: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi0 < 1.0 && pi1 > 0.0 && pi1 < 1.0) {
            return Err(Error::InvalidRiskSpec(format!(
                "priors must lie in (0, 1), got pi0 = {pi0}, pi1 = {pi1}"
            )));
        }
        if (pi0 + pi1 - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(Error::InvalidRiskSpec(format!(
                "pi0 + pi1 must equal 1, got {}",
                pi0 + pi1
            )));
        }
        if !(c1.is_finite() && c1 > 0.0 && c2.is_finite() && c2 > 0.0) {
            return Err(Error::InvalidRiskSpec(format!(
                "loss weights must be positive, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(RiskSpec { pi0, pi1, c1, c2 })
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }
    pub fn pi1(&self) -> f64 {
        self.pi1
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    #[default]
    RejectOnTie,
    AcceptOnTie,
}

/// Reject `H0` when `B10 ≥ t` (or `> t` under [`TiePolicy::AcceptOnTie`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    log_t: f64,
    pub tie_policy: TiePolicy,
}

impl ThresholdRule {
    pub fn new(t: f64, tie_policy: TiePolicy) -> Result<Self> {
        if !(t > 0.0) || t.is_nan() {
            return Err(Error::InvalidArgument(format!("threshold must be positive, got {t}")));
        }
        Ok(ThresholdRule {
            log_t: t.ln(),
            tie_policy,
        })
    }

    pub fn from_log(log_t: f64, tie_policy: TiePolicy) -> Self {
        ThresholdRule { log_t, tie_policy }
    }

    pub fn t(&self) -> f64 {
        self.log_t.exp()
    }

    pub fn log_t(&self) -> f64 {
        self.log_t
    }

    pub fn rejects(&self, log_b10: f64) -> bool {
        match self.tie_policy {
            TiePolicy::RejectOnTie => log_b10 >= self.log_t - LOG_TIE_TOLERANCE,
            TiePolicy::AcceptOnTie => log_b10 > self.log_t + LOG_TIE_TOLERANCE,
        }
    }
}

pub fn optimal_threshold(spec: &RiskSpec) -> ThresholdRule {
    let t = (spec.pi0 * spec.c1) / (spec.pi1 * spec.c2);
    ThresholdRule::from_log(t.ln(), TiePolicy::RejectOnTie)
}

pub fn bayes_risk(spec: &RiskSpec, alpha: f64, beta: f64) -> f64 {
    spec.pi0 * spec.c1 * alpha + spec.pi1 * spec.c2 * beta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    /// `P_{H0}(reject)`.
    pub alpha: f64,
    /// `P_{H1}(accept)`.
    pub beta: f64,
    pub alpha_se: Option<f64>,
    pub beta_se: Option<f64>,
}

/// Distinct values of `ln B10` with their probability under each hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTable {
    pub log_b10: Vec<f64>,
    pub mass0: Vec<f64>,
    pub mass1: Vec<f64>,
    /// Replicates per hypothesis for Monte Carlo tables.
    pub reps: Option<usize>,
}

impl AtomTable {
    pub fn build(null: &Model, alt: &Alternative, n: usize, method: &Method) -> Result<Self> {
        if null.family() != alt.family() {
            return Err(Error::FamilyMismatch(
                "null and alternative must share a family".into(),
            ));
        }
        let mut raw: Vec<(f64, f64, f64)> = Vec::new();
        let reps = match *method {
            Method::Enumerate { cap } => {
                let enumeration = Enumeration::new(null.family(), n, cap)?;
                for x in enumeration.iter() {
                    let l0 = null.log_density(&x)?;
                    let l1 = alt.log_likelihood(&x)?;
                    if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
                        continue;
                    }
                    raw.push((l1 - l0, l0.exp(), l1.exp()));
                }
                None
            }
            Method::MonteCarlo { reps, seed } => {
                if reps == 0 {
                    return Err(Error::InvalidArgument("monte carlo needs replicates".into()));
                }
                let w = 1.0 / reps as f64;
                let log_ratio = |x: &crate::models::Dataset| -> Result<f64> {
                    Ok(alt.log_likelihood(x)? - null.log_density(x)?)
                };
                let under_null = replicate(child_seed(seed, 0), reps, |rng, _| {
                    log_ratio(&null.sample_with(rng, n))
                });
                let under_alt = replicate(child_seed(seed, 1), reps, |rng, _| {
                    log_ratio(&alt.sample_with(rng, n))
                });
                for lb in under_null {
                    raw.push((lb?, w, 0.0));
                }
                for lb in under_alt {
                    raw.push((lb?, 0.0, w));
                }
                Some(reps)
            }
        };
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut table = AtomTable {
            log_b10: Vec::new(),
            mass0: Vec::new(),
            mass1: Vec::new(),
            reps,
        };
        let (mut m0, mut m1) = (NeumaierSum::default(), NeumaierSum::default());
        let mut anchor = f64::NAN;
        for (lb, p0, p1) in raw {
            if table.log_b10.is_empty() || lb - anchor > LOG_TIE_TOLERANCE {
                if !table.log_b10.is_empty() {
                    table.mass0.push(m0.value());
                    table.mass1.push(m1.value());
                }
                table.log_b10.push(lb);
                anchor = lb;
                m0 = NeumaierSum::default();
                m1 = NeumaierSum::default();
            }
            m0.add(p0);
            m1.add(p1);
        }
        if !table.log_b10.is_empty() {
            table.mass0.push(m0.value());
            table.mass1.push(m1.value());
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.log_b10.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_b10.is_empty()
    }

    /// `(α, β)` when atoms with index `>= k` are rejected.
    fn rates_rejecting_from(&self, k: usize) -> (f64, f64) {
        let alpha: NeumaierSum = self.mass0[k..].iter().copied().collect();
        let beta: NeumaierSum = self.mass1[..k].iter().copied().collect();
        (alpha.value().clamp(0.0, 1.0), beta.value().clamp(0.0, 1.0))
    }

    /// First atom index rejected by `rule`; atoms are sorted so the rejected
    /// set is always a suffix.
    fn first_rejected(&self, rule: &ThresholdRule) -> usize {
        self.log_b10.partition_point(|&lb| !rule.rejects(lb))
    }

    pub fn error_rates(&self, rule: &ThresholdRule) -> ErrorRates {
        let (alpha, beta) = self.rates_rejecting_from(self.first_rejected(rule));
        let se = |p: f64| self.reps.map(|r| (p * (1.0 - p) / r as f64).sqrt());
        ErrorRates {
            alpha,
            beta,
            alpha_se: se(alpha),
            beta_se: se(beta),
        }
    }
}

pub fn error_rates(
    null: &Model,
    alt: &Alternative,
    rule: &ThresholdRule,
    n: usize,
    method: &Method,
) -> Result<ErrorRates> {
    Ok(AtomTable::build(null, alt, n, method)?.error_rates(rule))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub risk: f64,
}

/// Thresholds in `(lower, upper]` all reject the same atoms, starting from
/// atom `reject_from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInterval {
    pub lower: f64,
    pub upper: f64,
    pub reject_from: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub spec: RiskSpec,
    /// Atom values and midpoints between consecutive atoms, plus one point
    /// below and one above the support, in increasing `t`.
    pub points: Vec<RiskPoint>,
    pub min_risk: f64,
    /// Maximal runs of risk-minimising thresholds.
    pub argmin: Vec<ThresholdInterval>,
    pub atoms: usize,
    #[serde(skip)]
    atom_log_b10: Vec<f64>,
    #[serde(skip)]
    optimal_from: Vec<bool>,
}

impl RiskCurve {
    /// Whether the RejectOnTie rule at `t` attains the minimum risk.
    pub fn is_optimal(&self, t: f64) -> bool {
        let rule = ThresholdRule::from_log(t.ln(), TiePolicy::RejectOnTie);
        let k = self.atom_log_b10.partition_point(|&lb| !rule.rejects(lb));
        self.optimal_from[k]
    }

    /// The argmin interval containing `t`, if any.
    pub fn argmin_interval_containing(&self, t: f64) -> Option<&ThresholdInterval> {
        let rule = ThresholdRule::from_log(t.ln(), TiePolicy::RejectOnTie);
        let k = self.atom_log_b10.partition_point(|&lb| !rule.rejects(lb));
        self.argmin
            .iter()
            .find(|iv| iv.reject_from <= k && k <= self.run_end(iv.reject_from))
    }

    fn run_end(&self, start: usize) -> usize {
        let mut k = start;
        while k + 1 < self.optimal_from.len() && self.optimal_from[k + 1] {
            k += 1;
        }
        k
    }
}

/// Risk over every threshold that changes the decision, and the set of
/// minimisers.
pub fn threshold_sweep(
    null: &Model,
    alt: &Alternative,
    spec: &RiskSpec,
    n: usize,
    method: &Method,
) -> Result<RiskCurve> {
    let table = AtomTable::build(null, alt, n, method)?;
    Ok(sweep_table(&table, spec))
}

pub fn sweep_table(table: &AtomTable, spec: &RiskSpec) -> RiskCurve {
    let k_max = table.len();
    // Risk of "reject atoms k.." for k = 0..=K.
    let risks: Vec<f64> = (0..=k_max)
        .map(|k| {
            let (a, b) = table.rates_rejecting_from(k);
            bayes_risk(spec, a, b)
        })
        .collect();
    let min_risk = risks.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = RISK_TIE_TOLERANCE * min_risk.abs().max(1.0);
    let optimal_from: Vec<bool> = risks.iter().map(|&r| r <= min_risk + tol).collect();

    let lb = &table.log_b10;
    let mut log_ts = Vec::with_capacity(2 * k_max + 1);
    if let (Some(&first), Some(&last)) = (lb.first(), lb.last()) {
        log_ts.push(first - 1.0);
        for k in 0..k_max {
            log_ts.push(lb[k]);
            if k + 1 < k_max {
                log_ts.push(0.5 * (lb[k] + lb[k + 1]));
            }
        }
        log_ts.push(last + 1.0);
    }
    let points = log_ts
        .into_iter()
        .map(|log_t| {
            let rule = ThresholdRule::from_log(log_t, TiePolicy::RejectOnTie);
            let k = table.first_rejected(&rule);
            let (alpha, beta) = table.rates_rejecting_from(k);
            RiskPoint {
                t: log_t.exp(),
                alpha,
                beta,
                risk: risks[k],
            }
        })
        .collect();

    let mut argmin = Vec::new();
    let mut k = 0;
    while k <= k_max {
        if optimal_from[k] {
            let start = k;
            while k < k_max && optimal_from[k + 1] {
                k += 1;
            }
            argmin.push(ThresholdInterval {
                lower: if start == 0 { 0.0 } else { lb[start - 1].exp() },
                upper: if k == k_max { f64::INFINITY } else { lb[k].exp() },
                reject_from: start,
            });
        }
        k += 1;
    }

    RiskCurve {
        spec: *spec,
        points,
        min_risk,
        argmin,
        atoms: k_max,
        atom_log_b10: lb.clone(),
        optimal_from,
    }
}
