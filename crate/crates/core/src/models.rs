//! Parametric families with exact densities, samplers, closed-form KL
//! divergence and Fisher information. All log quantities are in nats.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::replicate_rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A parametric family together with its fixed nuisance constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Bernoulli,
    /// Mean vector of dimension `dim`, known isotropic variance.
    GaussianKnownVar { variance: f64, dim: usize },
    /// Rate parameterisation.
    Exponential,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bernoulli => "bernoulli",
            Family::GaussianKnownVar { .. } => "gaussian_known_var",
            Family::Exponential => "exponential",
        }
    }

    /// Parameter dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            Family::GaussianKnownVar { dim, .. } => *dim,
            _ => 1,
        }
    }

    /// Dimension of one observation.
    pub fn observation_dim(&self) -> usize {
        self.dim()
    }

    /// Points of the sample space when it is finite.
    pub fn finite_support(&self) -> Option<&'static [f64]> {
        match self {
            Family::Bernoulli => Some(&[0.0, 1.0]),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::GaussianKnownVar { variance, dim } = *self {
            if !(variance.is_finite() && variance > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "gaussian variance must be positive and finite, got {variance}"
                )));
            }
            if dim == 0 {
                return Err(Error::InvalidModel("gaussian dimension must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Builds the member of this family at `theta`.
    pub fn model(&self, theta: Vec<f64>) -> Result<Model> {
        Model::new(*self, theta)
    }
}

/// A member of a parametric family. Fields are private so that every value in
/// circulation satisfies its family's parameter constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct Model {
    family: Family,
    theta: Vec<f64>,
}

/// Serialized form of a [`Model`]: `{"family": ..., "theta": [...], "variance": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
}

impl TryFrom<ModelSpec> for Model {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let family = match spec.family.as_str() {
            "bernoulli" => Family::Bernoulli,
            "exponential" => Family::Exponential,
            "gaussian_known_var" | "gaussian" => Family::GaussianKnownVar {
                variance: spec.variance.ok_or_else(|| {
                    Error::InvalidModel("gaussian_known_var requires `variance`".into())
                })?,
                dim: spec.theta.len(),
            },
            other => return Err(Error::InvalidModel(format!("unknown family `{other}`"))),
        };
        Model::new(family, spec.theta)
    }
}

impl From<Model> for ModelSpec {
    fn from(m: Model) -> Self {
        let variance = match m.family {
            Family::GaussianKnownVar { variance, .. } => Some(variance),
            _ => None,
        };
        ModelSpec {
            family: m.family.name().to_string(),
            theta: m.theta,
            variance,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Bernoulli => write!(f, "Bernoulli({})", self.theta[0]),
            Family::Exponential => write!(f, "Exponential({})", self.theta[0]),
            Family::GaussianKnownVar { variance, .. } => {
                write!(f, "N({:?}, {}·I)", self.theta, variance)
            }
        }
    }
}

impl Model {
    pub fn new(family: Family, theta: Vec<f64>) -> Result<Self> {
        family.validate()?;
        if theta.len() != family.dim() {
            return Err(Error::InvalidModel(format!(
                "{} expects a parameter of dimension {}, got {}",
                family.name(),
                family.dim(),
                theta.len()
            )));
        }
        match family {
            Family::Bernoulli => {
                let p = theta[0];
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "bernoulli parameter must lie in (0, 1), got {p}"
                    )));
                }
            }
            Family::Exponential => {
                let rate = theta[0];
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "exponential rate must be positive and finite, got {rate}"
                    )));
                }
            }
            Family::GaussianKnownVar { .. } => {
                if theta.iter().any(|m| !m.is_finite()) {
                    return Err(Error::InvalidModel("gaussian mean must be finite".into()));
                }
            }
        }
        Ok(Model { family, theta })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(Family::Bernoulli, vec![p])
    }

    pub fn gaussian(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let dim = mean.len();
        Self::new(Family::GaussianKnownVar { variance, dim }, mean)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential, vec![rate])
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Log density of a single observation. Zero-density points give `-inf`;
    /// points outside the sample space are a domain error.
    pub fn log_density_one(&self, x: &[f64]) -> std::result::Result<f64, ()> {
        if x.len() != self.family.observation_dim() || x.iter().any(|v| !v.is_finite()) {
            return Err(());
        }
        match self.family {
            Family::Bernoulli => {
                let p = self.theta[0];
                if x[0] == 1.0 {
                    Ok(p.ln())
                } else if x[0] == 0.0 {
                    Ok((-p).ln_1p())
                } else {
                    Err(())
                }
            }
            Family::Exponential => {
                let rate = self.theta[0];
                if x[0] < 0.0 {
                    Ok(f64::NEG_INFINITY)
                } else {
                    Ok(rate.ln() - rate * x[0])
                }
            }
            Family::GaussianKnownVar { variance, dim } => {
                let sq: f64 = x
                    .iter()
                    .zip(&self.theta)
                    .map(|(xi, mi)| (xi - mi) * (xi - mi))
                    .sum();
                Ok(-0.5 * dim as f64 * (LN_2PI + variance.ln()) - sq / (2.0 * variance))
            }
        }
    }

    /// `log p(x^n | theta)` under the i.i.d. product law.
    pub fn log_density(&self, data: &Dataset) -> Result<f64> {
        self.check_dataset(data)?;
        let mut total = 0.0;
        for (index, x) in data.observations().enumerate() {
            let lp = self.log_density_one(x).map_err(|_| Error::Domain {
                family: self.family.name(),
                index,
                value: x.to_vec(),
            })?;
            total += lp;
        }
        Ok(total)
    }

    pub(crate) fn check_dataset(&self, data: &Dataset) -> Result<()> {
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

    /// Appends one draw to `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self.family {
            Family::Bernoulli => {
                let u: f64 = rng.random();
                out.push(if u < self.theta[0] { 1.0 } else { 0.0 });
            }
            Family::Exponential => {
                let exp = Exp::new(self.theta[0]).expect("validated rate");
                out.push(exp.sample(rng));
            }
            Family::GaussianKnownVar { variance, .. } => {
                let sd = variance.sqrt();
                for &m in &self.theta {
                    let normal = Normal::new(m, sd).expect("validated variance");
                    out.push(normal.sample(rng));
                }
            }
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Dataset {
        let dim = self.family.observation_dim();
        let mut values = Vec::with_capacity(n * dim);
        for _ in 0..n {
            self.draw_into(rng, &mut values);
        }
        Dataset { dim, values }
    }

    /// `n` i.i.d. draws; identical `(seed, n, model)` gives identical output.
    pub fn sample(&self, seed: u64, n: usize) -> Dataset {
        let mut rng = replicate_rng(seed, 0);
        self.sample_with(&mut rng, n)
    }

    pub(crate) fn same_family(&self, other: &Model) -> Result<()> {
        if self.family != other.family {
            return Err(Error::FamilyMismatch(format!(
                "{} vs {}: laws must share a family and its fixed constants",
                self, other
            )));
        }
        Ok(())
    }
}

/// Per-observation `KL(p || q)` in nats, from the closed forms.
pub fn kl_divergence(p: &Model, q: &Model) -> Result<f64> {
    p.same_family(q)?;
    let kl = match p.family {
        Family::Bernoulli => {
            let (a, b) = (p.theta[0], q.theta[0]);
            a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
        }
        Family::GaussianKnownVar { variance, .. } => {
            let sq: f64 = p
                .theta
                .iter()
                .zip(&q.theta)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            sq / (2.0 * variance)
        }
        Family::Exponential => {
            let (lp, lq) = (p.theta[0], q.theta[0]);
            (lp / lq).ln() + lq / lp - 1.0
        }
    };
    Ok(kl.max(0.0))
}

/// Symmetric positive-definite matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherInformation {
    dim: usize,
    entries: Vec<f64>,
}

impl FisherInformation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `ln det I` via Cholesky.
    pub fn log_det(&self) -> f64 {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        let mut log_det = 0.0;
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            assert!(d > 0.0, "Fisher information must be positive definite");
            let djj = d.sqrt();
            l[j * n + j] = djj;
            log_det += 2.0 * djj.ln();
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        log_det
    }
}

pub fn fisher_information(model: &Model) -> FisherInformation {
    let d = model.dim();
    let mut entries = vec![0.0; d * d];
    match model.family {
        Family::Bernoulli => {
            let p = model.theta[0];
            entries[0] = 1.0 / (p * (1.0 - p));
        }
        Family::Exponential => {
            let rate = model.theta[0];
            entries[0] = 1.0 / (rate * rate);
        }
        Family::GaussianKnownVar { variance, dim } => {
            for i in 0..dim {
                entries[i * dim + i] = 1.0 / variance;
            }
        }
    }
    FisherInformation { dim: d, entries }
}

/// An ordered sequence of observations stored flat, `dim` values per
/// observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not split into observations of dimension {dim}",
                values.len()
            )));
        }
        Ok(Dataset { dim, values })
    }

    /// One-dimensional observations.
    pub fn scalar(values: Vec<f64>) -> Self {
        Dataset { dim: 1, values }
    }

    pub fn empty(dim: usize) -> Self {
        Dataset {
            dim,
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observations `n`.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn observations(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn observation(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim);
        self.values.extend_from_slice(x);
    }

    /// The first `t` observations.
    pub fn prefix(&self, t: usize) -> Dataset {
        Dataset {
            dim: self.dim,
            values: self.values[..t * self.dim].to_vec(),
        }
    }

    /// One observation per line, components separated by a single space.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for x in self.observations() {
            let line: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses [`Dataset::to_text`] output. Blank lines are skipped; every
    /// remaining line must have `dim` components.
    pub fn from_text(text: &str, dim: usize) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "line {}: expected {dim} components, found {}",
                    lineno + 1,
                    parts.len()
                )));
            }
            for p in parts {
                let v: f64 = p.parse().map_err(|_| {
                    Error::InvalidArgument(format!("line {}: `{p}` is not a number", lineno + 1))
                })?;
                values.push(v);
            }
        }
        Dataset::new(dim, values)
    }
}
