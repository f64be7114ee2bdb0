//! Exhaustive enumeration of `x^n` over a finite sample space. This is the
//! oracle behind every exact probability and expectation in the crate.

use crate::error::{Error, Result};
use crate::models::{Dataset, Family, Model};
use crate::numeric::NeumaierSum;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub struct Enumeration {
    support: &'static [f64],
    n: usize,
    count: u64,
}

impl Enumeration {
    /// Refuses when `|space|^n` exceeds `cap`.
    pub fn new(family: &Family, n: usize, cap: u64) -> Result<Self> {
        let support = family
            .finite_support()
            .ok_or(Error::NotEnumerable(family.name()))?;
        let k = support.len() as u64;
        let count = u32::try_from(n)
            .ok()
            .and_then(|n| k.checked_pow(n))
            .filter(|&c| c <= cap)
            .ok_or_else(|| Error::EnumerationCap {
                outcomes: format!("{k}^{n}"),
                cap,
            })?;
        Ok(Enumeration { support, n, count })
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Outcome number `index`, observation `j` taking digit `j` of `index` in
    /// base `|space|`.
    pub fn outcome(&self, mut index: u64) -> Dataset {
        let k = self.support.len() as u64;
        let mut values = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            values.push(self.support[(index % k) as usize]);
            index /= k;
        }
        Dataset::scalar(values)
    }

    /// Every outcome exactly once.
    pub fn iter(&self) -> impl Iterator<Item = Dataset> + '_ {
        (0..self.count).map(|i| self.outcome(i))
    }

    /// Outcomes paired with their probability under `model`.
    pub fn with_probabilities<'a>(
        &'a self,
        model: &'a Model,
    ) -> impl Iterator<Item = Result<(Dataset, f64)>> + 'a {
        self.iter().map(move |x| {
            let lp = model.log_density(&x)?;
            Ok((x, lp.exp()))
        })
    }

    /// `Σ P(x^n)`; equals one for any model of the family.
    pub fn total_probability(&self, model: &Model) -> Result<f64> {
        let mut sum = NeumaierSum::default();
        for item in self.with_probabilities(model) {
            sum.add(item?.1);
        }
        Ok(sum.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn single_observation_outcomes() {
        let e = Enumeration::new(&Family::Bernoulli, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let all: Vec<Dataset> = e.iter().collect();
        assert_eq!(all, vec![Dataset::scalar(vec![0.0]), Dataset::scalar(vec![1.0])]);
    }

    #[test]
    fn ten_observations_each_once_and_normalised() {
        let e = Enumeration::new(&Family::Bernoulli, 10, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.len(), 1024);
        let distinct: HashSet<Vec<u64>> = e
            .iter()
            .map(|d| d.values().iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(distinct.len(), 1024);
        let total = e.total_probability(&Model::bernoulli(0.7).unwrap()).unwrap();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cap_refusal_names_the_cap() {
        let err = Enumeration::new(&Family::Bernoulli, 25, DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert_eq!(
            err,
            Error::EnumerationCap {
                outcomes: "2^25".into(),
                cap: 1 << 20
            }
        );
        assert!(err.to_string().contains("1048576"));
        assert!(Enumeration::new(&Family::Bernoulli, 20, DEFAULT_ENUMERATION_CAP).is_ok());
    }

    #[test]
    fn continuous_families_are_not_enumerable() {
        assert!(matches!(
            Enumeration::new(&Family::Exponential, 2, DEFAULT_ENUMERATION_CAP),
            Err(Error::NotEnumerable(_))
        ));
    }

    #[test]
    fn zero_length_has_one_empty_outcome() {
        let e = Enumeration::new(&Family::Bernoulli, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e.outcome(0).is_empty());
    }
}
