//! Probability-simplex arithmetic, the exponential-weights kernel and
//! categorical sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance on the total mass of a [`SimplexVector`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A probability distribution over `K` arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Validates `weights`: nonnegative, finite, summing to one within [`SIMPLEX_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSimplex("empty vector".into()));
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidSimplex(format!("entry {i} is {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidSimplex(format!("entries sum to {total}")));
        }
        Ok(Self(weights))
    }

    /// Normalizes nonnegative finite weights with positive total.
    pub fn from_unnormalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidSimplex(format!(
                "cannot normalize weights with total {total}"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self(weights))
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution over zero arms");
        Self(vec![1.0 / k as f64; k])
    }

    pub fn indicator(k: usize, arm: usize) -> Self {
        assert!(arm < k, "indicator arm {arm} out of range {k}");
        let mut v = vec![0.0; k];
        v[arm] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Total probability of `arms`.
    pub fn mass(&self, arms: &[usize]) -> f64 {
        arms.iter().map(|&a| self.0[a]).sum()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(p, x)| p * x).sum()
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, arm: usize) -> &f64 {
        &self.0[arm]
    }
}

/// Running per-arm sums of estimated losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CumulativeLoss(Vec<f64>);

impl CumulativeLoss {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn from_totals(totals: Vec<f64>) -> Result<Self> {
        if totals.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("cumulative loss"));
        }
        Ok(Self(totals))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn totals(&self) -> &[f64] {
        &self.0
    }

    /// Adds a nonnegative increment to arm `arm`.
    #[inline]
    pub fn add(&mut self, arm: usize, increment: f64) {
        debug_assert!(increment >= 0.0 && increment.is_finite());
        self.0[arm] += increment;
    }
}

/// Exponential weights: `p(a) ∝ exp(-η · totals(a))`.
///
/// This is the closed-form minimizer of `⟨p, L⟩ + (1/η) Σ p log p` over the
/// simplex. The minimum total is subtracted before exponentiating, so the
/// largest weight is exactly `exp(0) = 1` and nothing overflows.
pub fn exp_weights(totals: &[f64], learning_rate: f64) -> Result<SimplexVector> {
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(Error::Params(format!(
            "learning rate must be positive and finite, got {learning_rate}"
        )));
    }
    if totals.is_empty() {
        return Err(Error::InvalidSimplex("empty vector".into()));
    }
    let mut min = f64::INFINITY;
    for &x in totals {
        if !x.is_finite() {
            return Err(Error::NonFinite("cumulative loss"));
        }
        min = min.min(x);
    }
    let weights: Vec<f64> = totals
        .iter()
        .map(|&x| (-learning_rate * (x - min)).exp())
        .collect();
    SimplexVector::from_unnormalized(weights)
}

/// Multiplicative tilt: `p'(a) ∝ base(a) · exp(-η · deltas(a))`.
pub fn tilt(base: &SimplexVector, deltas: &[f64], learning_rate: f64) -> Result<SimplexVector> {
    if deltas.len() != base.len() {
        return Err(Error::DimensionMismatch {
            expected: base.len(),
            actual: deltas.len(),
        });
    }
    if !learning_rate.is_finite() || deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("tilt input"));
    }
    // Shift by the smallest delta over the support so the dominant term stays at exp(0).
    let shift = base
        .as_slice()
        .iter()
        .zip(deltas)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, d)| learning_rate * d)
        .fold(f64::INFINITY, f64::min);
    let weights = base
        .as_slice()
        .iter()
        .zip(deltas)
        .map(|(&p, &d)| {
            if p > 0.0 {
                p * (shift - learning_rate * d).exp()
            } else {
                0.0
            }
        })
        .collect();
    SimplexVector::from_unnormalized(weights)
}

/// Categorical draw by inverse CDF over the stored arm order.
pub fn sample_arm<R: Rng + ?Sized>(p: &SimplexVector, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (a, &w) in p.as_slice().iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = a;
            if u < acc {
                return a;
            }
        }
    }
    // Rounding left `u` above the accumulated mass.
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sim_rng;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexVector::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexVector::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexVector::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SimplexVector::new(vec![]).is_err());
    }

    #[test]
    fn exp_weights_zero_totals_is_uniform() {
        let p = exp_weights(&[0.0; 5], 0.3).unwrap();
        assert!(close(p.as_slice(), &[0.2; 5], 1e-15));
    }

    #[test]
    fn exp_weights_closed_form_two_to_one() {
        let eta = 0.7;
        let p = exp_weights(&[0.0, 2f64.ln() / eta], eta).unwrap();
        assert!(close(p.as_slice(), &[2.0 / 3.0, 1.0 / 3.0], 1e-12));
    }

    #[test]
    fn exp_weights_is_stable_at_extremes() {
        let eta = 0.01;
        let p = exp_weights(&[0.0, 1e6 / eta * eta], eta).unwrap();
        assert!(p.as_slice().iter().all(|x| x.is_finite()));
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1] < 1e-12);
        let p = exp_weights(&[1e8, 1e8 + 1.0, 0.0], 5.0).unwrap();
        assert_eq!(p[2], 1.0);
    }

    #[test]
    fn exp_weights_rejects_bad_input() {
        assert!(exp_weights(&[0.0, f64::INFINITY], 1.0).is_err());
        assert!(exp_weights(&[0.0, 1.0], 0.0).is_err());
        assert!(exp_weights(&[0.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn tilt_examples() {
        let base = SimplexVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        let same = tilt(&base, &[0.0; 3], 0.5).unwrap();
        assert!(close(same.as_slice(), base.as_slice(), 1e-15));

        let eta = 0.25;
        let p = tilt(&SimplexVector::uniform(2), &[2f64.ln() / eta, 0.0], eta).unwrap();
        assert!(close(p.as_slice(), &[1.0 / 3.0, 2.0 / 3.0], 1e-12));
    }

    #[test]
    fn tilt_keeps_zero_entries_at_zero() {
        let base = SimplexVector::new(vec![0.0, 1.0]).unwrap();
        let p = tilt(&base, &[-1e9, 5.0], 1.0).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn sample_indicator_is_deterministic() {
        let p = SimplexVector::indicator(6, 3);
        let mut rng = sim_rng(1);
        assert!((0..1000).all(|_| sample_arm(&p, &mut rng) == 3));
    }

    #[test]
    fn sample_uniform_frequencies() {
        let n = 100_000;
        let p = SimplexVector::uniform(4);
        let mut rng = sim_rng(2024);
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_arm(&p, &mut rng)] += 1;
        }
        let tol = 3.0 * (0.25f64 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= tol, "{counts:?}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = SimplexVector::new(vec![0.1, 0.4, 0.5]).unwrap();
        let draw = |seed| {
            let mut rng = sim_rng(seed);
            (0..64).map(|_| sample_arm(&p, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    proptest! {
        #[test]
        fn exp_weights_output_is_a_distribution(
            totals in prop::collection::vec(0.0f64..1e8, 1..20),
            eta in 1e-6f64..10.0,
        ) {
            let p = exp_weights(&totals, eta).unwrap();
            let sum: f64 = p.as_slice().iter().sum();
            prop_assert!((sum - 1.0).abs() <= SIMPLEX_TOL);
            prop_assert!(p.as_slice().iter().all(|x| *x >= 0.0 && x.is_finite()));
        }

        #[test]
        fn exp_weights_shift_invariance(
            totals in prop::collection::vec(0.0f64..100.0, 1..12),
            shift in 0.0f64..1e3,
            eta in 1e-3f64..2.0,
        ) {
            let p = exp_weights(&totals, eta).unwrap();
            let shifted: Vec<f64> = totals.iter().map(|x| x + shift).collect();
            let q = exp_weights(&shifted, eta).unwrap();
            prop_assert!(close(p.as_slice(), q.as_slice(), 1e-12));
        }

        #[test]
        fn argmin_has_max_probability(
            totals in prop::collection::vec(0.0f64..50.0, 1..12),
            eta in 1e-3f64..2.0,
        ) {
            let p = exp_weights(&totals, eta).unwrap();
            let argmin = totals
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            let max = p.as_slice().iter().cloned().fold(0.0, f64::max);
            prop_assert_eq!(p[argmin], max);
        }

        #[test]
        fn tilt_is_an_exponential_homomorphism(
            pairs in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 1..10),
            eta in 1e-3f64..1.0,
        ) {
            let (c, d): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let lhs = tilt(&exp_weights(&c, eta).unwrap(), &d, eta).unwrap();
            let sum: Vec<f64> = c.iter().zip(&d).map(|(x, y)| x + y).collect();
            let rhs = exp_weights(&sum, eta).unwrap();
            prop_assert!(close(lhs.as_slice(), rhs.as_slice(), 1e-12));
        }
    }
}
