//! Classical estimation theory on discrete outcome sets.
//!
//! A [`ParametricModel`] maps a real parameter to a probability distribution
//! over a fixed list of outcomes. From it we compute the classical fidelity
//! between distributions, the Fisher information (analytic derivative when the
//! model provides one, Richardson central differences of `√P_k` otherwise),
//! and the Cramér-Rao lower bound on the standard deviation of any unbiased
//! estimator after `N` independent repetitions.

mod models;

pub use models::{
    BernoulliModel, BinnedDensity, BinomialModel, ConstantModel, FnModel, PoissonCounting,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numdiff::{central_derivative, DifferentiationConfig};

/// Largest deviation of `Σ P_k` from one that is silently renormalized.
pub const RENORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Below this a probability counts as zero when forming `(dP/dX)² / P`.
const VANISHING_PROBABILITY: f64 = 1e-300;

/// A probability distribution over an ordered list of labelled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    labels: Vec<String>,
    probabilities: Vec<f64>,
    adjustment: f64,
}

impl ProbabilityDistribution {
    /// Validates and, when the total is within [`RENORMALIZATION_TOLERANCE`]
    /// of one, renormalizes. The applied correction is kept in
    /// [`adjustment`](Self::adjustment).
    pub fn new(labels: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probabilities.len()
            )));
        }
        if probabilities.is_empty() {
            return Err(Error::InvalidInput("empty outcome set".into()));
        }
        if let Some(bad) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidInput(format!("invalid probability {bad}")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZATION_TOLERANCE {
            return Err(Error::Normalization { sum });
        }
        let probabilities = probabilities.into_iter().map(|p| p / sum).collect();
        Ok(Self {
            labels,
            probabilities,
            adjustment: sum - 1.0,
        })
    }

    /// Outcomes labelled `"0"`, `"1"`, ….
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        Self::new(default_labels(probabilities.len()), probabilities)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Σ P_k − 1` before renormalization.
    pub fn adjustment(&self) -> f64 {
        self.adjustment
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|k| k.to_string()).collect()
}

/// Closed parameter interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub(crate) fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                name: "x",
                value: x,
                domain: format!("[{}, {}]", self.lo, self.hi),
            })
        }
    }
}

/// A family `X ↦ P(·|X)` over a fixed outcome set.
pub trait ParametricModel: Sync {
    fn domain(&self) -> Interval;

    fn outcome_count(&self) -> usize;

    fn outcome_labels(&self) -> Vec<String> {
        default_labels(self.outcome_count())
    }

    /// Raw probabilities at `x`, in outcome order. `x` is assumed in domain.
    fn probabilities(&self, x: f64) -> Result<Vec<f64>>;

    /// Analytic `dP_k/dX`, when the model has one.
    fn derivative(&self, _x: f64) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Checked distribution at `x`.
    fn evaluate(&self, x: f64) -> Result<ProbabilityDistribution> {
        self.domain().check(x)?;
        ProbabilityDistribution::new(self.outcome_labels(), self.probabilities(x)?)
    }
}

impl<M: ParametricModel + ?Sized> ParametricModel for &M {
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn outcome_count(&self) -> usize {
        (**self).outcome_count()
    }
    fn outcome_labels(&self) -> Vec<String> {
        (**self).outcome_labels()
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        (**self).probabilities(x)
    }
    fn derivative(&self, x: f64) -> Option<Result<Vec<f64>>> {
        (**self).derivative(x)
    }
}

/// `[Σ_k √(p_k q_k)]²`.
pub fn classical_fidelity(p: &ProbabilityDistribution, q: &ProbabilityDistribution) -> Result<f64> {
    if p.labels != q.labels {
        return Err(Error::InvalidInput(
            "distributions are defined over different outcome sets".into(),
        ));
    }
    let overlap: f64 = p
        .probabilities
        .iter()
        .zip(&q.probabilities)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok((overlap * overlap).min(1.0))
}

/// Fisher information `F(x) = 4 Σ_k (d√P_k/dX)²`.
///
/// Uses the model's analytic derivative in the equivalent form
/// `Σ_k (dP_k/dX)² / P_k` when available; outcomes where both `P_k` and its
/// derivative vanish contribute zero, and a vanishing `P_k` with a non-zero
/// derivative (a domain edge such as `p = 0` for Bernoulli) gives `+∞`.
pub fn fisher_information<M: ParametricModel + ?Sized>(
    model: &M,
    x: f64,
    cfg: &DifferentiationConfig,
) -> Result<f64> {
    let dist = model.evaluate(x)?;
    match model.derivative(x) {
        Some(derivative) => {
            let dp = derivative?;
            if dp.len() != dist.len() {
                return Err(Error::InvalidInput(format!(
                    "derivative has {} entries for {} outcomes",
                    dp.len(),
                    dist.len()
                )));
            }
            let drift: f64 = dp.iter().sum();
            let scale = dp.iter().map(|d| d.abs()).fold(1.0, f64::max);
            if drift.abs() > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "model derivative sums to {drift:e}, expected 0"
                )));
            }
            Ok(dist
                .probabilities()
                .iter()
                .zip(&dp)
                .map(|(&p, &d)| score_term(p, d))
                .sum())
        }
        None => {
            let domain = model.domain();
            let h = cfg.step_within(x, domain.lo, domain.hi)?;
            let root = |t: f64| -> Result<Vec<f64>> {
                Ok(model.evaluate(t)?.probabilities().iter().map(|p| p.sqrt()).collect())
            };
            let droot = central_derivative(root, x, h, cfg.richardson_levels)?;
            Ok(4.0 * droot.iter().map(|d| d * d).sum::<f64>())
        }
    }
}

fn score_term(p: f64, dp: f64) -> f64 {
    if p < VANISHING_PROBABILITY {
        if dp.abs() < VANISHING_PROBABILITY {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        dp * dp / p
    }
}

/// `|Φ(x, x+h) − (1 − F(x) h²/4)|`, the remainder of the second-order
/// fidelity expansion. Shrinks at least as `h³`.
pub fn fidelity_expansion_check<M: ParametricModel + ?Sized>(
    model: &M,
    x: f64,
    h: f64,
) -> Result<f64> {
    let here = model.evaluate(x)?;
    let there = model.evaluate(x + h)?;
    let fidelity = classical_fidelity(&here, &there)?;
    let fisher = fisher_information(model, x, &DifferentiationConfig::default())?;
    Ok((fidelity - (1.0 - 0.25 * fisher * h * h)).abs())
}

/// Fisher value, number of repetitions and the resulting lower bound on `ΔX`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBound {
    pub fisher: f64,
    pub n_measurements: u64,
    pub bound: f64,
}

/// `ΔX ≥ 1/√(N·F)`; infinite `F` gives a zero bound.
pub fn cramer_rao_bound(fisher: f64, n_measurements: u64) -> Result<PrecisionBound> {
    if n_measurements == 0 {
        return Err(Error::InvalidInput("at least one measurement is required".into()));
    }
    if !(fisher > 0.0) {
        return Err(Error::DegenerateModel(format!(
            "Fisher information {fisher} gives an unbounded variance"
        )));
    }
    Ok(PrecisionBound {
        fisher,
        n_measurements,
        bound: 1.0 / (n_measurements as f64 * fisher).sqrt(),
    })
}

/// Error propagation `ΔX = σ(x) / |d⟨A⟩/dX|`.
pub fn error_propagation<M, S>(
    mean_fn: M,
    mut sd_fn: S,
    x: f64,
    cfg: &DifferentiationConfig,
) -> Result<f64>
where
    M: FnMut(f64) -> Result<f64>,
    S: FnMut(f64) -> Result<f64>,
{
    let slope = central_derivative(mean_fn, x, cfg.step_at(x), cfg.richardson_levels)?;
    if !(slope.abs() >= 1e-14) {
        return Err(Error::InsensitiveObservable { derivative: slope });
    }
    let sd = sd_fn(x)?;
    if !(sd >= 0.0) {
        return Err(Error::InvalidInput(format!("standard deviation {sd} is negative")));
    }
    Ok(sd / slope.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dist(p: &[f64]) -> ProbabilityDistribution {
        ProbabilityDistribution::from_probabilities(p.to_vec()).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_relative_eq!(classical_fidelity(&p, &p).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(classical_fidelity(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 0.0);
        let f = classical_fidelity(&dist(&[0.5, 0.5]), &dist(&[0.9, 0.1])).unwrap();
        assert_relative_eq!(f, 0.8, epsilon = 1e-14);
    }

    #[test]
    fn fidelity_rejects_mismatched_outcomes() {
        let a = dist(&[0.5, 0.5]);
        let b = dist(&[0.2, 0.3, 0.5]);
        assert!(matches!(classical_fidelity(&a, &b), Err(Error::InvalidInput(_))));
        let relabelled =
            ProbabilityDistribution::new(vec!["up".into(), "down".into()], vec![0.5, 0.5]).unwrap();
        assert!(classical_fidelity(&a, &relabelled).is_err());
    }

    #[test]
    fn small_drift_is_renormalized_large_drift_rejected() {
        let d = dist(&[0.5, 0.5 + 1e-11]);
        assert!((d.adjustment() - 1e-11).abs() < 1e-15);
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            ProbabilityDistribution::from_probabilities(vec![0.5, 0.6]),
            Err(Error::Normalization { .. })
        ));
        assert!(ProbabilityDistribution::from_probabilities(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn fisher_of_bernoulli_and_poisson() {
        let cfg = DifferentiationConfig::default();
        let b = BernoulliModel;
        assert_relative_eq!(fisher_information(&b, 0.5, &cfg).unwrap(), 4.0, max_relative = 1e-12);
        let p = PoissonCounting::mean(20.0);
        assert_relative_eq!(fisher_information(&p, 2.0, &cfg).unwrap(), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn fisher_of_constant_model_is_zero() {
        let m = ConstantModel::new(vec![0.1, 0.6, 0.3]);
        assert_eq!(fisher_information(&m, 0.3, &DifferentiationConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn fisher_diverges_at_a_hard_edge() {
        let cfg = DifferentiationConfig::default();
        assert_eq!(fisher_information(&BernoulliModel, 0.0, &cfg).unwrap(), f64::INFINITY);
        assert_eq!(fisher_information(&BernoulliModel, 1.0, &cfg).unwrap(), f64::INFINITY);
        assert_eq!(cramer_rao_bound(f64::INFINITY, 3).unwrap().bound, 0.0);
        assert!(cramer_rao_bound(f64::NAN, 3).is_err());
    }

    #[test]
    fn fisher_outside_domain_is_an_error() {
        let err = fisher_information(&BernoulliModel, 1.5, &DifferentiationConfig::default());
        assert!(matches!(err, Err(Error::Domain { .. })));
    }

    #[test]
    fn numerical_path_matches_analytic_path() {
        let cfg = DifferentiationConfig::default();
        for &p in &[0.1, 0.3, 0.5, 0.77] {
            let analytic = fisher_information(&BernoulliModel, p, &cfg).unwrap();
            let numeric = fisher_information(&BernoulliModel.without_derivative(), p, &cfg).unwrap();
            assert_relative_eq!(numeric, analytic, max_relative = 1e-6);
            assert_relative_eq!(analytic, 1.0 / (p * (1.0 - p)), max_relative = 1e-12);
        }
        let poisson = PoissonCounting::mean(30.0);
        for &mu in &[0.5, 2.0, 7.5] {
            let analytic = fisher_information(&poisson, mu, &cfg).unwrap();
            let numeric = fisher_information(&poisson.without_derivative(), mu, &cfg).unwrap();
            assert_relative_eq!(numeric, analytic, max_relative = 1e-6);
            assert_relative_eq!(analytic, 1.0 / mu, max_relative = 1e-10);
        }
    }

    #[test]
    fn expansion_remainder_is_cubic() {
        assert!(fidelity_expansion_check(&BernoulliModel, 0.5, 1e-3).unwrap() <= 1e-8);
        assert_eq!(fidelity_expansion_check(&BernoulliModel, 0.5, 0.0).unwrap(), 0.0);
        let constant = ConstantModel::new(vec![0.25, 0.75]);
        assert!(fidelity_expansion_check(&constant, 0.4, 0.1).unwrap() < 1e-14);

        // Asymmetric point so the h³ term is present.
        let model = BinomialModel::new(4, 0.0, 1.0);
        let mut h = 0.02;
        let mut previous = fidelity_expansion_check(&model, 0.3, h).unwrap();
        for _ in 0..3 {
            h /= 2.0;
            let current = fidelity_expansion_check(&model, 0.3, h).unwrap();
            assert!(current <= previous / 7.0, "{previous:e} -> {current:e}");
            previous = current;
        }
    }

    #[test]
    fn cramer_rao_examples() {
        assert_relative_eq!(cramer_rao_bound(4.0, 100).unwrap().bound, 0.05, max_relative = 1e-15);
        assert_eq!(cramer_rao_bound(1.0, 1).unwrap().bound, 1.0);
        let f = fisher_information(&BernoulliModel, 0.5, &DifferentiationConfig::default()).unwrap();
        assert_relative_eq!(cramer_rao_bound(f, 10_000).unwrap().bound, 0.005, max_relative = 1e-12);
        assert!(matches!(cramer_rao_bound(0.0, 10), Err(Error::DegenerateModel(_))));
        assert!(cramer_rao_bound(-1.0, 10).is_err());
        assert!(cramer_rao_bound(1.0, 0).is_err());
    }

    #[test]
    fn error_propagation_examples() {
        let cfg = DifferentiationConfig::default();
        let nbar = 10.0;
        let d = error_propagation(|g| Ok((1.0 - g) * nbar), |_| Ok(1.0), 0.3, &cfg).unwrap();
        assert_relative_eq!(d, 0.1, max_relative = 1e-10);
        let d = error_propagation(|g| Ok((1.0 - g) * nbar), |_| Ok(0.0), 0.3, &cfg).unwrap();
        assert_eq!(d, 0.0);
        let flat = error_propagation(|_| Ok(3.0), |_| Ok(1.0), 0.3, &cfg);
        assert!(matches!(flat, Err(Error::InsensitiveObservable { .. })));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.0f64..1.0, n).prop_filter_map("non-zero mass", |v| {
                let s: f64 = v.iter().sum();
                (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
            })
        }

        proptest! {
            #[test]
            fn fidelity_is_bounded_and_symmetric(p in simplex(5), q in simplex(5)) {
                let (p, q) = (dist(&p), dist(&q));
                let pq = classical_fidelity(&p, &q).unwrap();
                let qp = classical_fidelity(&q, &p).unwrap();
                prop_assert!((0.0..=1.0).contains(&pq));
                prop_assert!((pq - qp).abs() < 1e-15);
                prop_assert!((classical_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn bound_decreases_in_fisher_and_repetitions(f in 0.01f64..100.0, n in 1u64..10_000) {
                let base = cramer_rao_bound(f, n).unwrap().bound;
                prop_assert!(cramer_rao_bound(f * 1.5, n).unwrap().bound < base);
                prop_assert!(cramer_rao_bound(f, n + 1).unwrap().bound < base);
            }

            #[test]
            fn fisher_is_non_negative(p in 0.01f64..0.99, trials in 1u32..12) {
                let f = fisher_information(&BinomialModel::new(trials, 0.0, 1.0), p,
                    &DifferentiationConfig::default()).unwrap();
                prop_assert!(f >= 0.0);
                let expected = trials as f64 / (p * (1.0 - p));
                prop_assert!((f - expected).abs() <= 1e-9 * expected);
            }
        }
    }
}
