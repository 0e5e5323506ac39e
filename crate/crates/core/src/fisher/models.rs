//! Concrete parametric families.

use super::{default_labels, Interval, ParametricModel};
use crate::error::{Error, Result};

/// Upper-tail mass left in a Poisson overflow bin.
const POISSON_TAIL: f64 = 1e-13;

/// Two outcomes `{0, 1}` with `P(1) = x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BernoulliModel;

impl ParametricModel for BernoulliModel {
    fn domain(&self) -> Interval {
        Interval::new(0.0, 1.0)
    }
    fn outcome_count(&self) -> usize {
        2
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        Ok(vec![1.0 - x, x])
    }
    fn derivative(&self, _x: f64) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![-1.0, 1.0]))
    }
}

/// Photon counting with Poissonian statistics of mean `offset + slope·x`.
///
/// Counts `0..max_count` get their own outcome; everything at or above
/// `max_count` is lumped into a final overflow outcome, sized so that the
/// overflow mass stays below `1e-13` everywhere in the domain.
#[derive(Debug, Clone)]
pub struct PoissonCounting {
    offset: f64,
    slope: f64,
    domain: Interval,
    max_count: usize,
    log_factorial: Vec<f64>,
}

impl PoissonCounting {
    pub fn new(offset: f64, slope: f64, domain: Interval) -> Result<Self> {
        let mean_lo = offset + slope * domain.lo;
        let mean_hi = offset + slope * domain.hi;
        if !(mean_lo >= 0.0 && mean_hi >= 0.0) || !mean_lo.is_finite() || !mean_hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Poisson mean must stay non-negative over the domain (got {mean_lo}..{mean_hi})"
            )));
        }
        let peak = mean_lo.max(mean_hi);
        let mut log_factorial = vec![0.0];
        let mut max_count = 1;
        loop {
            extend_log_factorial(&mut log_factorial, 2 * max_count + 64);
            if poisson_upper_tail(peak, max_count, &log_factorial) < POISSON_TAIL {
                break;
            }
            max_count += 1 + max_count / 8;
        }
        Ok(Self {
            offset,
            slope,
            domain,
            max_count,
            log_factorial,
        })
    }

    /// Parameter is the mean itself, `x ∈ [0, max_mean]`.
    pub fn mean(max_mean: f64) -> Self {
        Self::new(0.0, 1.0, Interval::new(0.0, max_mean)).expect("valid Poisson family")
    }

    /// Coherent probe of `n_in` photons through a medium absorbing a
    /// fraction `x = γ`: counts are Poissonian with mean `n_in (1 − γ)`.
    pub fn attenuated_coherent(n_in: f64) -> Result<Self> {
        if !(n_in > 0.0) {
            return Err(Error::Domain {
                name: "n_in",
                value: n_in,
                domain: "(0, inf)".into(),
            });
        }
        Self::new(n_in, -n_in, Interval::new(0.0, 1.0))
    }

    pub fn max_count(&self) -> usize {
        self.max_count
    }

    pub fn mean_at(&self, x: f64) -> f64 {
        (self.offset + self.slope * x).max(0.0)
    }

    fn pmf(&self, mu: f64, k: usize) -> f64 {
        poisson_pmf(mu, k, &self.log_factorial)
    }
}

fn poisson_pmf(mu: f64, k: usize, log_factorial: &[f64]) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mu.ln() - mu - log_factorial[k]).exp()
}

fn extend_log_factorial(table: &mut Vec<f64>, upto: usize) {
    while table.len() <= upto {
        let n = table.len() as f64;
        table.push(table.last().unwrap() + n.ln());
    }
}

// Sums P(N = k) for k ≥ from until terms are negligible or the table ends.
fn poisson_upper_tail(mu: f64, from: usize, log_factorial: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in from..log_factorial.len() {
        let term = poisson_pmf(mu, k, log_factorial);
        total += term;
        if k as f64 > mu && (term == 0.0 || term <= 1e-18 * total) {
            break;
        }
    }
    total
}

impl ParametricModel for PoissonCounting {
    fn domain(&self) -> Interval {
        self.domain
    }
    fn outcome_count(&self) -> usize {
        self.max_count + 1
    }
    fn outcome_labels(&self) -> Vec<String> {
        let mut labels = default_labels(self.max_count);
        labels.push(format!(">={}", self.max_count));
        labels
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        let mu = self.mean_at(x);
        let mut p: Vec<f64> = (0..self.max_count).map(|k| self.pmf(mu, k)).collect();
        p.push(poisson_upper_tail(mu, self.max_count, &self.log_factorial));
        Ok(p)
    }
    fn derivative(&self, x: f64) -> Option<Result<Vec<f64>>> {
        let mu = self.mean_at(x);
        // dP_k/dμ = P_{k-1} − P_k ; d/dμ P(N ≥ K) = P_{K-1}.
        let mut d = Vec::with_capacity(self.max_count + 1);
        let mut prev = 0.0;
        for k in 0..self.max_count {
            let pk = self.pmf(mu, k);
            d.push(self.slope * (prev - pk));
            prev = pk;
        }
        d.push(self.slope * prev);
        Some(Ok(d))
    }
}

/// `Binomial(trials, q)` with success probability `q = offset + slope·x`.
#[derive(Debug, Clone)]
pub struct BinomialModel {
    trials: u32,
    offset: f64,
    slope: f64,
    domain: Interval,
    binomial: Vec<f64>,
}

impl BinomialModel {
    /// Domain is the set of `x` keeping `q` in `[0, 1]`.
    pub fn new(trials: u32, offset: f64, slope: f64) -> Self {
        assert!(slope != 0.0, "binomial parametrization needs a non-zero slope");
        let a = (0.0 - offset) / slope;
        let b = (1.0 - offset) / slope;
        let mut binomial = vec![1.0; trials as usize + 1];
        for k in 1..=trials as usize {
            binomial[k] = binomial[k - 1] * (trials as usize + 1 - k) as f64 / k as f64;
        }
        Self {
            trials,
            offset,
            slope,
            domain: Interval::new(a.min(b), a.max(b)),
            binomial,
        }
    }

    /// Photons surviving a loss `x = γ` from a Fock state of `n` photons:
    /// `Binomial(n, 1 − γ)`.
    pub fn surviving_photons(n: u32) -> Self {
        Self::new(n, 1.0, -1.0)
    }

    fn success(&self, x: f64) -> f64 {
        (self.offset + self.slope * x).clamp(0.0, 1.0)
    }
}

fn powi_nonneg(base: f64, exp: i64) -> f64 {
    if exp == 0 {
        1.0
    } else {
        base.powi(exp as i32)
    }
}

impl ParametricModel for BinomialModel {
    fn domain(&self) -> Interval {
        self.domain
    }
    fn outcome_count(&self) -> usize {
        self.trials as usize + 1
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        let q = self.success(x);
        let n = self.trials as i64;
        Ok((0..=n)
            .map(|k| self.binomial[k as usize] * powi_nonneg(q, k) * powi_nonneg(1.0 - q, n - k))
            .collect())
    }
    fn derivative(&self, x: f64) -> Option<Result<Vec<f64>>> {
        let q = self.success(x);
        let n = self.trials as i64;
        let d = (0..=n)
            .map(|k| {
                let up = if k > 0 {
                    k as f64 * powi_nonneg(q, k - 1) * powi_nonneg(1.0 - q, n - k)
                } else {
                    0.0
                };
                let down = if k < n {
                    (n - k) as f64 * powi_nonneg(q, k) * powi_nonneg(1.0 - q, n - k - 1)
                } else {
                    0.0
                };
                self.slope * self.binomial[k as usize] * (up - down)
            })
            .collect();
        Some(Ok(d))
    }
}

/// Distribution that does not depend on the parameter.
#[derive(Debug, Clone)]
pub struct ConstantModel {
    probabilities: Vec<f64>,
    domain: Interval,
}

impl ConstantModel {
    pub fn new(probabilities: Vec<f64>) -> Self {
        Self {
            probabilities,
            domain: Interval::new(-1e6, 1e6),
        }
    }
}

impl ParametricModel for ConstantModel {
    fn domain(&self) -> Interval {
        self.domain
    }
    fn outcome_count(&self) -> usize {
        self.probabilities.len()
    }
    fn probabilities(&self, _x: f64) -> Result<Vec<f64>> {
        Ok(self.probabilities.clone())
    }
}

/// Model given by a closure; no analytic derivative.
pub struct FnModel<F> {
    domain: Interval,
    outcomes: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    pub fn new(domain: Interval, outcomes: usize, f: F) -> Self {
        Self { domain, outcomes, f }
    }
}

impl<F> ParametricModel for FnModel<F>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    fn domain(&self) -> Interval {
        self.domain
    }
    fn outcome_count(&self) -> usize {
        self.outcomes
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        let p = (self.f)(x);
        if p.len() != self.outcomes {
            return Err(Error::InvalidInput(format!(
                "model returned {} probabilities, expected {}",
                p.len(),
                self.outcomes
            )));
        }
        Ok(p)
    }
}

/// Discretizes a continuous density `p(ξ | x)` into bins.
///
/// Bin edges are the caller's choice; each bin is integrated with composite
/// Simpson's rule. Mass falling outside the outer edges is not recovered, so
/// the edges must cover the support to within the renormalization tolerance.
pub struct BinnedDensity<F> {
    density: F,
    edges: Vec<f64>,
    domain: Interval,
    panels: usize,
}

impl<F> BinnedDensity<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    pub fn new(density: F, edges: Vec<f64>, domain: Interval) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "bin edges must be strictly increasing with at least two entries".into(),
            ));
        }
        Ok(Self {
            density,
            edges,
            domain,
            panels: 32,
        })
    }

    /// Simpson panels per bin (rounded up to even).
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = (panels.max(2) + 1) & !1;
        self
    }
}

impl<F> ParametricModel for BinnedDensity<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn domain(&self) -> Interval {
        self.domain
    }
    fn outcome_count(&self) -> usize {
        self.edges.len() - 1
    }
    fn outcome_labels(&self) -> Vec<String> {
        self.edges
            .windows(2)
            .map(|w| format!("[{},{})", w[0], w[1]))
            .collect()
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        let n = self.panels;
        Ok(self
            .edges
            .windows(2)
            .map(|w| {
                let step = (w[1] - w[0]) / n as f64;
                let mut acc = (self.density)(w[0], x) + (self.density)(w[1], x);
                for i in 1..n {
                    let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
                    acc += weight * (self.density)(w[0] + i as f64 * step, x);
                }
                (acc * step / 3.0).max(0.0)
            })
            .collect())
    }
}

/// Hides a model's analytic derivative so the finite-difference path is used.
pub struct NumericOnly<M>(pub M);

impl<M: ParametricModel> ParametricModel for NumericOnly<M> {
    fn domain(&self) -> Interval {
        self.0.domain()
    }
    fn outcome_count(&self) -> usize {
        self.0.outcome_count()
    }
    fn outcome_labels(&self) -> Vec<String> {
        self.0.outcome_labels()
    }
    fn probabilities(&self, x: f64) -> Result<Vec<f64>> {
        self.0.probabilities(x)
    }
}

macro_rules! numeric_only {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn without_derivative(&self) -> NumericOnly<&Self> {
                NumericOnly(self)
            }
        }
    )*};
}

numeric_only!(BernoulliModel, PoissonCounting, BinomialModel);
