//! Covariance-matrix simulation of Gaussian bosonic states.
//!
//! Conventions: `ħ = 1`, quadratures ordered `x₀, p₀, x₁, p₁, …` with
//! `x = (a + a†)/√2`, vacuum covariance `I/2`. A transform `S` acts as
//! `d ← S d`, `σ ← S σ Sᵀ`. The two-mode squeezer matches
//! [`FockState::apply_two_mode_squeezer`](crate::fock::FockState::apply_two_mode_squeezer),
//! i.e. `a ↦ cosh r · a + e^{iφ} sinh r · b†`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::fisher::error_propagation;
use crate::numdiff::DifferentiationConfig;

/// Mean vector and covariance matrix of an `M`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty principle (every symplectic
    /// eigenvalue at least `1/2`).
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = covariance.nrows();
        if n == 0 || n % 2 != 0 || covariance.ncols() != n || mean.len() != n {
            return Err(Error::InvalidInput(format!(
                "mean of length {} and {}x{} covariance do not describe a Gaussian state",
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let asym = (&covariance - covariance.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::InvalidInput(format!("covariance not symmetric ({asym:e})")));
        }
        let state = Self { mean, covariance };
        let lowest = state
            .symplectic_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if !(lowest >= 0.5 - 1e-10) {
            return Err(Error::InvalidInput(format!(
                "symplectic eigenvalue {lowest} violates the uncertainty principle"
            )));
        }
        Ok(state)
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Symplectic eigenvalues in increasing order.
    ///
    /// Computed as the singular values of `σ^{1/2} Ω σ^{1/2}`, which come in
    /// equal pairs.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        if self.modes() == 1 {
            return vec![self.covariance.determinant().max(0.0).sqrt()];
        }
        let eig = self.covariance.clone().symmetric_eigen();
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let a = &root * symplectic_form(self.modes()) * &root;
        let mut values: Vec<f64> = (a.transpose() * &a)
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        values.sort_by(f64::total_cmp);
        values.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
    }

    /// `1/det(2σ)^{1/2}`; one for pure states.
    pub fn purity(&self) -> f64 {
        1.0 / (&self.covariance * 2.0).determinant().sqrt()
    }

    pub fn apply_symplectic(&self, s: &SymplecticTransform) -> Result<GaussianState> {
        if s.matrix.nrows() != self.mean.len() {
            return Err(Error::InvalidInput(format!(
                "{}-dimensional transform applied to a {}-mode state",
                s.matrix.nrows(),
                self.modes()
            )));
        }
        Ok(Self {
            mean: &s.matrix * &self.mean,
            covariance: &s.matrix * &self.covariance * s.matrix.transpose(),
        })
    }

    /// Pure-loss channel of absorption `γ` on one mode: the mode's
    /// quadratures are scaled by `√(1−γ)` and vacuum noise `γ/2` is added.
    pub fn apply_loss_gaussian(&self, gamma: f64, mode: usize) -> Result<GaussianState> {
        check_range("gamma", gamma, 0.0, 1.0)?;
        if mode >= self.modes() {
            return Err(Error::InvalidInput(format!("mode {mode} does not exist")));
        }
        let t = (1.0 - gamma).sqrt();
        let mut mean = self.mean.clone();
        let mut cov = self.covariance.clone();
        for q in [2 * mode, 2 * mode + 1] {
            mean[q] *= t;
            cov.row_mut(q).scale_mut(t);
            cov.column_mut(q).scale_mut(t);
            cov[(q, q)] += 0.5 * gamma;
        }
        Ok(Self {
            mean,
            covariance: cov,
        })
    }

    /// Mean photon number of one mode.
    pub fn mode_mean(&self, mode: usize) -> f64 {
        let (x, p) = (2 * mode, 2 * mode + 1);
        0.5 * (self.covariance[(x, x)] + self.covariance[(p, p)] + self.mean[x].powi(2) + self.mean[p].powi(2))
            - 0.5
    }
}

/// Zero mean, covariance `I/2`.
pub fn vacuum_state(modes: usize) -> Result<GaussianState> {
    if modes == 0 {
        return Err(Error::InvalidInput("at least one mode is required".into()));
    }
    Ok(GaussianState {
        mean: DVector::zeros(2 * modes),
        covariance: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
    })
}

/// Mean and variance of the total photon number `N = Σ (x² + p² − 1)/2`:
/// `⟨N⟩ = (tr σ + |d|² − M)/2`, `Var N = tr(σ²)/2 − M/4 + dᵀσd`.
pub fn photon_statistics_gaussian(state: &GaussianState) -> (f64, f64) {
    let m = state.modes() as f64;
    let d = &state.mean;
    let sigma = &state.covariance;
    let mean = 0.5 * (sigma.trace() + d.norm_squared() - m);
    let var = 0.5 * (sigma * sigma).trace() - 0.25 * m + (d.transpose() * sigma * d)[(0, 0)];
    (mean.max(0.0), var.max(0.0))
}

/// Two-mode squeezer on modes 0 and 1: `a ↦ cosh r · a + e^{iφ} sinh r · b†`.
/// The inverse is the squeezer at `φ + π`.
pub fn two_mode_squeezer_transform(r: f64, phi: f64) -> Result<SymplecticTransform> {
    if !r.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidInput("squeezing parameters must be finite".into()));
    }
    let (c, s) = (r.cosh(), r.sinh());
    let (cp, sp) = (phi.cos(), phi.sin());
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(4, 4, &[
        c,       0.0,     s * cp,  s * sp,
        0.0,     c,       s * sp, -s * cp,
        s * cp,  s * sp,  c,       0.0,
        s * sp, -s * cp,  0.0,     c,
    ]);
    SymplecticTransform::new(matrix)
}

/// `Ω = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Real matrix `S` with `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || n % 2 != 0 || matrix.ncols() != n {
            return Err(Error::InvalidInput("symplectic matrix must be 2M x 2M".into()));
        }
        let omega = symplectic_form(n / 2);
        let defect = (&matrix * &omega * matrix.transpose() - &omega).abs().max();
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!("matrix is not symplectic (defect {defect:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &SymplecticTransform) -> Result<SymplecticTransform> {
        if self.matrix.nrows() != first.matrix.nrows() {
            return Err(Error::InvalidInput("transforms act on different numbers of modes".into()));
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
        })
    }
}

/// Parameters of the squeeze–absorb–unsqueeze absorption measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su11Config {
    /// Mean photons per mode after the first squeezer, `sinh² r`.
    pub n_in: f64,
    /// Absorption of the probed mode.
    pub gamma: f64,
    pub n_measurements: u64,
    /// Mode that passes through the sample (0 or 1).
    pub lossy_mode: usize,
}

impl Su11Config {
    pub fn new(n_in: f64, gamma: f64) -> Self {
        Self {
            n_in,
            gamma,
            n_measurements: 1,
            lossy_mode: 0,
        }
    }

    pub fn with_measurements(mut self, n: u64) -> Self {
        self.n_measurements = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_in >= 0.0 && self.n_in.is_finite()) {
            return Err(Error::Domain {
                name: "n_in",
                value: self.n_in,
                domain: "[0, inf)".into(),
            });
        }
        check_range("gamma", self.gamma, 0.0, 1.0)?;
        if self.n_measurements == 0 {
            return Err(Error::InvalidInput("n_measurements must be at least 1".into()));
        }
        if self.lossy_mode > 1 {
            return Err(Error::InvalidInput(format!("lossy mode {} does not exist", self.lossy_mode)));
        }
        Ok(())
    }

    /// Squeezing strength `r = asinh √n_in`.
    pub fn squeezing(&self) -> f64 {
        self.n_in.sqrt().asinh()
    }
}

/// Output of [`su11_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct Su11Output {
    pub state: GaussianState,
    pub mean: f64,
    pub sd: f64,
}

/// Vacuum → squeezer(r, 0) → loss(γ) → squeezer(r, π), with photon counting
/// summed over both output modes.
///
/// The three steps are folded into one channel `σ ↦ AσAᵀ + Y` whose entries
/// are written so that `A = I`, `Y = 0` hold exactly at `γ = 0`; multiplying
/// the squeezers out numerically leaves `cosh² r · ε` residue in the output.
pub fn su11_pipeline(config: &Su11Config) -> Result<Su11Output> {
    config.validate()?;
    let r = config.squeezing();
    let (c, s) = (r.cosh(), r.sinh());
    let t = (1.0 - config.gamma).sqrt();
    let u = config.gamma / (1.0 + t);
    let (lossy, other) = (1.0 - u * c * c, 1.0 + u * s * s);
    let cross = c * s * u;
    let g = 0.5 * config.gamma;
    #[rustfmt::skip]
    let mut a = DMatrix::from_row_slice(4, 4, &[
        lossy,  0.0,    -cross, 0.0,
        0.0,    lossy,  0.0,    cross,
        cross,  0.0,    other,  0.0,
        0.0,    -cross, 0.0,    other,
    ]);
    #[rustfmt::skip]
    let mut y = DMatrix::from_row_slice(4, 4, &[
        g * c * c,  0.0,        -g * c * s, 0.0,
        0.0,        g * c * c,  0.0,        g * c * s,
        -g * c * s, 0.0,        g * s * s,  0.0,
        0.0,        g * c * s,  0.0,        g * s * s,
    ]);
    if config.lossy_mode == 1 {
        let swap = DMatrix::from_fn(4, 4, |i, j| if (i + 2) % 4 == j { 1.0 } else { 0.0 });
        a = &swap * a * &swap;
        y = &swap * y * &swap;
    }
    let cov = &a * a.transpose() * 0.5 + y;
    let cov = (&cov + cov.transpose()) * 0.5;
    let state = GaussianState::new(DVector::zeros(4), cov)?;
    let (mean, var) = photon_statistics_gaussian(&state);
    Ok(Su11Output {
        state,
        mean,
        sd: var.sqrt(),
    })
}

/// Error-propagation uncertainty `Δγ = ΔN_out / |d⟨N⟩_out/dγ| / √𝒩`.
pub fn delta_gamma_eq8(config: &Su11Config, cfg: &DifferentiationConfig) -> Result<f64> {
    config.validate()?;
    if !(config.gamma > 0.0 && config.gamma < 1.0) {
        return Err(Error::Domain {
            name: "gamma",
            value: config.gamma,
            domain: "(0, 1)".into(),
        });
    }
    let h = cfg.step_within(config.gamma, 0.0, 1.0)?;
    let local = DifferentiationConfig {
        step: Some(h),
        richardson_levels: cfg.richardson_levels,
    };
    let at = |gamma: f64| Su11Config { gamma, ..*config };
    let single = error_propagation(
        |g| Ok(su11_pipeline(&at(g))?.mean),
        |g| Ok(su11_pipeline(&at(g))?.sd),
        config.gamma,
        &local,
    )?;
    Ok(single / (config.n_measurements as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_examples() {
        let v1 = vacuum_state(1).unwrap();
        assert_eq!(v1.symplectic_eigenvalues(), vec![0.5]);
        let v2 = vacuum_state(2).unwrap();
        assert_eq!(photon_statistics_gaussian(&v2), (0.0, 0.0));
        assert_relative_eq!((v2.covariance() * 2.0).determinant(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn squeezer_examples() {
        let id = two_mode_squeezer_transform(0.0, 0.3).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));
        let s = two_mode_squeezer_transform(0.7, 0.3).unwrap();
        let inv = two_mode_squeezer_transform(0.7, 0.3 + PI).unwrap();
        assert!((inv.compose(&s).unwrap().matrix() - DMatrix::identity(4, 4)).abs().max() < 1e-12);
        let r: f64 = 0.4;
        let tmsv = vacuum_state(2).unwrap().apply_symplectic(&s_for(r)).unwrap();
        assert_relative_eq!(tmsv.mode_mean(0), r.sinh().powi(2), epsilon = 1e-10);
        assert_relative_eq!(tmsv.mode_mean(1), r.sinh().powi(2), epsilon = 1e-10);
    }

    fn s_for(r: f64) -> SymplecticTransform {
        two_mode_squeezer_transform(r, 0.0).unwrap()
    }

    #[test]
    fn non_symplectic_matrix_is_rejected() {
        assert!(SymplecticTransform::new(DMatrix::identity(2, 2) * 2.0).is_err());
        let v = vacuum_state(1).unwrap();
        assert!(v.apply_symplectic(&SymplecticTransform::identity(2)).is_err());
    }

    #[test]
    fn uncertainty_violation_is_rejected() {
        let bad = GaussianState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 0.3);
        assert!(bad.is_err());
    }

    #[test]
    fn loss_examples() {
        let tmsv = vacuum_state(2).unwrap().apply_symplectic(&s_for(0.5)).unwrap();
        assert_eq!(tmsv.apply_loss_gaussian(0.0, 0).unwrap(), tmsv);
        let coherent = GaussianState::new(DVector::from_vec(vec![1.0, -2.0]), DMatrix::identity(2, 2) * 0.5)
            .unwrap();
        let gone = coherent.apply_loss_gaussian(1.0, 0).unwrap();
        assert_eq!(gone, vacuum_state(1).unwrap());
        let out = tmsv.apply_loss_gaussian(0.3, 0).unwrap();
        assert_relative_eq!(out.mode_mean(0), 0.7 * tmsv.mode_mean(0), epsilon = 1e-12);
        assert!(tmsv.apply_loss_gaussian(1.1, 0).is_err());
    }

    #[test]
    fn statistics_of_tmsv_and_coherent_state() {
        let r: f64 = 0.3;
        let tmsv = vacuum_state(2).unwrap().apply_symplectic(&s_for(r)).unwrap();
        let (mean, var) = photon_statistics_gaussian(&tmsv);
        let sh2 = r.sinh().powi(2);
        assert_relative_eq!(mean, 2.0 * sh2, epsilon = 1e-10);
        assert_relative_eq!(var, 4.0 * sh2 * r.cosh().powi(2), epsilon = 1e-10);

        let alpha: f64 = 1.7;
        let coherent = GaussianState::new(
            DVector::from_vec(vec![std::f64::consts::SQRT_2 * alpha, 0.0]),
            DMatrix::identity(2, 2) * 0.5,
        )
        .unwrap();
        let (mean, var) = photon_statistics_gaussian(&coherent);
        assert_relative_eq!(mean, alpha * alpha, epsilon = 1e-12);
        assert_relative_eq!(var, alpha * alpha, epsilon = 1e-12);
    }

    #[test]
    fn pipeline_null_tests() {
        for &n_in in &[0.1, 1.0, 10.0, 100.0] {
            let out = su11_pipeline(&Su11Config::new(n_in, 0.0)).unwrap();
            assert!(out.mean < 1e-12, "n_in = {n_in}: {}", out.mean);
        }
        for &gamma in &[0.0, 0.3, 1.0] {
            let out = su11_pipeline(&Su11Config::new(0.0, gamma)).unwrap();
            assert_eq!(out.mean, 0.0);
        }
        assert!(su11_pipeline(&Su11Config::new(10.0, 1.5)).is_err());
        assert!(su11_pipeline(&Su11Config::new(-1.0, 0.5)).is_err());
    }

    #[test]
    fn pipeline_matches_stepwise_transforms() {
        for &(n_in, gamma, mode) in &[(0.5, 0.2, 0), (10.0, 0.05, 0), (10.0, 0.7, 1), (100.0, 0.01, 1)] {
            let config = Su11Config { lossy_mode: mode, ..Su11Config::new(n_in, gamma) };
            let r = config.squeezing();
            let stepwise = vacuum_state(2)
                .unwrap()
                .apply_symplectic(&two_mode_squeezer_transform(r, 0.0).unwrap())
                .unwrap()
                .apply_loss_gaussian(gamma, mode)
                .unwrap()
                .apply_symplectic(&two_mode_squeezer_transform(r, PI).unwrap())
                .unwrap();
            let folded = su11_pipeline(&config).unwrap().state;
            let scale = stepwise.covariance().abs().max();
            let diff = (stepwise.covariance() - folded.covariance()).abs().max();
            assert!(diff < 1e-12 * scale * (1.0 + n_in), "{n_in} {gamma} {mode}: {diff}");
        }
    }

    #[test]
    fn delta_gamma_scales_with_measurements() {
        let cfg = DifferentiationConfig::default();
        let one = delta_gamma_eq8(&Su11Config::new(10.0, 0.05), &cfg).unwrap();
        let many = delta_gamma_eq8(&Su11Config::new(10.0, 0.05).with_measurements(400), &cfg).unwrap();
        assert_relative_eq!(one / many, 20.0, max_relative = 1e-12);
        assert!(one.is_finite() && one > 0.0);
        assert!(delta_gamma_eq8(&Su11Config::new(10.0, 0.0), &cfg).is_err());
        assert!(matches!(
            delta_gamma_eq8(&Su11Config::new(0.0, 0.3), &cfg),
            Err(Error::InsensitiveObservable { .. })
        ));
    }

    #[test]
    fn small_absorption_is_near_the_fock_bound() {
        let (n_in, gamma) = (10.0, 0.01);
        let d = delta_gamma_eq8(&Su11Config::new(n_in, gamma), &DifferentiationConfig::default()).unwrap();
        let bound = (gamma * (1.0 - gamma) / n_in).sqrt();
        assert!((d / bound - 1.0).abs() < 0.05, "{d} vs {bound}");
    }

    proptest! {
        #[test]
        fn transforms_are_symplectic_and_preserve_spectrum(
            r1 in -1.5f64..1.5, p1 in -4.0f64..4.0, r2 in -1.5f64..1.5, p2 in -4.0f64..4.0,
        ) {
            let s = two_mode_squeezer_transform(r1, p1).unwrap()
                .compose(&two_mode_squeezer_transform(r2, p2).unwrap()).unwrap();
            prop_assert!(SymplecticTransform::new(s.matrix().clone()).is_ok());
            let lossy = vacuum_state(2).unwrap()
                .apply_symplectic(&two_mode_squeezer_transform(0.6, 0.2).unwrap()).unwrap()
                .apply_loss_gaussian(0.4, 1).unwrap();
            let before = lossy.symplectic_eigenvalues();
            let after = lossy.apply_symplectic(&s).unwrap().symplectic_eigenvalues();
            for (a, b) in before.iter().zip(&after) {
                prop_assert!((a - b).abs() < 1e-10 * a.max(1.0), "{a} vs {b}");
            }
            let pure = vacuum_state(2).unwrap().apply_symplectic(&s).unwrap();
            prop_assert!((pure.purity() - 1.0).abs() < 1e-8);
        }

        #[test]
        fn loss_composes(g1 in 0.0f64..=1.0, g2 in 0.0f64..=1.0, mode in 0usize..2) {
            let tmsv = vacuum_state(2).unwrap().apply_symplectic(&s_for(0.8)).unwrap();
            let twice = tmsv.apply_loss_gaussian(g1, mode).unwrap().apply_loss_gaussian(g2, mode).unwrap();
            let once = tmsv.apply_loss_gaussian(1.0 - (1.0 - g1) * (1.0 - g2), mode).unwrap();
            prop_assert!((twice.covariance() - once.covariance()).abs().max() < 1e-12);
            prop_assert!((twice.mean() - once.mean()).abs().max() < 1e-12);
            prop_assert!(twice.symplectic_eigenvalues().iter().all(|&v| v >= 0.5 - 1e-10));
        }
    }
}
