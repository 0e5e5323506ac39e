//! Density matrices and the symmetric-logarithmic-derivative QFI.
//!
//! Used as an independent check on the pure-state formulas and on the
//! Fock-state loss bound; everything here is dense and scales as `d³`.

use num_complex::Complex64;

use super::channel::BranchEnsemble;
use super::{Operator, MAX_DENSITY_DIMENSION};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, max_abs};
use crate::numdiff::{central_derivative, DifferentiationConfig};

/// Eigenvalue sums below this are dropped from the SLD solution.
const SLD_CUTOFF: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Operator,
}

impl DensityMatrix {
    pub fn new(matrix: Operator) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || d == 0 {
            return Err(Error::InvalidInput("density matrix must be square and non-empty".into()));
        }
        if d > MAX_DENSITY_DIMENSION {
            return Err(Error::Capacity {
                requested: d,
                limit: MAX_DENSITY_DIMENSION,
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > 1e-12 {
            return Err(Error::InvalidInput(format!("density matrix not Hermitian (defect {defect:e})")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("density matrix trace is {trace}")));
        }
        let lowest = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &l| m.min(l));
        if lowest < -1e-10 {
            return Err(Error::InvalidInput(format!("density matrix has eigenvalue {lowest:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// `ρ = Σ_i p_i |ψ_i⟩⟨ψ_i|` over the joint truncated basis.
pub fn ensemble_to_density(ensemble: &BranchEnsemble) -> Result<DensityMatrix> {
    let d = ensemble.space().dim();
    if d > MAX_DENSITY_DIMENSION {
        return Err(Error::Capacity {
            requested: d,
            limit: MAX_DENSITY_DIMENSION,
        });
    }
    let mut rho = Operator::zeros(d, d);
    for b in ensemble.branches() {
        let v = b.state.to_vector();
        rho += (&v * v.adjoint()) * Complex64::from(b.probability);
    }
    // Remove rounding asymmetry before validation.
    let rho = (&rho + rho.adjoint()) * Complex64::from(0.5);
    DensityMatrix::new(rho)
}

/// Mixed-state QFI `Tr(ρ L²)` where `dρ/dx = (ρL + Lρ)/2`.
///
/// The SLD is solved in the eigenbasis of `ρ(x)`,
/// `L_ij = 2 (dρ)_ij / (λ_i + λ_j)`, dropping pairs with `λ_i + λ_j`
/// below `1e-12`; `dρ/dx` comes from Richardson central differences.
pub fn qfi_mixed_sld<F>(mut rho_fn: F, x: f64, cfg: &DifferentiationConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<DensityMatrix>,
{
    let rho = rho_fn(x)?;
    let d = rho.dimension();
    let drho = central_derivative(
        |t| {
            let m = rho_fn(t)?;
            if m.dimension() != d {
                return Err(Error::InvalidInput("density family changes dimension".into()));
            }
            Ok(m.matrix)
        },
        x,
        cfg.step_at(x),
        cfg.richardson_levels,
    )?;
    let eig = rho.matrix.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let drho_eigen = v.adjoint() * drho * v;
    let mut sld = Operator::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let s = lambda[i] + lambda[j];
            if s > SLD_CUTOFF {
                sld[(i, j)] = drho_eigen[(i, j)] * (2.0 / s);
            }
        }
    }
    let rho_diag = Operator::from_diagonal(&lambda.map(|l| Complex64::from(l.max(0.0))));
    let value = (rho_diag * &sld * &sld).trace();
    if value.im.abs() > 1e-8 * value.re.abs().max(1.0) || max_abs(&sld).is_nan() {
        return Err(Error::InvalidInput(format!("SLD trace is not real: {value}")));
    }
    Ok(value.re.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{fisher_information, BinomialModel};
    use crate::fock::{qfi_pure_variance, FockState};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_branch_is_rank_one_projector() {
        let s = FockState::noon(2, 2).unwrap();
        let rho = ensemble_to_density(&s.clone().into()).unwrap();
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lossy_noon_diagonal_blocks_match_branch_probabilities() {
        let gamma = 0.3;
        let e = FockState::noon(2, 2)
            .unwrap()
            .apply_loss(gamma, 0)
            .unwrap()
            .apply_loss(gamma, 1)
            .unwrap();
        let rho = ensemble_to_density(&e).unwrap();
        let space = e.space();
        let p = |occ: [usize; 2]| rho.matrix()[(space.index(&occ), space.index(&occ))].re;
        // ⟨1,0|ρ|1,0⟩ collects the one-photon-loss branch from mode 0.
        assert_relative_eq!(p([1, 0]), 0.5 * 2.0 * gamma * (1.0 - gamma), epsilon = 1e-14);
        assert_relative_eq!(p([0, 1]), 0.5 * 2.0 * gamma * (1.0 - gamma), epsilon = 1e-14);
        assert_relative_eq!(p([0, 0]), gamma * gamma, epsilon = 1e-14);
        assert_relative_eq!(p([2, 0]), 0.5 * (1.0 - gamma).powi(2), epsilon = 1e-14);
        // coherence between |2,0⟩ and |0,2⟩ survives only in the no-loss branch
        let coh = rho.matrix()[(space.index(&[2, 0]), space.index(&[0, 2]))].norm();
        assert_relative_eq!(coh, 0.5 * (1.0 - gamma).powi(2), epsilon = 1e-14);
    }

    #[test]
    fn invalid_density_matrices_are_rejected() {
        let mut m = Operator::identity(2, 2) * Complex64::from(0.5);
        m[(0, 1)] = Complex64::from(0.1);
        assert!(DensityMatrix::new(m).is_err());
        let m = Operator::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from(1.2),
            Complex64::from(-0.2),
        ]));
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn sld_matches_pure_state_variance_on_noon_phase_family() {
        let noon = FockState::noon(2, 2).unwrap();
        let n0 = noon.space().number_operator(0).unwrap();
        let rho_fn = |theta: f64| ensemble_to_density(&noon.apply_phase_shift(theta, 0)?.into());
        let sld = qfi_mixed_sld(rho_fn, 0.4, &DifferentiationConfig::unitary()).unwrap();
        let pure = qfi_pure_variance(&noon, &n0).unwrap();
        assert_relative_eq!(sld, pure, max_relative = 1e-4);
    }

    #[test]
    fn sld_on_lossy_fock_states_is_binomial_fisher() {
        let cfg = DifferentiationConfig::default();
        for n in 1..=4u32 {
            let fock = FockState::basis(&[n as usize], n as usize).unwrap();
            for &gamma in &[0.1, 0.5] {
                let rho_fn = |g: f64| ensemble_to_density(&fock.apply_loss(g, 0)?);
                let sld = qfi_mixed_sld(rho_fn, gamma, &cfg).unwrap();
                let oracle =
                    fisher_information(&BinomialModel::surviving_photons(n), gamma, &cfg).unwrap();
                assert_relative_eq!(sld, oracle, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn constant_density_has_zero_qfi() {
        let s = FockState::noon(2, 2).unwrap().apply_loss(0.3, 0).unwrap();
        let rho = ensemble_to_density(&s).unwrap();
        let f = qfi_mixed_sld(|_| Ok(rho.clone()), 0.2, &DifferentiationConfig::default()).unwrap();
        assert_eq!(f, 0.0);
    }

    proptest! {
        #[test]
        fn random_ensembles_have_unit_trace(
            re in prop::collection::vec(-1.0f64..1.0, 9),
            im in prop::collection::vec(-1.0f64..1.0, 9),
            gamma in 0.0f64..1.0,
        ) {
            prop_assume!(re.iter().chain(&im).any(|x| x.abs() > 1e-3));
            let space = crate::fock::FockSpace::new(2, 2).unwrap();
            let amps = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            let s = FockState::normalized(space, amps).unwrap();
            let rho = ensemble_to_density(&s.apply_loss(gamma, 1).unwrap()).unwrap();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        }
    }
}
