//! Quantum Fisher information of pure probes under unitary families.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{FockSpace, FockState};
use super::Operator;
use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, hermiticity_defect, max_abs};
use crate::numdiff::{central_derivative, richardson_even, DifferentiationConfig};

/// Parameter-dependent unitary `U(X)` acting on a fixed Fock space.
pub trait UnitaryFamily: Sync {
    fn space(&self) -> FockSpace;

    /// `U(x)|ψ⟩`.
    fn apply(&self, x: f64, state: &FockState) -> Result<FockState>;

    /// Dense matrix of `U(x)`; by default assembled column by column from
    /// [`apply`](Self::apply) on basis kets.
    fn unitary(&self, x: f64) -> Result<Operator> {
        let space = self.space();
        let dim = space.dim();
        let mut u = Operator::zeros(dim, dim);
        for col in 0..dim {
            let mut ket = vec![Complex64::default(); dim];
            ket[col] = Complex64::from(1.0);
            let image = self.apply(x, &FockState::from_amplitudes(space, ket)?)?;
            for (row, a) in image.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// `G` such that `U(X) = exp(iGX)`, when known in closed form.
    fn generator(&self) -> Option<Operator> {
        None
    }
}

/// `U(θ) = exp(iθ n_m)`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseFamily {
    space: FockSpace,
    mode: usize,
}

impl PhaseFamily {
    pub fn new(space: FockSpace, mode: usize) -> Result<Self> {
        space.check_mode(mode)?;
        Ok(Self { space, mode })
    }
}

impl UnitaryFamily for PhaseFamily {
    fn space(&self) -> FockSpace {
        self.space
    }
    fn apply(&self, x: f64, state: &FockState) -> Result<FockState> {
        state.apply_phase_shift(x, self.mode)
    }
    fn unitary(&self, x: f64) -> Result<Operator> {
        let diag = self.space.number_operator(self.mode)?.diagonal();
        Ok(DMatrix::from_diagonal(&diag.map(|n| Complex64::from_polar(1.0, x * n.re))))
    }
    fn generator(&self) -> Option<Operator> {
        self.space.number_operator(self.mode).ok()
    }
}

/// `U(X) = exp(iGX)` for a Hermitian generator `G`.
#[derive(Debug, Clone)]
pub struct GeneratedFamily {
    space: FockSpace,
    generator: Operator,
    expose_generator: bool,
}

impl GeneratedFamily {
    pub fn new(space: FockSpace, generator: Operator) -> Result<Self> {
        if generator.nrows() != space.dim() || generator.ncols() != space.dim() {
            return Err(Error::InvalidInput("generator does not match the space dimension".into()));
        }
        if hermiticity_defect(&generator) > 1e-12 * max_abs(&generator).max(1.0) {
            return Err(Error::InvalidInput("generator is not Hermitian".into()));
        }
        Ok(Self {
            space,
            generator,
            expose_generator: true,
        })
    }

    /// Same family, but forces [`generator_of`] onto the finite-difference path.
    pub fn opaque(mut self) -> Self {
        self.expose_generator = false;
        self
    }
}

impl UnitaryFamily for GeneratedFamily {
    fn space(&self) -> FockSpace {
        self.space
    }
    fn apply(&self, x: f64, state: &FockState) -> Result<FockState> {
        state.transform(&self.unitary(x)?)
    }
    fn unitary(&self, x: f64) -> Result<Operator> {
        Ok(exp_i_hermitian(&(&self.generator * Complex64::from(x))))
    }
    fn generator(&self) -> Option<Operator> {
        self.expose_generator.then(|| self.generator.clone())
    }
}

/// Family given by a closure returning the unitary matrix.
pub struct FnFamily<F> {
    space: FockSpace,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(f64) -> Operator + Sync,
{
    pub fn new(space: FockSpace, f: F) -> Self {
        Self { space, f }
    }
}

impl<F> UnitaryFamily for FnFamily<F>
where
    F: Fn(f64) -> Operator + Sync,
{
    fn space(&self) -> FockSpace {
        self.space
    }
    fn apply(&self, x: f64, state: &FockState) -> Result<FockState> {
        let u = (self.f)(x);
        state.check_operator(&u)?;
        let out = u * state.to_vector();
        Ok(FockState::from_amplitudes(self.space, out.iter().copied().collect())?
            .set_leakage(state.leakage()))
    }
    fn unitary(&self, x: f64) -> Result<Operator> {
        Ok((self.f)(x))
    }
}

/// Local generator `O(X) = −i (dU/dX) U†(X)`.
///
/// Returns the closed-form generator when the family has one; otherwise the
/// derivative is taken by Richardson central differences. For
/// `U = exp(iGX)` both routes give `O = G`.
pub fn generator_of<U: UnitaryFamily + ?Sized>(
    family: &U,
    x: f64,
    cfg: &DifferentiationConfig,
) -> Result<Operator> {
    if let Some(g) = family.generator() {
        return Ok(g);
    }
    let u = family.unitary(x)?;
    let dim = u.nrows();
    let drift = max_abs(&(&u * u.adjoint() - Operator::identity(dim, dim)));
    if drift > 1e-8 {
        return Err(Error::InvalidFamily(format!("U(x) U†(x) deviates from identity by {drift:e}")));
    }
    let du = central_derivative(|t| family.unitary(t), x, cfg.step_at(x), cfg.richardson_levels)?;
    let o = du * u.adjoint() * Complex64::new(0.0, -1.0);
    let defect = hermiticity_defect(&o);
    if defect > 1e-8 {
        return Err(Error::InvalidFamily(format!("local generator is not Hermitian (defect {defect:e})")));
    }
    Ok((&o + o.adjoint()) * Complex64::from(0.5))
}

/// Standard deviation `ΔG` of a Hermitian operator in a pure state.
pub fn generator_spread(state: &FockState, generator: &Operator) -> Result<f64> {
    state.check_operator(generator)?;
    if hermiticity_defect(generator) > 1e-10 * max_abs(generator).max(1.0) {
        return Err(Error::InvalidInput("generator is not Hermitian".into()));
    }
    let v = state.to_vector();
    let gv = generator * &v;
    let norm = v.dotc(&v).re;
    let mean = v.dotc(&gv).re / norm;
    let second = gv.dotc(&gv).re / norm;
    Ok((second - mean * mean).max(0.0).sqrt())
}

/// Pure-state QFI `4⟨(ΔG)²⟩` in the initial state.
pub fn qfi_pure_variance(state0: &FockState, generator: &Operator) -> Result<f64> {
    let spread = generator_spread(state0, generator)?;
    Ok(4.0 * spread * spread)
}

/// Pure-state QFI from the decay of `|⟨ψ(x)|ψ(x+h)⟩|² ≈ 1 − F h²/4`.
///
/// Uses the symmetric combination `2(2 − f(x+h) − f(x−h))/h²`, which is
/// even in `h`, followed by Richardson extrapolation.
pub fn qfi_pure_overlap<U: UnitaryFamily + ?Sized>(
    family: &U,
    state0: &FockState,
    x: f64,
    cfg: &DifferentiationConfig,
) -> Result<f64> {
    let here = family.apply(x, state0)?;
    let fidelity_at = |t: f64| -> Result<f64> { here.fidelity(&family.apply(t, state0)?) };
    let estimate = richardson_even(
        |h| {
            let decay = 2.0 - fidelity_at(x + h)? - fidelity_at(x - h)?;
            Ok(2.0 * decay / (h * h))
        },
        cfg.step_at(x),
        cfg.richardson_levels,
    )?;
    Ok(estimate.max(0.0))
}

/// Schmidt coefficients of a two-mode pure state across the mode bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    /// Sorted in decreasing order.
    pub coefficients: Vec<f64>,
    pub is_product: bool,
}

impl SchmidtDecomposition {
    pub fn rank(&self, threshold: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > threshold).count()
    }
}

impl FockState {
    /// Schmidt decomposition; the state is a product iff the second
    /// coefficient is at most `1e-10`.
    pub fn product_state_check(&self) -> Result<SchmidtDecomposition> {
        let space = self.space();
        if space.modes() != 2 {
            return Err(Error::InvalidInput("Schmidt decomposition needs a two-mode state".into()));
        }
        let side = space.cutoff() + 1;
        let m = DMatrix::from_row_slice(side, side, self.amplitudes());
        let mut coefficients: Vec<f64> = m.singular_values().iter().copied().collect();
        coefficients.sort_by(|a, b| b.total_cmp(a));
        let is_product = coefficients.get(1).map_or(true, |&c| c <= 1e-10);
        Ok(SchmidtDecomposition {
            coefficients,
            is_product,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn annihilation(space: FockSpace, mode: usize) -> Operator {
        let dim = space.dim();
        let mut a = Operator::zeros(dim, dim);
        for i in 0..dim {
            let occ = space.occupations(i);
            if occ[mode] > 0 {
                let mut t = occ;
                t[mode] -= 1;
                a[(space.index(&t[..space.modes()]), i)] = Complex64::from((occ[mode] as f64).sqrt());
            }
        }
        a
    }

    fn bs_generator(space: FockSpace) -> Operator {
        // i(a b† − a† b) is Hermitian
        let a = annihilation(space, 0);
        let b = annihilation(space, 1);
        (&a * b.adjoint() - a.adjoint() * &b) * Complex64::i()
    }

    #[test]
    fn finite_difference_generator_recovers_g() {
        let space = FockSpace::new(2, 3).unwrap();
        let g = bs_generator(space);
        let family = GeneratedFamily::new(space, g.clone()).unwrap().opaque();
        for &x in &[0.0, 0.4, 1.3] {
            let o = generator_of(&family, x, &DifferentiationConfig::unitary()).unwrap();
            assert!(max_abs(&(&o - &g)) < 1e-8, "x = {x}");
            assert!(hermiticity_defect(&o) < 1e-8);
        }
    }

    #[test]
    fn phase_family_generator_is_number_operator() {
        let space = FockSpace::new(2, 4).unwrap();
        let n0 = space.number_operator(0).unwrap();
        let family = PhaseFamily::new(space, 0).unwrap();
        let analytic = generator_of(&family, 0.3, &DifferentiationConfig::unitary()).unwrap();
        assert_eq!(analytic, n0);
        let numeric = FnFamily::new(space, move |x| family.unitary(x).unwrap());
        let o = generator_of(&numeric, 0.3, &DifferentiationConfig::unitary()).unwrap();
        assert!(max_abs(&(o - n0)) < 1e-8);
    }

    #[test]
    fn constant_family_has_zero_generator() {
        let space = FockSpace::new(1, 5).unwrap();
        let u = PhaseFamily::new(space, 0).unwrap().unitary(0.8).unwrap();
        let family = FnFamily::new(space, move |_| u.clone());
        let o = generator_of(&family, 0.2, &DifferentiationConfig::unitary()).unwrap();
        assert!(max_abs(&o) < 1e-12);
        let probe = FockState::normalized(space, vec![Complex64::from(1.0); 6]).unwrap();
        let f = qfi_pure_overlap(&family, &probe, 0.2, &DifferentiationConfig::unitary()).unwrap();
        assert!(f.abs() < 1e-6);
    }

    #[test]
    fn non_unitary_family_is_rejected() {
        let space = FockSpace::new(1, 2).unwrap();
        let family = FnFamily::new(space, |x| Operator::identity(3, 3) * Complex64::from(1.0 + x));
        assert!(matches!(
            generator_of(&family, 0.5, &DifferentiationConfig::unitary()),
            Err(Error::InvalidFamily(_))
        ));
    }

    #[test]
    fn qfi_examples() {
        let coherent = FockState::coherent(Complex64::from(10f64.sqrt()), 0).unwrap();
        let n = coherent.space().number_operator(0).unwrap();
        assert_relative_eq!(qfi_pure_variance(&coherent, &n).unwrap(), 40.0, max_relative = 1e-8);

        for big_n in [2usize, 3, 7] {
            let noon = FockState::noon(big_n, big_n).unwrap();
            let n0 = noon.space().number_operator(0).unwrap();
            let f = qfi_pure_variance(&noon, &n0).unwrap();
            assert_relative_eq!(f, (big_n * big_n) as f64, max_relative = 1e-12);
        }

        let fock = FockState::basis(&[4], 6).unwrap();
        let n = fock.space().number_operator(0).unwrap();
        assert_eq!(qfi_pure_variance(&fock, &n).unwrap(), 0.0);
    }

    #[test]
    fn energy_time_relation() {
        // Two-level "atom" |0⟩+|2⟩ with H = ω n: ΔH = ω, bound Δt = 1/(2ΔH).
        let omega = 1.7;
        let space = FockSpace::new(1, 2).unwrap();
        let state = FockState::normalized(
            space,
            vec![Complex64::from(1.0), Complex64::default(), Complex64::from(1.0)],
        )
        .unwrap();
        let h = space.number_operator(0).unwrap() * Complex64::from(omega / 2.0);
        let spread = generator_spread(&state, &h).unwrap();
        let bound = crate::fisher::cramer_rao_bound(qfi_pure_variance(&state, &h).unwrap(), 1)
            .unwrap()
            .bound;
        assert_relative_eq!(bound * spread, 0.5, epsilon = 1e-12);
        assert_relative_eq!(spread, omega / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn non_hermitian_generator_is_rejected() {
        let state = FockState::vacuum(1, 2).unwrap();
        let mut g = Operator::zeros(3, 3);
        g[(0, 1)] = Complex64::from(1.0);
        assert!(matches!(qfi_pure_variance(&state, &g), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn overlap_path_matches_variance_path() {
        let cfg = DifferentiationConfig::unitary();
        let coherent = FockState::coherent(Complex64::from(10f64.sqrt()), 0).unwrap();
        let fam = PhaseFamily::new(coherent.space(), 0).unwrap();
        assert_relative_eq!(qfi_pure_overlap(&fam, &coherent, 0.0, &cfg).unwrap(), 40.0, max_relative = 1e-5);

        let noon = FockState::noon(4, 4).unwrap();
        let fam = PhaseFamily::new(noon.space(), 0).unwrap();
        assert_relative_eq!(qfi_pure_overlap(&fam, &noon, 0.3, &cfg).unwrap(), 16.0, max_relative = 1e-5);

        let space = FockSpace::new(2, 2).unwrap();
        let g = bs_generator(space);
        let fam = GeneratedFamily::new(space, g.clone()).unwrap();
        let probe = FockState::basis(&[2, 0], 2).unwrap();
        let variance = qfi_pure_variance(&probe, &g).unwrap();
        assert_relative_eq!(qfi_pure_overlap(&fam, &probe, 0.1, &cfg).unwrap(), variance, max_relative = 1e-5);
    }

    #[test]
    fn schmidt_examples() {
        let s = FockState::basis(&[2, 0], 3).unwrap().product_state_check().unwrap();
        assert!(s.is_product);
        let noon = FockState::noon(2, 2).unwrap().product_state_check().unwrap();
        assert!(!noon.is_product);
        assert_relative_eq!(noon.coefficients[0], FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_relative_eq!(noon.coefficients[1], FRAC_1_SQRT_2, epsilon = 1e-14);
        let coh = FockState::coherent(Complex64::new(0.7, 0.2), 0).unwrap();
        let vac = FockState::vacuum(1, 0).unwrap();
        let product = FockState::tensor(&coh, &vac).unwrap();
        assert!(product.product_state_check().unwrap().is_product);
        assert!(coh.product_state_check().is_err());
    }
}
