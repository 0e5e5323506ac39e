use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Operator, MAX_AMPLITUDES};
use crate::error::{Error, Result};

/// Shape of a truncated Fock space: one or two modes, `0..=cutoff` photons each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        if !(modes == 1 || modes == 2) {
            return Err(Error::InvalidInput(format!("{modes} modes requested; only 1 or 2 are supported")));
        }
        let side = cutoff.checked_add(1).ok_or(Error::Capacity {
            requested: usize::MAX,
            limit: MAX_AMPLITUDES,
        })?;
        let dim = side.checked_pow(modes as u32).unwrap_or(usize::MAX);
        if dim > MAX_AMPLITUDES {
            return Err(Error::Capacity {
                requested: dim,
                limit: MAX_AMPLITUDES,
            });
        }
        Ok(Self { modes, cutoff })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1).pow(self.modes as u32)
    }

    /// Flat index of an occupation pattern (mode 0 is the slow index).
    pub fn index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.modes);
        occupations
            .iter()
            .fold(0, |acc, &n| acc * (self.cutoff + 1) + n)
    }

    /// Occupations of a flat index; the second entry is 0 for one mode.
    pub fn occupations(&self, index: usize) -> [usize; 2] {
        match self.modes {
            1 => [index, 0],
            _ => [index / (self.cutoff + 1), index % (self.cutoff + 1)],
        }
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "mode {mode} does not exist in a {}-mode space",
                self.modes
            )))
        }
    }

    /// Photon-number operator of one mode.
    pub fn number_operator(&self, mode: usize) -> Result<Operator> {
        self.check_mode(mode)?;
        Ok(DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| Complex64::from(self.occupations(i)[mode] as f64)),
        )))
    }

    /// Total photon-number operator.
    pub fn total_number_operator(&self) -> Operator {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| {
                let [a, b] = self.occupations(i);
                Complex64::from((a + b) as f64)
            }),
        ))
    }
}

/// Normalized pure state on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    space: FockSpace,
    amplitudes: Vec<Complex64>,
    leakage: f64,
}

impl FockState {
    /// Wraps amplitudes whose norm must already be one (within `1e-10`).
    pub fn from_amplitudes(space: FockSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(space, amplitudes)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("state norm² is {norm}, expected 1")));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(space: FockSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::unchecked(space, amplitudes)?;
        let norm = state.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        state.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(space: FockSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        Ok(Self {
            space,
            amplitudes,
            leakage: 0.0,
        })
    }

    pub fn vacuum(modes: usize, cutoff: usize) -> Result<Self> {
        Self::basis(&vec![0; modes], cutoff)
    }

    /// Number state `|n⟩` or `|n₀, n₁⟩`.
    pub fn basis(occupations: &[usize], cutoff: usize) -> Result<Self> {
        let space = FockSpace::new(occupations.len(), cutoff)?;
        if let Some(&n) = occupations.iter().find(|&&n| n > cutoff) {
            return Err(Error::Capacity {
                requested: n,
                limit: cutoff,
            });
        }
        let mut amplitudes = vec![Complex64::default(); space.dim()];
        amplitudes[space.index(occupations)] = Complex64::from(1.0);
        Self::from_amplitudes(space, amplitudes)
    }

    /// Single-mode coherent state `|α⟩`.
    ///
    /// The cutoff is raised to at least `|α|² + 10|α| + 20`.
    pub fn coherent(alpha: Complex64, cutoff: usize) -> Result<Self> {
        let a = alpha.norm();
        if !a.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite amplitude {alpha}")));
        }
        let safe = (a * a + 10.0 * a + 20.0).ceil();
        if safe >= MAX_AMPLITUDES as f64 {
            return Err(Error::Capacity {
                requested: safe as usize,
                limit: MAX_AMPLITUDES - 1,
            });
        }
        let cutoff = cutoff.max(safe as usize);
        let space = FockSpace::new(1, cutoff)?;
        let mut amplitudes = Vec::with_capacity(cutoff + 1);
        let mut c = Complex64::from((-0.5 * a * a).exp());
        amplitudes.push(c);
        for n in 1..=cutoff {
            c = c * alpha / (n as f64).sqrt();
            amplitudes.push(c);
        }
        // Very bright states underflow e^{-|α|²/2}; fall back to log space.
        if amplitudes.iter().all(|z| z.norm() == 0.0) {
            let (r, theta) = alpha.to_polar();
            let mut log_fact = 0.0;
            for (n, amp) in amplitudes.iter_mut().enumerate() {
                if n > 0 {
                    log_fact += (n as f64).ln();
                }
                let log_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * log_fact;
                *amp = Complex64::from_polar(log_mag.exp(), n as f64 * theta);
            }
        }
        Self::normalized(space, amplitudes)
    }

    /// `(|N,0⟩ + |0,N⟩)/√2`.
    pub fn noon(n: usize, cutoff: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("NOON state needs N ≥ 1".into()));
        }
        if n > cutoff {
            return Err(Error::Capacity {
                requested: n,
                limit: cutoff,
            });
        }
        let space = FockSpace::new(2, cutoff)?;
        let mut amplitudes = vec![Complex64::default(); space.dim()];
        let w = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        amplitudes[space.index(&[n, 0])] = w;
        amplitudes[space.index(&[0, n])] = w;
        Self::from_amplitudes(space, amplitudes)
    }

    /// Two-mode squeezed vacuum `Σ_n (e^{iφ} tanh r)^n / cosh r |n,n⟩`.
    ///
    /// The cutoff is raised until the discarded tail mass is below `1e-12`.
    pub fn two_mode_squeezed_vacuum(r: f64, phi: f64, cutoff: usize) -> Result<Self> {
        if !r.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidInput("squeezing parameters must be finite".into()));
        }
        let t = r.tanh().abs();
        let needed = if t == 0.0 {
            0
        } else {
            // tail mass beyond n = c is t^{2(c+1)}
            ((1e-12f64).ln() / (2.0 * t.ln())).ceil() as usize
        };
        let cutoff = cutoff.max(needed);
        let space = FockSpace::new(2, cutoff)?;
        let mut amplitudes = vec![Complex64::default(); space.dim()];
        let ratio = Complex64::from_polar(r.tanh(), phi);
        let mut c = Complex64::from(1.0 / r.cosh());
        for n in 0..=cutoff {
            amplitudes[space.index(&[n, n])] = c;
            c *= ratio;
        }
        Self::normalized(space, amplitudes)
    }

    /// Product `|a⟩ ⊗ |b⟩` of two single-mode states; the smaller cutoff is padded.
    pub fn tensor(a: &FockState, b: &FockState) -> Result<Self> {
        if a.space.modes != 1 || b.space.modes != 1 {
            return Err(Error::InvalidInput("tensor product needs two single-mode states".into()));
        }
        let cutoff = a.space.cutoff.max(b.space.cutoff);
        let space = FockSpace::new(2, cutoff)?;
        let mut amplitudes = vec![Complex64::default(); space.dim()];
        for (i, x) in a.amplitudes.iter().enumerate() {
            for (j, y) in b.amplitudes.iter().enumerate() {
                amplitudes[space.index(&[i, j])] = x * y;
            }
        }
        let mut state = Self::normalized(space, amplitudes)?;
        state.leakage = a.leakage + b.leakage;
        Ok(state)
    }

    /// Same state in a space with a different cutoff. Shrinking drops
    /// amplitudes above the new cutoff, recorded as leakage.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        let space = FockSpace::new(self.space.modes, cutoff)?;
        let mut amplitudes = vec![Complex64::default(); space.dim()];
        let mut dropped = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let occ = self.space.occupations(i);
            if occ[..self.space.modes].iter().all(|&n| n <= cutoff) {
                amplitudes[space.index(&occ[..self.space.modes])] = *a;
            } else {
                dropped += a.norm_sqr();
            }
        }
        let mut state = Self::normalized(space, amplitudes)?;
        state.leakage = self.leakage + dropped;
        Ok(state)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn modes(&self) -> usize {
        self.space.modes
    }

    pub fn cutoff(&self) -> usize {
        self.space.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of an occupation pattern; zero above the cutoff.
    pub fn amplitude(&self, occupations: &[usize]) -> Complex64 {
        if occupations.len() != self.space.modes || occupations.iter().any(|&n| n > self.space.cutoff) {
            return Complex64::default();
        }
        self.amplitudes[self.space.index(occupations)]
    }

    /// Total probability mass dropped at the cutoff so far.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::InvalidInput("states live in different spaces".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &FockState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        self.check_operator(op)?;
        let v = self.to_vector();
        Ok(v.dotc(&(op * &v)))
    }

    /// Applies an arbitrary operator and renormalizes.
    pub fn transform(&self, op: &Operator) -> Result<FockState> {
        self.check_operator(op)?;
        let out = op * self.to_vector();
        let mut state = Self::normalized(self.space, out.iter().copied().collect())?;
        state.leakage = self.leakage;
        Ok(state)
    }

    pub(crate) fn check_operator(&self, op: &Operator) -> Result<()> {
        let d = self.space.dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "operator is {}x{}, state dimension is {d}",
                op.nrows(),
                op.ncols()
            )));
        }
        Ok(())
    }

    /// Mean photon number in one mode.
    pub fn mode_mean(&self, mode: usize) -> Result<f64> {
        self.space.check_mode(mode)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.space.occupations(i)[mode] as f64)
            .sum())
    }

    /// `(⟨N⟩, ⟨N²⟩)` of the total photon number.
    pub(crate) fn number_moments(&self) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let [x, y] = self.space.occupations(i);
            let n = (x + y) as f64;
            let p = a.norm_sqr();
            m1 += p * n;
            m2 += p * n * n;
        }
        (m1, m2)
    }

    /// Mean and variance of the total photon number.
    pub fn number_statistics(&self) -> (f64, f64) {
        let (m1, m2) = self.number_moments();
        (m1, (m2 - m1 * m1).max(0.0))
    }

    /// Applies `a` (lowering) or `a†` (raising) to one mode without
    /// renormalizing; raising drops whatever lands above the cutoff.
    pub(crate) fn ladder(&self, mode: usize, raise: bool) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.space.dim()];
        let c = self.space.cutoff;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let occ = self.space.occupations(i);
            let n = occ[mode];
            let mut target = occ;
            let factor = if raise {
                if n == c {
                    continue;
                }
                target[mode] = n + 1;
                ((n + 1) as f64).sqrt()
            } else {
                if n == 0 {
                    continue;
                }
                target[mode] = n - 1;
                (n as f64).sqrt()
            };
            out[self.space.index(&target[..self.space.modes])] += a * factor;
        }
        out
    }

    /// Quadrature means and symmetrized covariance in the ordering
    /// `x₀, p₀, x₁, p₁` with `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`;
    /// vacuum has covariance `I/2`.
    pub fn quadrature_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let (mean, second) = self.raw_quadrature_moments();
        let cov = &second - &mean * mean.transpose();
        (mean, cov)
    }

    /// Means and symmetrized second moments `Re⟨r_k r_l⟩`.
    pub(crate) fn raw_quadrature_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let modes = self.space.modes;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::i();
        // Ladder basis b = (a₀, a₀†, a₁, a₁†); quadrature r_k = Σ_m coeff[k][m] b_m.
        let mut coeff = vec![vec![Complex64::default(); 2 * modes]; 2 * modes];
        for m in 0..modes {
            coeff[2 * m][2 * m] = s.into();
            coeff[2 * m][2 * m + 1] = s.into();
            coeff[2 * m + 1][2 * m] = -i * s;
            coeff[2 * m + 1][2 * m + 1] = i * s;
        }
        let lowered: Vec<_> = (0..modes).map(|m| self.ladder(m, false)).collect();
        let raised: Vec<_> = (0..modes).map(|m| self.ladder(m, true)).collect();
        // b_m ψ and b_m† ψ for each ladder operator.
        let applied = |m: usize| if m % 2 == 0 { &lowered[m / 2] } else { &raised[m / 2] };
        let adjoint_applied = |m: usize| if m % 2 == 0 { &raised[m / 2] } else { &lowered[m / 2] };
        let dot = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
            u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
        };
        let nb = 2 * modes;
        let mut bb = vec![vec![Complex64::default(); nb]; nb];
        let mut b1 = vec![Complex64::default(); nb];
        for m in 0..nb {
            b1[m] = dot(&self.amplitudes, applied(m));
            for n in 0..nb {
                bb[m][n] = dot(adjoint_applied(m), applied(n));
            }
        }
        let mut mean = DVector::zeros(nb);
        let mut second = DMatrix::zeros(nb, nb);
        for k in 0..nb {
            mean[k] = (0..nb).map(|m| coeff[k][m] * b1[m]).sum::<Complex64>().re;
            for l in 0..nb {
                let mut kl = Complex64::default();
                for m in 0..nb {
                    for n in 0..nb {
                        kl += coeff[k][m] * coeff[l][n] * bb[m][n];
                    }
                }
                second[(k, l)] += 0.5 * kl.re;
                second[(l, k)] += 0.5 * kl.re;
            }
        }
        (mean, second)
    }

    pub(crate) fn set_leakage(mut self, total: f64) -> Self {
        self.leakage = total;
        self
    }
}
