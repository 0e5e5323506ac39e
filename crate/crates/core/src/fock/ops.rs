//! Unitary operations on [`FockState`]s.
//!
//! The beam splitter conserves total photon number and the two-mode squeezer
//! conserves the photon-number difference, so both are exponentiated block by
//! block on the corresponding invariant subspaces.

use num_complex::Complex64;

use super::state::{FockSpace, FockState};
use super::{Operator, LEAKAGE_TOLERANCE};
use crate::error::{check_range, Error, Result};
use crate::linalg::exp_i_hermitian;

impl FockState {
    /// Multiplies the amplitude of every `|…n_m…⟩` by `exp(iθ n_m)`.
    pub fn apply_phase_shift(&self, theta: f64, mode: usize) -> Result<FockState> {
        let space = self.space();
        space.check_mode(mode)?;
        let amplitudes = self
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::from_polar(1.0, theta * space.occupations(i)[mode] as f64))
            .collect();
        Ok(FockState::from_amplitudes(space, amplitudes)?.set_leakage(self.leakage()))
    }

    /// Two-mode beam splitter with power transmissivity `T`:
    /// `exp(θ (a b† − a† b))`, `cos θ = √T`.
    pub fn apply_beam_splitter(&self, transmissivity: f64) -> Result<FockState> {
        let space = self.two_mode_space("beam splitter")?;
        check_range("transmissivity", transmissivity, 0.0, 1.0)?;
        let theta = transmissivity.sqrt().acos();
        let c = space.cutoff();
        let mut out = vec![Complex64::default(); space.dim()];
        let mut leaked = 0.0;
        for total in 0..=2 * c {
            // basis k ↦ |total − k, k⟩
            let occ = |k: usize| [total - k, k];
            let input: Vec<Complex64> = (0..=total).map(|k| self.amplitude(&occ(k))).collect();
            if input.iter().all(|a| a.norm_sqr() == 0.0) {
                continue;
            }
            let dim = total + 1;
            let mut h = Operator::zeros(dim, dim);
            for k in 0..total {
                let s = theta * (((total - k) * (k + 1)) as f64).sqrt();
                // H = −iK with K_{k+1,k} = s, K_{k,k+1} = −s
                h[(k + 1, k)] = Complex64::new(0.0, -s);
                h[(k, k + 1)] = Complex64::new(0.0, s);
            }
            let u = exp_i_hermitian(&h);
            for k in 0..dim {
                let amp: Complex64 = (0..dim).map(|l| u[(k, l)] * input[l]).sum();
                let [n0, n1] = occ(k);
                if n0 > c || n1 > c {
                    leaked += amp.norm_sqr();
                } else {
                    out[space.index(&[n0, n1])] = amp;
                }
            }
        }
        self.finish(space, out, leaked, 2 * c)
    }

    /// Two-mode squeezer `exp(ξ a†b† − ξ* ab)`, `ξ = r e^{iφ}`.
    ///
    /// Evaluated on an enlarged space and projected back; the mass that lands
    /// above the cutoff is the leakage, which must stay below
    /// [`LEAKAGE_TOLERANCE`].
    pub fn apply_two_mode_squeezer(&self, r: f64, phi: f64) -> Result<FockState> {
        let (state, leaked, hint) = self.squeeze_unchecked(r, phi)?;
        if leaked > LEAKAGE_TOLERANCE {
            return Err(Error::Truncation {
                leakage: leaked,
                required_cutoff: hint,
            });
        }
        Ok(state)
    }

    /// Squeezed state, the mass lost above the cutoff, and the cutoff that
    /// would have kept the loss within tolerance.
    pub(crate) fn squeeze_unchecked(&self, r: f64, phi: f64) -> Result<(FockState, f64, usize)> {
        let space = self.two_mode_space("two-mode squeezer")?;
        if !r.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidInput("squeezing parameters must be finite".into()));
        }
        if r == 0.0 {
            return Ok((self.clone(), 0.0, space.cutoff()));
        }
        let c = space.cutoff();
        let big = c + c.max(20);
        let xi = Complex64::from_polar(r, phi);
        let mut out = vec![Complex64::default(); space.dim()];
        // Mass above each level m of the enlarged result, for the cutoff hint.
        let mut above = vec![0.0; big + 2];
        let mut leaked = 0.0;
        for diff in -(big as isize)..=(big as isize) {
            let shift0 = diff.max(0) as usize;
            let shift1 = (-diff).max(0) as usize;
            let occ = |k: usize| [k + shift0, k + shift1];
            let dim = big + 1 - diff.unsigned_abs();
            let input: Vec<Complex64> = (0..dim).map(|k| self.amplitude(&occ(k))).collect();
            if input.iter().all(|a| a.norm_sqr() == 0.0) {
                continue;
            }
            let mut h = Operator::zeros(dim, dim);
            for k in 0..dim - 1 {
                let [n0, n1] = occ(k);
                let s = (((n0 + 1) * (n1 + 1)) as f64).sqrt();
                // H = −iK with K_{k+1,k} = ξ s, K_{k,k+1} = −ξ* s
                h[(k + 1, k)] = -Complex64::i() * xi * s;
                h[(k, k + 1)] = Complex64::i() * xi.conj() * s;
            }
            let u = exp_i_hermitian(&h);
            for k in 0..dim {
                let amp: Complex64 = (0..dim).map(|l| u[(k, l)] * input[l]).sum();
                let [n0, n1] = occ(k);
                let top = n0.max(n1);
                for level in above.iter_mut().take(top) {
                    *level += amp.norm_sqr();
                }
                if top > c {
                    leaked += amp.norm_sqr();
                } else {
                    out[space.index(&[n0, n1])] = amp;
                }
            }
        }
        let hint = (c..=big)
            .find(|&m| above[m] <= LEAKAGE_TOLERANCE)
            .unwrap_or(2 * big);
        let state = FockState::normalized(space, out)?.set_leakage(self.leakage() + leaked);
        Ok((state, leaked, hint))
    }

    fn two_mode_space(&self, what: &str) -> Result<FockSpace> {
        let space = self.space();
        if space.modes() != 2 {
            return Err(Error::InvalidInput(format!("{what} needs a two-mode state")));
        }
        Ok(space)
    }

    fn finish(
        &self,
        space: FockSpace,
        amplitudes: Vec<Complex64>,
        leaked: f64,
        required_cutoff: usize,
    ) -> Result<FockState> {
        if leaked > LEAKAGE_TOLERANCE {
            return Err(Error::Truncation {
                leakage: leaked,
                required_cutoff,
            });
        }
        Ok(FockState::normalized(space, amplitudes)?.set_leakage(self.leakage() + leaked))
    }
}
