//! Photon loss as an ensemble of Kraus branches.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::state::FockState;
use super::LEAKAGE_TOLERANCE;
use crate::error::{check_range, Error, Result};

/// One Kraus branch: a normalized state, its probability, and how many
/// photons each mode has lost along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub state: FockState,
    pub lost: [usize; 2],
}

/// Mixture of pure states sharing one Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchEnsemble {
    branches: Vec<Branch>,
}

impl From<FockState> for BranchEnsemble {
    fn from(state: FockState) -> Self {
        Self {
            branches: vec![Branch {
                probability: 1.0,
                state,
                lost: [0, 0],
            }],
        }
    }
}

impl BranchEnsemble {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidInput("an ensemble needs at least one branch".into()))?;
        let space = first.state.space();
        if branches.iter().any(|b| b.state.space() != space) {
            return Err(Error::InvalidInput("ensemble branches live in different spaces".into()));
        }
        if branches.iter().any(|b| !(b.probability >= 0.0)) {
            return Err(Error::InvalidInput("branch probabilities must be non-negative".into()));
        }
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("branch probabilities sum to {total}")));
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn space(&self) -> super::FockSpace {
        self.branches[0].state.space()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Pure-loss channel with absorption `γ` on one mode.
    ///
    /// Branch `j` applies `K_j |n⟩ = √(C(n,j) γ^j (1−γ)^{n−j}) |n−j⟩`;
    /// branches with zero probability are dropped.
    pub fn apply_loss(&self, gamma: f64, mode: usize) -> Result<BranchEnsemble> {
        check_range("gamma", gamma, 0.0, 1.0)?;
        let space = self.space();
        space.check_mode(mode)?;
        let c = space.cutoff();
        let kraus = loss_coefficients(gamma, c);
        let mut branches = Vec::new();
        for parent in &self.branches {
            for j in 0..=c {
                let mut amplitudes = vec![Complex64::default(); space.dim()];
                let mut weight = 0.0;
                for (i, a) in parent.state.amplitudes().iter().enumerate() {
                    let occ = space.occupations(i);
                    let n = occ[mode];
                    if n < j || a.norm_sqr() == 0.0 {
                        continue;
                    }
                    let k = kraus[n][j];
                    if k == 0.0 {
                        continue;
                    }
                    let mut target = occ;
                    target[mode] = n - j;
                    let v = a * k;
                    amplitudes[space.index(&target[..space.modes()])] = v;
                    weight += v.norm_sqr();
                }
                if weight == 0.0 {
                    continue;
                }
                let mut lost = parent.lost;
                lost[mode] += j;
                let state = FockState::normalized(space, amplitudes)?
                    .set_leakage(parent.state.leakage());
                branches.push(Branch {
                    probability: parent.probability * weight,
                    state,
                    lost,
                });
            }
        }
        Ok(Self { branches })
    }

    /// Applies a state map (typically a unitary) to every branch.
    pub fn map_states<F>(&self, mut f: F) -> Result<BranchEnsemble>
    where
        F: FnMut(&FockState) -> Result<FockState>,
    {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(Branch {
                    probability: b.probability,
                    state: f(&b.state)?,
                    lost: b.lost,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BranchEnsemble::new(branches)
    }

    /// Two-mode squeezer on every branch. The truncation check applies to the
    /// probability-weighted leakage of the whole mixture, so light branches
    /// may individually spill more than a pure state would be allowed to.
    pub fn apply_two_mode_squeezer(&self, r: f64, phi: f64) -> Result<BranchEnsemble> {
        let mut total = 0.0;
        let mut hint = 0;
        let mut branches = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let (state, leaked, h) = b.state.squeeze_unchecked(r, phi)?;
            total += b.probability * leaked;
            if leaked > LEAKAGE_TOLERANCE {
                hint = hint.max(h);
            }
            branches.push(Branch {
                probability: b.probability,
                state,
                lost: b.lost,
            });
        }
        if total > LEAKAGE_TOLERANCE {
            return Err(Error::Truncation {
                leakage: total,
                required_cutoff: hint,
            });
        }
        BranchEnsemble::new(branches)
    }

    /// Ensemble-weighted mean and variance of the total photon number.
    pub fn number_statistics(&self) -> (f64, f64) {
        let (mut m1, mut m2) = (0.0, 0.0);
        for b in &self.branches {
            let (a, s) = b.state.number_moments();
            m1 += b.probability * a;
            m2 += b.probability * s;
        }
        (m1, (m2 - m1 * m1).max(0.0))
    }

    /// Mean photon number in one mode.
    pub fn mode_mean(&self, mode: usize) -> Result<f64> {
        self.branches
            .iter()
            .map(|b| Ok(b.probability * b.state.mode_mean(mode)?))
            .sum()
    }

    /// Quadrature means and covariance of the mixture (see
    /// [`FockState::quadrature_moments`] for the conventions).
    pub fn quadrature_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = 2 * self.space().modes();
        let mut mean = DVector::zeros(n);
        let mut second = DMatrix::zeros(n, n);
        for b in &self.branches {
            let (m, s) = b.state.raw_quadrature_moments();
            mean += m * b.probability;
            second += s * b.probability;
        }
        let cov = second - &mean * mean.transpose();
        (mean, cov)
    }
}

impl FockState {
    /// Loss on one mode of a pure state.
    pub fn apply_loss(&self, gamma: f64, mode: usize) -> Result<BranchEnsemble> {
        BranchEnsemble::from(self.clone()).apply_loss(gamma, mode)
    }
}

// kraus[n][j] = √(C(n,j) γ^j (1−γ)^{n−j})
fn loss_coefficients(gamma: f64, cutoff: usize) -> Vec<Vec<f64>> {
    let mut table = Vec::with_capacity(cutoff + 1);
    let mut binom = vec![1.0f64];
    for n in 0..=cutoff {
        if n > 0 {
            let mut next = vec![1.0; n + 1];
            for j in 1..n {
                next[j] = binom[j - 1] + binom[j];
            }
            binom = next;
        }
        table.push(
            (0..=n)
                .map(|j| {
                    (binom[j] * gamma.powi(j as i32) * (1.0 - gamma).powi((n - j) as i32)).sqrt()
                })
                .collect(),
        );
    }
    table
}
