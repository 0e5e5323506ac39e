//! End-to-end metrology scenarios: interferometric phase bounds, NOON-state
//! loss, and absorption measurements with coherent and two-mode squeezed
//! probes.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::fisher::{cramer_rao_bound, fisher_information, PoissonCounting};
use crate::fock::{generator_spread, BranchEnsemble, FockState};
use crate::gaussian::{delta_gamma_eq8, Su11Config};
use crate::numdiff::DifferentiationConfig;

/// Input state of the phase-sensing arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "lowercase")]
pub enum Probe {
    Coherent { mean_photons: f64 },
    Noon { n: usize },
    Fock { n: usize },
}

impl Probe {
    pub fn name(&self) -> &'static str {
        match self {
            Probe::Coherent { .. } => "coherent",
            Probe::Noon { .. } => "noon",
            Probe::Fock { .. } => "fock",
        }
    }

    /// The probe as a Fock-space state; phase shifts act on mode 0.
    pub fn prepare(&self) -> Result<FockState> {
        match *self {
            Probe::Coherent { mean_photons } => {
                if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
                    return Err(Error::Domain {
                        name: "mean_photons",
                        value: mean_photons,
                        domain: "[0, inf)".into(),
                    });
                }
                FockState::coherent(Complex64::from(mean_photons.sqrt()), 0)
            }
            Probe::Noon { n } => FockState::noon(n, n),
            Probe::Fock { n } => FockState::basis(&[n], n),
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::Coherent { mean_photons } => write!(f, "coherent(<n>={mean_photons})"),
            Probe::Noon { n } => write!(f, "noon(N={n})"),
            Probe::Fock { n } => write!(f, "fock(n={n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitLabel {
    Standard,
    Heisenberg,
    /// The probe carries no phase information.
    Degenerate,
}

impl LimitLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            LimitLabel::Standard => "standard",
            LimitLabel::Heisenberg => "heisenberg",
            LimitLabel::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScenarioReport {
    pub probe: Probe,
    pub mean_photons: f64,
    pub n_measurements: u64,
    pub qfi: f64,
    /// Spread of the photon number in the phase-shifted arm.
    pub delta_n: f64,
    /// `1/√(𝒩 F_Q)`; infinite when the QFI vanishes.
    pub delta_theta_bound: f64,
    pub limit_label: LimitLabel,
}

/// Phase `θ` imprinted on mode 0 by `exp(iθ n₀)`; the QFI is `4 Var(n₀)`.
pub fn run_mzi_phase(probe: Probe, n_measurements: u64) -> Result<PhaseScenarioReport> {
    if n_measurements == 0 {
        return Err(Error::InvalidInput("n_measurements must be at least 1".into()));
    }
    let state = probe.prepare()?;
    let generator = state.space().number_operator(0)?;
    let delta_n = generator_spread(&state, &generator)?;
    let qfi = 4.0 * delta_n * delta_n;
    let (mean_photons, _) = state.number_statistics();
    let label = if qfi <= 1e-12 * mean_photons.max(1.0) {
        LimitLabel::Degenerate
    } else if matches!(probe, Probe::Noon { .. }) {
        LimitLabel::Heisenberg
    } else {
        LimitLabel::Standard
    };
    let delta_theta_bound = match label {
        LimitLabel::Degenerate => f64::INFINITY,
        _ => cramer_rao_bound(qfi, n_measurements)?.bound,
    };
    Ok(PhaseScenarioReport {
        probe,
        mean_photons,
        n_measurements,
        qfi,
        delta_n,
        delta_theta_bound,
        limit_label: label,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBranchSummary {
    /// Photons lost from modes 0 and 1.
    pub lost: [usize; 2],
    pub probability: f64,
    pub schmidt_coefficients: Vec<f64>,
    pub is_product: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoonLossReport {
    pub n: usize,
    pub gamma: f64,
    /// Sum over every Kraus branch, not only the one-loss sector.
    pub total_probability: f64,
    pub no_loss_probability: f64,
    /// Branches in which exactly one photon was lost.
    pub one_loss_branches: Vec<LossBranchSummary>,
    pub one_loss_probability: f64,
    pub weights_equal: bool,
    /// Every one-loss branch is a product state.
    pub entanglement_destroyed: bool,
}

/// Loss `γ` on both arms of `(|N,0⟩ + |0,N⟩)/√2`, then a look at the
/// branches where a single photon went missing.
pub fn run_noon_loss(n: usize, gamma: f64) -> Result<NoonLossReport> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("NOON loss needs N >= 2, got {n}")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            domain: "[0, 1)".into(),
        });
    }
    let ensemble = BranchEnsemble::from(FockState::noon(n, n)?)
        .apply_loss(gamma, 0)?
        .apply_loss(gamma, 1)?;
    let mut one_loss = Vec::new();
    let mut no_loss_probability = 0.0;
    for b in ensemble.branches() {
        match b.lost[0] + b.lost[1] {
            0 => no_loss_probability += b.probability,
            1 => {
                let schmidt = b.state.product_state_check()?;
                one_loss.push(LossBranchSummary {
                    lost: b.lost,
                    probability: b.probability,
                    schmidt_coefficients: schmidt.coefficients,
                    is_product: schmidt.is_product,
                });
            }
            _ => {}
        }
    }
    let one_loss_probability = one_loss.iter().map(|b| b.probability).sum();
    let weights_equal = one_loss
        .windows(2)
        .all(|w| (w[0].probability - w[1].probability).abs() <= 1e-12);
    let entanglement_destroyed = !one_loss.is_empty() && one_loss.iter().all(|b| b.is_product);
    Ok(NoonLossReport {
        n,
        gamma,
        total_probability: ensemble.total_probability(),
        no_loss_probability,
        one_loss_branches: one_loss,
        one_loss_probability,
        weights_equal,
        entanglement_destroyed,
    })
}

/// `Δγ` of a coherent probe of `n_in` photons read out by photon counting.
pub fn standard_limit_absorption(n_in: f64, gamma: f64, n_measurements: u64) -> Result<f64> {
    if !(n_in > 0.0 && n_in.is_finite()) {
        return Err(Error::Domain {
            name: "n_in",
            value: n_in,
            domain: "(0, inf)".into(),
        });
    }
    open_unit("gamma", gamma)?;
    let model = PoissonCounting::attenuated_coherent(n_in)?;
    let f = fisher_information(&model, gamma, &DifferentiationConfig::default())?;
    Ok(cramer_rao_bound(f, n_measurements)?.bound)
}

/// `√(γ(1−γ)/(𝒩 n_in))`, the quantum limit for loss estimation with
/// `n_in` photons on the probe.
pub fn delta_gamma_qfi(n_in: f64, gamma: f64, n_measurements: u64) -> Result<f64> {
    open_unit("gamma", gamma)?;
    if !(n_in > 0.0 && n_in.is_finite()) {
        return Err(Error::Domain {
            name: "n_in",
            value: n_in,
            domain: "(0, inf)".into(),
        });
    }
    let fisher = n_in / (gamma * (1.0 - gamma));
    Ok(cramer_rao_bound(fisher, n_measurements)?.bound)
}

fn open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "(0, 1)".into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    pub n_in: f64,
    pub gamma: f64,
    pub n_measurements: u64,
    pub delta_gamma_eq8: f64,
    pub delta_gamma_qfi: f64,
    pub delta_gamma_standard: f64,
    /// `10 log₁₀(Δγ_standard / Δγ_eq8)`.
    pub advantage_db_power: f64,
    /// `20 log₁₀(Δγ_standard / Δγ_eq8)`.
    pub advantage_db_amplitude: f64,
}

/// Squeezed-probe absorption measurement compared with the quantum limit and
/// the coherent-probe limit.
pub fn run_su11(config: &Su11Config) -> Result<AbsorptionReport> {
    config.validate()?;
    let eq8 = delta_gamma_eq8(config, &DifferentiationConfig::default())?;
    let qfi = delta_gamma_qfi(config.n_in, config.gamma, config.n_measurements)?;
    let standard = standard_limit_absorption(config.n_in, config.gamma, config.n_measurements)?;
    let ratio = (standard / eq8).log10();
    Ok(AbsorptionReport {
        n_in: config.n_in,
        gamma: config.gamma,
        n_measurements: config.n_measurements,
        delta_gamma_eq8: eq8,
        delta_gamma_qfi: qfi,
        delta_gamma_standard: standard,
        advantage_db_power: 10.0 * ratio,
        advantage_db_amplitude: 20.0 * ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    NIn,
    Gamma,
}

impl SweepAxis {
    /// 25 log-spaced points over `[0.1, 100]` for `n_in`; 25 linear points
    /// over `[0.01, 0.99]` for `γ`.
    pub fn default_points(&self) -> Vec<f64> {
        match self {
            SweepAxis::NIn => log_grid(0.1, 100.0, 25),
            SweepAxis::Gamma => linear_grid(0.01, 0.99, 25),
        }
    }
}

/// `count` points from `lo` to `hi` inclusive, evenly spaced in `log x`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    grid(count, |t| (a + (b - a) * t).exp(), lo, hi)
}

pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    grid(count, |t| lo + (hi - lo) * t, lo, hi)
}

fn grid(count: usize, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| match i {
                0 => lo,
                i if i == count - 1 => hi,
                i => f(i as f64 / (count - 1) as f64),
            })
            .collect(),
    }
}

/// [`run_su11`] at every point along one axis, other parameters from
/// `fixed`. Points run in parallel; the output keeps the input order.
pub fn sweep(axis: SweepAxis, points: &[f64], fixed: &Su11Config) -> Result<Vec<AbsorptionReport>> {
    points
        .par_iter()
        .map(|&p| {
            let config = match axis {
                SweepAxis::NIn => Su11Config { n_in: p, ..*fixed },
                SweepAxis::Gamma => Su11Config { gamma: p, ..*fixed },
            };
            run_su11(&config)
        })
        .collect()
}

/// The squeeze, absorb, unsqueeze sequence simulated in Fock space with
/// explicit loss branches. Returns mean and variance of the total output
/// photon number.
pub fn su11_fock_statistics(r: f64, gamma: f64, cutoff: usize, lossy_mode: usize) -> Result<(f64, f64)> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let probe = FockState::vacuum(2, cutoff)?.apply_two_mode_squeezer(r, 0.0)?;
    let ensemble = probe
        .apply_loss(gamma, lossy_mode)?
        .apply_two_mode_squeezer(r, std::f64::consts::PI)?;
    Ok(ensemble.number_statistics())
}
