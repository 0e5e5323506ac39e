//! Quantum-metrology numerics: classical and quantum Fisher information,
//! Cramér-Rao bounds, truncated Fock-space and Gaussian simulation of optical
//! probes, and end-to-end phase and absorption estimation scenarios.

pub mod error;
pub mod estimator;
pub mod fisher;
pub mod fock;
pub mod gaussian;
mod linalg;
pub mod numdiff;
pub mod scenarios;

pub use error::{Error, Result};
pub use fisher::{
    classical_fidelity, cramer_rao_bound, error_propagation, fidelity_expansion_check,
    fisher_information, Interval, ParametricModel, PrecisionBound, ProbabilityDistribution,
};
pub use numdiff::DifferentiationConfig;
pub use estimator::{crb_saturation, draw_samples, mle, EstimationReport, MleEstimate, SampleSet};
pub use fock::{FockSpace, FockState};
pub use gaussian::{GaussianState, Su11Config, SymplecticTransform};
pub use scenarios::{AbsorptionReport, PhaseScenarioReport, Probe, SweepAxis};
