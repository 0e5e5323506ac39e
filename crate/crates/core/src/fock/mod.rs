//! Truncated Fock-space simulation of one- and two-mode bosonic probes.
//!
//! States live on `{|n⟩ : n ≤ cutoff}` per mode. Operations that would move
//! population above the cutoff record the lost mass as *leakage* and fail once
//! it exceeds [`LEAKAGE_TOLERANCE`].
//!
//! Conventions:
//! * phase shift `U(θ) = exp(iθ n_m)` on mode `m`;
//! * beam splitter `exp(θ (a b† − a† b))` with `cos θ = √T`, so that
//!   `|1,0⟩ → √T |1,0⟩ + √(1−T) |0,1⟩`;
//! * two-mode squeezer `exp(ξ a† b† − ξ* a b)`, `ξ = r e^{iφ}`, which maps
//!   vacuum to `Σ_n (e^{iφ} tanh r)^n / cosh r |n,n⟩` and whose inverse is
//!   the squeezer at phase `φ + π`.

mod channel;
mod density;
mod ops;
mod qfi;
mod state;

pub use channel::{Branch, BranchEnsemble};
pub use density::{ensemble_to_density, qfi_mixed_sld, DensityMatrix};
pub use qfi::{
    generator_of, generator_spread, qfi_pure_overlap, qfi_pure_variance, FnFamily,
    GeneratedFamily, PhaseFamily, SchmidtDecomposition, UnitaryFamily,
};
pub use state::{FockSpace, FockState};

pub use crate::linalg::Operator;

/// Largest tolerated probability mass pushed above the cutoff by one operation.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

/// Largest number of amplitudes a state may hold.
pub const MAX_AMPLITUDES: usize = 1 << 22;

/// Largest density-matrix dimension handled by the mixed-state oracle.
pub const MAX_DENSITY_DIMENSION: usize = 2048;
