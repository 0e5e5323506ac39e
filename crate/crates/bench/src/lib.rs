//! Shared inputs for the criterion benchmarks.

use qsense::gaussian::Su11Config;

/// Ten photons per mode, five percent absorption.
pub fn reference_su11() -> Su11Config {
    Su11Config::new(10.0, 0.05)
}
