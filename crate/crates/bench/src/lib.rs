//! Shared fixtures for the criterion benches.

use dsg_core::PotentialParams;

/// Couplings exercised by every bench: sine-Gordon, just past the bifurcation, and strong.
pub const COUPLINGS: [f64; 3] = [0.0, 1.0, 10.0];

pub fn params(eps: f64) -> PotentialParams {
    PotentialParams::double(eps).expect("bench couplings are valid")
}
