//! Bargmann-type potentials with prescribed resonances, built by chains of
//! Darboux transformations of the free particle.

pub mod chain;
pub mod jost;
pub mod potential;
pub mod wronskian;

use num_complex::Complex64;

pub use chain::{DarbouxChainSpec, ResonancePair};
pub use jost::{exact_phase_shift, exact_s_matrix, jost_function, JostValue};
pub use potential::{AnalyticPotential, PotentialKind};
pub use wronskian::generic_wronskian_potential;

use crate::error::{Error, Result};

pub fn build_one_resonance(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<AnalyticPotential> {
    AnalyticPotential::one_resonance(a1, a2, b1, b2)
}

pub fn build_two_resonance(a: [f64; 4], b: [f64; 4]) -> Result<AnalyticPotential> {
    AnalyticPotential::two_resonance(a, b)
}

/// Regular solution `ψ_n(r, k)` of the transformed equation, together with
/// `dψ_n/dr`. The seed is `sin(kr)`. At a Jost zero `k = α_j` one
/// exponential of the seed is annihilated and the result is the purely
/// outgoing (Siegert) solution; it is still regular and nonzero.
pub fn analytic_wavefunction(
    spec: &DarbouxChainSpec,
    k: Complex64,
    r: f64,
) -> Result<(Complex64, Complex64)> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    wronskian::wronskian_wavefunction(spec, k, r)
}
