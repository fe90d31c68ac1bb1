use num_complex::Complex64;

use super::chain::DarbouxChainSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostValue {
    pub value: Complex64,
    pub k: Complex64,
}

/// `F(k) = Π_j (k - α_j) / (k + i b_j)`.
pub fn jost_function(spec: &DarbouxChainSpec, k: Complex64) -> Result<JostValue> {
    let i = Complex64::i();
    let mut value = Complex64::new(1.0, 0.0);
    for (alpha, &b) in spec.alphas().iter().zip(spec.rates()) {
        let den = k + i * b;
        if den.norm() <= 1e-14 * (1.0 + k.norm()) {
            return Err(Error::PoleOfJost { k });
        }
        value *= (k - alpha) / den;
    }
    Ok(JostValue { value, k })
}

/// Exact phase shift, continuous in `k` with `δ(0) = 0`.
///
/// Each conjugate pair of Jost zeros contributes `-2 Re atan(k / c)` with
/// `c = -i α = a_odd + i a_even`; `k / c` never touches the branch cuts of
/// the complex arctangent for `k > 0`, so no unwrapping is needed.
pub fn exact_phase_shift(spec: &DarbouxChainSpec, k: f64) -> f64 {
    let mut delta = 0.0;
    for pair in spec.resonances() {
        let c = pair.exponents()[0];
        delta -= 2.0 * (Complex64::new(k, 0.0) / c).atan().re;
    }
    for &b in spec.rates() {
        delta -= (k / b).atan();
    }
    delta
}

/// `S(k) = F(-k) / F(k)`.
pub fn exact_s_matrix(spec: &DarbouxChainSpec, k: Complex64) -> Result<Complex64> {
    Ok(jost_function(spec, -k)?.value / jost_function(spec, k)?.value)
}
