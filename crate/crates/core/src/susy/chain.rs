//! Parameter sets for chains of Darboux transformations starting from the
//! free particle.
//!
//! A chain with `n` resonances uses `2n` irregular exponential transformation
//! functions `exp((a_odd ± i a_even) r)` and `2n` regular functions
//! `sinh(b_j r)`. The Jost function of the resulting potential is
//! `F(k) = Π_j (k - α_j) / (k + i b_j)` with `α = ∓a_even + i a_odd`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dd::{atanh, dd, div, to_f64, Dd};

use crate::error::{Error, Result};

/// Rates closer than this are treated as equal.
pub const DEGENERATE_RATE_TOLERANCE: f64 = 1e-10;

/// One resonance: `a_odd` is the (negative) imaginary part of the resonance
/// momentum, `a_even` the negated real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePair {
    pub a_odd: f64,
    pub a_even: f64,
}

impl ResonancePair {
    /// Resonance momentum `k = -a_even + i a_odd` (fourth quadrant).
    pub fn momentum(&self) -> Complex64 {
        Complex64::new(-self.a_even, self.a_odd)
    }

    pub fn energy(&self) -> Complex64 {
        let k = self.momentum();
        k * k
    }

    /// Growth rates `c` of the two irregular functions `exp(c r)`.
    pub fn exponents(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.a_odd, self.a_even),
            Complex64::new(self.a_odd, -self.a_even),
        ]
    }

    /// Jost-function zeros: the resonance momentum and its mirror `-conj`.
    pub fn alphas(&self) -> [Complex64; 2] {
        [
            Complex64::new(-self.a_even, self.a_odd),
            Complex64::new(self.a_even, self.a_odd),
        ]
    }

    /// Argument shift `ζ` picked up by `sinh(b r)` after the two first-order
    /// transformations with this pair: `tanh ζ = 2 a_odd b / (b² + a_odd² + a_even²)`.
    pub fn shift(&self, b: f64) -> f64 {
        to_f64(self.shift_dd(b))
    }

    pub(crate) fn shift_dd(&self, b: f64) -> Dd {
        let (a1, a2, b) = (dd(self.a_odd), dd(self.a_even), dd(b));
        atanh(div(a1 * b * 2.0, b * b + a1 * a1 + a2 * a2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxChainSpec {
    resonances: Vec<ResonancePair>,
    rates: Vec<f64>,
}

impl DarbouxChainSpec {
    /// The trivial chain (free particle, `V = 0`).
    pub fn empty() -> Self {
        DarbouxChainSpec {
            resonances: Vec::new(),
            rates: Vec::new(),
        }
    }

    /// Validates and builds a chain from `(a_odd, a_even)` pairs and rates `b_j`.
    pub fn new(resonance_params: &[(f64, f64)], regularizer_rates: &[f64]) -> Result<Self> {
        let resonances: Vec<ResonancePair> = resonance_params
            .iter()
            .map(|&(a_odd, a_even)| ResonancePair { a_odd, a_even })
            .collect();
        if regularizer_rates.len() != 2 * resonances.len() {
            return Err(Error::ParameterOrdering(format!(
                "{} resonance pair(s) need {} regularizer rates, got {}",
                resonances.len(),
                2 * resonances.len(),
                regularizer_rates.len()
            )));
        }
        for (p, pair) in resonances.iter().enumerate() {
            let (odd, even) = (2 * p + 1, 2 * p + 2);
            let values_ok = pair.a_odd.is_finite() && pair.a_even.is_finite();
            if !values_ok || !(pair.a_even < pair.a_odd && pair.a_odd < 0.0) {
                return Err(Error::ParameterOrdering(format!(
                    "need a{even} < a{odd} < 0, got a{odd} = {}, a{even} = {}",
                    pair.a_odd, pair.a_even
                )));
            }
        }
        for (j, &b) in regularizer_rates.iter().enumerate() {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::ParameterOrdering(format!(
                    "regularizer rate b{} = {b} must be positive",
                    j + 1
                )));
            }
        }
        for i in 0..regularizer_rates.len() {
            for j in i + 1..regularizer_rates.len() {
                let (bi, bj) = (regularizer_rates[i], regularizer_rates[j]);
                if (bi - bj).abs() < DEGENERATE_RATE_TOLERANCE {
                    return Err(Error::DegenerateRates {
                        i: i + 1,
                        j: j + 1,
                        bi,
                        bj,
                    });
                }
            }
        }
        Ok(DarbouxChainSpec {
            resonances,
            rates: regularizer_rates.to_vec(),
        })
    }

    pub fn one_resonance(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        Self::new(&[(a1, a2)], &[b1, b2])
    }

    pub fn two_resonance(a: [f64; 4], b: [f64; 4]) -> Result<Self> {
        Self::new(&[(a[0], a[1]), (a[2], a[3])], &b)
    }

    pub fn resonances(&self) -> &[ResonancePair] {
        &self.resonances
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_empty(&self) -> bool {
        self.resonances.is_empty()
    }

    /// Order of the Darboux transformation (number of transformation functions).
    pub fn order(&self) -> usize {
        2 * self.resonances.len() + self.rates.len()
    }

    /// All Jost zeros `α_j`, two per resonance.
    pub fn alphas(&self) -> Vec<Complex64> {
        self.resonances.iter().flat_map(|p| p.alphas()).collect()
    }

    pub fn resonance_momenta(&self) -> Vec<Complex64> {
        self.resonances.iter().map(|p| p.momentum()).collect()
    }

    pub fn resonance_energies(&self) -> Vec<Complex64> {
        self.resonances.iter().map(|p| p.energy()).collect()
    }

    /// Flat parameter list in the `a1, a2, ..., b1, b2, ...` order.
    fn entries(&self) -> Vec<(String, f64)> {
        let mut out = Vec::with_capacity(self.resonances.len() * 2 + self.rates.len());
        for (p, pair) in self.resonances.iter().enumerate() {
            out.push((format!("a{}", 2 * p + 1), pair.a_odd));
            out.push((format!("a{}", 2 * p + 2), pair.a_even));
        }
        for (j, b) in self.rates.iter().enumerate() {
            out.push((format!("b{}", j + 1), *b));
        }
        out
    }
}

impl fmt::Display for DarbouxChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// Parses `a1=-0.1, a2=-2, b1=1, b2=2` (commas, whitespace or newlines as
/// separators). Keys must be contiguous `a1..a2n` and `b1..b2n`.
impl FromStr for DarbouxChainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for token in s
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{token}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad number in `{token}`")))?;
            let key = key.trim();
            let (list, idx) = match key.split_at(1) {
                ("a", n) => (&mut a, n),
                ("b", n) => (&mut b, n),
                _ => return Err(Error::Config(format!("unknown key `{key}`"))),
            };
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| Error::Config(format!("bad index in key `{key}`")))?;
            if list.len() < idx {
                list.resize(idx, None);
            }
            if list[idx - 1].replace(value).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        let collect = |list: Vec<Option<f64>>, name: char| -> Result<Vec<f64>> {
            list.into_iter()
                .enumerate()
                .map(|(i, v)| v.ok_or_else(|| Error::Config(format!("missing key {name}{}", i + 1))))
                .collect()
        };
        let a = collect(a, 'a')?;
        let b = collect(b, 'b')?;
        if a.len() % 2 != 0 {
            return Err(Error::Config(format!(
                "resonance parameters come in pairs, got {} a-values",
                a.len()
            )));
        }
        let pairs: Vec<(f64, f64)> = a.chunks(2).map(|c| (c[0], c[1])).collect();
        DarbouxChainSpec::new(&pairs, &b)
    }
}
