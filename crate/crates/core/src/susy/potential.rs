//! Closed-form Bargmann-type potentials with one or two resonances.

use num_complex::Complex64;

use super::chain::DarbouxChainSpec;
use crate::dd::{dd, div, sinh_cosh, tanh_sech2, to_f64, Dd};
use super::wronskian::generic_wronskian_potential;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    OneResonance,
    TwoResonance,
    GenericWronskian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPotential {
    spec: DarbouxChainSpec,
    /// `ζ_i` (one resonance) or `η_i = ζ_i + ζ̃_i` (two resonances); empty for
    /// the generic evaluator.
    shifts: Vec<f64>,
    shifts_dd: Vec<Dd>,
    kind: PotentialKind,
}

impl AnalyticPotential {
    pub fn one_resonance(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        Self::closed_form(DarbouxChainSpec::one_resonance(a1, a2, b1, b2)?)
    }

    pub fn two_resonance(a: [f64; 4], b: [f64; 4]) -> Result<Self> {
        Self::closed_form(DarbouxChainSpec::two_resonance(a, b)?)
    }

    /// Uses the closed form when the chain has one or two resonances and the
    /// determinant evaluator otherwise.
    pub fn from_spec(spec: DarbouxChainSpec) -> Self {
        match spec.resonances().len() {
            1 | 2 => Self::closed_form(spec).expect("validated spec"),
            _ => Self::generic(spec),
        }
    }

    pub fn generic(spec: DarbouxChainSpec) -> Self {
        AnalyticPotential {
            spec,
            shifts: Vec::new(),
            shifts_dd: Vec::new(),
            kind: PotentialKind::GenericWronskian,
        }
    }

    fn closed_form(spec: DarbouxChainSpec) -> Result<Self> {
        let res = spec.resonances();
        let (kind, shifts_dd): (_, Vec<Dd>) = match res.len() {
            1 => (
                PotentialKind::OneResonance,
                spec.rates().iter().map(|&b| res[0].shift_dd(b)).collect(),
            ),
            2 => (
                PotentialKind::TwoResonance,
                spec.rates()
                    .iter()
                    .map(|&b| res[0].shift_dd(b) + res[1].shift_dd(b))
                    .collect(),
            ),
            n => {
                return Err(Error::InvalidArgument(format!(
                    "no closed form for {n} resonances"
                )))
            }
        };
        let shifts = shifts_dd.iter().map(|&z| to_f64(z)).collect();
        Ok(AnalyticPotential {
            spec,
            shifts,
            shifts_dd,
            kind,
        })
    }

    pub fn spec(&self) -> &DarbouxChainSpec {
        &self.spec
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn shift_constants(&self) -> &[f64] {
        &self.shifts
    }

    /// Resonance momenta `k = -a_even + i a_odd`.
    pub fn resonance_momenta(&self) -> Vec<Complex64> {
        self.spec.resonance_momenta()
    }

    pub fn resonance_energies(&self) -> Vec<Complex64> {
        self.spec.resonance_energies()
    }

    /// `V(r)`; fails only for the generic evaluator at a singular Wronskian.
    pub fn try_value(&self, r: f64) -> Result<f64> {
        match self.kind {
            PotentialKind::OneResonance => Ok(self.one_resonance_value(r)),
            PotentialKind::TwoResonance => Ok(self.two_resonance_value(r)),
            PotentialKind::GenericWronskian => generic_wronskian_potential(&self.spec, r),
        }
    }

    /// `V(r)`, NaN where the generic evaluator fails.
    pub fn value(&self, r: f64) -> f64 {
        self.try_value(r).unwrap_or(f64::NAN)
    }

    /// `(tanh ξ_i, sech² ξ_i)` in double-double precision.
    fn tanh_xi(&self, i: usize, r: f64) -> (Dd, Dd) {
        tanh_sech2(dd(self.spec.rates()[i]) * r - self.shifts_dd[i])
    }

    // Both closed forms cancel heavily: the two-resonance Wronskian is some
    // 1e16 times smaller than its individual terms near r = 0, and the
    // one-resonance numerator cancels in the tail. They are therefore
    // summed in double-double precision.

    /// `2 (b1² - b2²) [b2² sinh²ξ1 - b1² sinh²ξ2] / [b2 sinh ξ1 cosh ξ2 - b1 sinh ξ2 cosh ξ1]²`,
    /// evaluated with numerator and denominator divided by `cosh²ξ1 cosh²ξ2`.
    fn one_resonance_value(&self, r: f64) -> f64 {
        let (b1, b2) = (dd(self.spec.rates()[0]), dd(self.spec.rates()[1]));
        let (t1, s1) = self.tanh_xi(0, r);
        let (t2, s2) = self.tanh_xi(1, r);
        let num = (b1 * b1 - b2 * b2) * (b2 * b2 * t1 * t1 * s2 - b1 * b1 * t2 * t2 * s1) * 2.0;
        let den = b2 * t1 - b1 * t2;
        to_f64(div(num, den * den))
    }

    fn two_resonance_value(&self, r: f64) -> f64 {
        let b: Vec<Dd> = self.spec.rates().iter().map(|&x| dd(x)).collect();
        let zero = dd(0.0);
        let mut tau = [zero; 4];
        let mut d1 = [zero; 4];
        let mut d2 = [zero; 4];
        let mut log_cosh = zero;
        for i in 0..4 {
            let (t, sech2) = self.tanh_xi(i, r);
            tau[i] = t;
            // tau' = b sech², tau'' = -2 b² tau sech²
            d1[i] = b[i] * sech2;
            d2[i] = b[i] * b[i] * t * sech2 * -2.0;
            log_cosh += b[i] * b[i] * sech2;
        }
        let (mut w, mut w1, mut w2) = (zero, zero, zero);
        for (coef, k, l) in two_resonance_terms(&b) {
            w += coef * tau[k] * tau[l];
            w1 += coef * (d1[k] * tau[l] + tau[k] * d1[l]);
            w2 += coef * (d2[k] * tau[l] + d1[k] * d1[l] * 2.0 + tau[k] * d2[l]);
        }
        let g1 = div(w1, w);
        let log_w = div(w2, w) - g1 * g1;
        to_f64((log_w + log_cosh) * -2.0)
    }

    /// Closed-form fourth-order Wronskian `W(ṽ_1..ṽ_4)` of
    /// `ṽ_i = sinh(b_i r - η_i)` (two-resonance potentials only).
    pub fn two_resonance_wronskian(&self, r: f64) -> Option<f64> {
        if self.kind != PotentialKind::TwoResonance {
            return None;
        }
        let b: Vec<Dd> = self.spec.rates().iter().map(|&x| dd(x)).collect();
        let sc: Vec<(Dd, Dd)> = (0..4)
            .map(|i| sinh_cosh(b[i] * r - self.shifts_dd[i]))
            .collect();
        let mut w = dd(0.0);
        for (i, j, coef, k, l) in two_resonance_terms_indexed(&b) {
            w += coef * sc[i].1 * sc[j].1 * sc[k].0 * sc[l].0;
        }
        Some(to_f64(w))
    }
}

/// Terms `(-1)^{i+j} b_i b_j (b_j² - b_i²)(b_k² - b_l²) cosh ξ_i cosh ξ_j sinh ξ_k sinh ξ_l`
/// over `i < j`, with `k > l` the remaining indices (1-based signs).
fn two_resonance_terms_indexed(b: &[Dd]) -> Vec<(usize, usize, Dd, usize, usize)> {
    let mut out = Vec::with_capacity(6);
    for i in 0..3 {
        for j in i + 1..4 {
            let rest: Vec<usize> = (0..4).filter(|&m| m != i && m != j).collect();
            let (l, k) = (rest[0], rest[1]);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let coef = b[i] * b[j] * (b[j] * b[j] - b[i] * b[i]) * (b[k] * b[k] - b[l] * b[l]) * sign;
            out.push((i, j, coef, k, l));
        }
    }
    out
}

/// Same terms divided by `Π cosh ξ_m`: `(coef, k, l)` multiplying `tanh ξ_k tanh ξ_l`.
fn two_resonance_terms(b: &[Dd]) -> impl Iterator<Item = (Dd, usize, usize)> {
    two_resonance_terms_indexed(b)
        .into_iter()
        .map(|(_, _, coef, k, l)| (coef, k, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_one() -> AnalyticPotential {
        AnalyticPotential::one_resonance(-0.1, -2.0, 1.0, 2.0).unwrap()
    }

    /// The explicit formula without any rescaling.
    fn raw_one_resonance(p: &AnalyticPotential, r: f64) -> f64 {
        let (b1, b2) = (p.spec.rates()[0], p.spec.rates()[1]);
        let x1 = b1 * r - p.shifts[0];
        let x2 = b2 * r - p.shifts[1];
        let num = 2.0 * (b1 * b1 - b2 * b2) * (b2 * b2 * x1.sinh().powi(2) - b1 * b1 * x2.sinh().powi(2));
        let den = b2 * x1.sinh() * x2.cosh() - b1 * x2.sinh() * x1.cosh();
        num / (den * den)
    }

    #[test]
    fn rescaled_formula_matches_raw_formula() {
        let p = fig1_one();
        for r in [0.01, 0.3, 1.0, 2.5, 7.0] {
            let (v, raw) = (p.value(r), raw_one_resonance(&p, r));
            assert!((v - raw).abs() <= 1e-11 * raw.abs().max(1e-3), "r={r}: {v} vs {raw}");
        }
    }

    #[test]
    fn one_resonance_records_shifts_and_energy() {
        let p = fig1_one();
        assert_eq!(p.kind(), PotentialKind::OneResonance);
        for (z, b) in p.shift_constants().iter().zip([1.0, 2.0]) {
            assert!((z.tanh() - 2.0 * -0.1 * b / (b * b + 0.01 + 4.0)).abs() < 1e-15);
        }
        let e = p.resonance_energies()[0];
        assert!((e.re - 3.99).abs() < 1e-12 && (e.im + 0.4).abs() < 1e-12);
    }

    #[test]
    fn potentials_decay_and_stay_finite() {
        let one = fig1_one();
        let two = AnalyticPotential::two_resonance([-0.1, -2.0, -0.08, -3.0], [0.2, 0.1, 0.08, 0.05])
            .unwrap();
        for p in [&one, &two] {
            for i in 1..2000 {
                let r = i as f64 * 0.05;
                assert!(p.value(r).is_finite(), "{:?} r={r}", p.kind());
            }
        }
        assert!(one.value(40.0).abs() < 1e-25);
        assert!(two.value(400.0).abs() < 1e-12);
        assert!(one.value(1000.0).abs() < 1e-300 || one.value(1000.0) == 0.0);
    }

    fn fig1_two() -> AnalyticPotential {
        AnalyticPotential::two_resonance([-0.1, -2.0, -0.08, -3.0], [0.2, 0.1, 0.08, 0.05]).unwrap()
    }

    #[test]
    fn two_resonance_wronskian_equals_dense_determinant() {
        use crate::susy::wronskian::Lu;
        use num_complex::Complex;
        let p = fig1_two();
        let r = 2.0;
        let b = p.spec.rates();
        // rows: m-th derivative of sinh(b_j r - η_j)
        let rows: Vec<Vec<_>> = (0..4)
            .map(|m| {
                (0..4)
                    .map(|j| {
                        let (s, c) = sinh_cosh(dd(b[j]) * r - p.shifts_dd[j]);
                        let f = if m % 2 == 0 { s } else { c };
                        let bm = (0..m).fold(dd(1.0), |acc, _| acc * b[j]);
                        Complex::new(f * bm, dd(0.0))
                    })
                    .collect()
            })
            .collect();
        let det = Lu::factor(&rows, false).determinant();
        let det = to_f64(det.re);
        let closed = p.two_resonance_wronskian(r).unwrap();
        assert!((closed - det).abs() < 1e-9 * det.abs(), "{closed:e} vs {det:e}");
    }

    #[test]
    fn log_wronskian_curvature_matches_finite_differences() {
        let p = fig1_two();
        let h = 1e-4;
        for r in [0.5, 1.0, 2.0, 3.0, 6.0] {
            let lw = |x: f64| p.two_resonance_wronskian(x).unwrap().ln();
            let fd = (lw(r + h) - 2.0 * lw(r) + lw(r - h)) / (h * h);
            let closed = -0.5 * p.value(r);
            assert!((fd - closed).abs() < 1e-5 * closed.abs(), "r={r}: {fd} vs {closed}");
        }
    }

    #[test]
    fn closed_forms_agree_with_generic_evaluator() {
        let one = fig1_one();
        let g = generic_wronskian_potential(one.spec(), 1.0).unwrap();
        assert!((one.value(1.0) - g).abs() < 1e-9 * g.abs());
        let g = generic_wronskian_potential(one.spec(), 0.5).unwrap();
        assert!((one.value(0.5) - g).abs() < 1e-9 * g.abs());
        let two = fig1_two();
        let g = generic_wronskian_potential(two.spec(), 3.0).unwrap();
        assert!((two.value(3.0) - g).abs() < 1e-9 * g.abs());
    }

    #[test]
    fn degenerate_rates_rejected() {
        assert!(matches!(
            AnalyticPotential::one_resonance(-0.1, -2.0, 1.0, 1.0),
            Err(Error::DegenerateRates { .. })
        ));
    }
}
