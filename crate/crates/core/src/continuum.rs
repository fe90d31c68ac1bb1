//! Scattering on the potential truncated at `R_cut`: regular solution by
//! radial integration, matching to free waves, and the complex-momentum
//! roots of `γ = ik`.

use std::sync::OnceLock;

use log::debug;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::Dop853;
use crate::poles::{sort_poles, Method, PoleEstimate};
use crate::roots::{damped_newton_or, dedup, zero_seeds, ComplexGrid, NewtonOptions, Region};
use crate::susy::AnalyticPotential;

/// Start of the radial integration; the regular solution is `ψ ≈ r` there.
pub const ORIGIN_EPS: f64 = 1e-6;
pub const INTEGRATOR_RTOL: f64 = 1e-10;
/// Integrator tolerance while polishing roots. The residual is a ratio of
/// amplitudes differing by `e^{2|Im k| R}`, which amplifies integration error
/// by the same factor; at 1e-10 the noise floor sits above the acceptance
/// threshold for the upper members of the pole chain.
pub const REFINE_RTOL: f64 = 1e-14;
/// Acceptance threshold for the normalized matching residual.
pub const TRANSCENDENTAL_TOL: f64 = 1e-8;
/// Above this noise level in `1/S` the pole condition is not evaluated.
/// Spurious zeros need noise of order one, so this leaves a wide margin.
pub const RESOLVABLE_FLOOR: f64 = 1e-6;

const CHEB_NODES: usize = 24;
const CHEB_TAIL_TOL: f64 = 1e-14;
const MIN_PANEL: f64 = 1e-3;

/// Piecewise Chebyshev interpolant of `V` on `[0, R_cut]`. The closed forms
/// are evaluated in extended precision and cost microseconds per call; the
/// integrator evaluates the potential hundreds of thousands of times per
/// pole search, so it reads this table instead.
#[derive(Debug, Clone)]
struct PanelTable {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    max_abs: f64,
}

fn cheb_coeffs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Vec<f64> {
    let n = CHEB_NODES;
    let samples: Vec<f64> = (0..n)
        .map(|j| {
            let x = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
            f(0.5 * (a + b) + 0.5 * (b - a) * x)
        })
        .collect();
    (0..n)
        .map(|m| {
            let s: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, v)| v * (std::f64::consts::PI * m as f64 * (j as f64 + 0.5) / n as f64).cos())
                .sum();
            s * if m == 0 { 1.0 } else { 2.0 } / n as f64
        })
        .collect()
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

impl PanelTable {
    fn build<F: Fn(f64) -> f64>(f: F, r_max: f64) -> Result<Self> {
        // Scale for the tail criterion from a coarse scan.
        let max_abs = (1..=400)
            .map(|i| f(r_max * i as f64 / 400.0).abs())
            .fold(0.0, f64::max);
        if !max_abs.is_finite() {
            return Err(Error::InvalidArgument(
                "potential is not finite on (0, R_cut]".into(),
            ));
        }
        let tol = CHEB_TAIL_TOL * max_abs.max(f64::MIN_POSITIVE);
        let mut breaks = vec![0.0];
        let mut coeffs = Vec::new();
        let mut stack = vec![(0.0, r_max)];
        // Depth-first, left to right.
        while let Some((a, b)) = stack.pop() {
            let c = cheb_coeffs(&f, a, b);
            let tail = c[CHEB_NODES - 1].abs() + c[CHEB_NODES - 2].abs() + c[CHEB_NODES - 3].abs();
            if tail > tol && b - a > MIN_PANEL && c.iter().all(|x| x.is_finite()) {
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
                continue;
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "potential is not finite on [{a}, {b}]"
                )));
            }
            breaks.push(b);
            coeffs.push(c);
        }
        Ok(PanelTable {
            breaks,
            coeffs,
            max_abs,
        })
    }

    fn eval(&self, r: f64) -> f64 {
        let i = match self.breaks.binary_search_by(|b| b.total_cmp(&r)) {
            Ok(i) => i.min(self.coeffs.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.coeffs.len() - 1),
        };
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        clenshaw(&self.coeffs[i], (2.0 * r - a - b) / (b - a))
    }
}

/// Potential equal to the analytic one for `r < R_cut` and zero beyond.
#[derive(Debug, Clone)]
pub struct TruncatedPotential {
    potential: AnalyticPotential,
    r_cut: f64,
    table: PanelTable,
    /// `nπ` removed from the matched phase so that `δ_cut(0⁺) = 0`.
    levinson_offset: OnceLock<f64>,
}

impl TruncatedPotential {
    pub fn new(potential: AnalyticPotential, r_cut: f64) -> Result<Self> {
        if !(r_cut > 0.0) || !r_cut.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "R_cut must be positive, got {r_cut}"
            )));
        }
        let table = {
            let p = &potential;
            PanelTable::build(|r| p.value(r), r_cut)?
        };
        Ok(TruncatedPotential {
            potential,
            r_cut,
            table,
            levinson_offset: OnceLock::new(),
        })
    }

    pub fn potential(&self) -> &AnalyticPotential {
        &self.potential
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    /// Interpolated `V(r)` for `r < R_cut`, exactly 0 beyond.
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.r_cut {
            0.0
        } else {
            self.table.eval(r.max(0.0))
        }
    }

    /// Direct evaluation of the analytic potential, 0 beyond `R_cut`.
    pub fn exact_value(&self, r: f64) -> f64 {
        if r >= self.r_cut {
            0.0
        } else {
            self.potential.value(r)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.table.max_abs
    }

    fn levinson_offset(&self) -> Result<f64> {
        if let Some(v) = self.levinson_offset.get() {
            return Ok(*v);
        }
        let k0 = 1e-3 / self.r_cut.max(1.0);
        let raw = prufer_phase(self, k0)?;
        let offset = std::f64::consts::PI * (raw / std::f64::consts::PI).round();
        Ok(*self.levinson_offset.get_or_init(|| offset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivative {
    pub gamma: Complex64,
    pub k: Complex64,
    pub r_cut: f64,
}

/// Regular solution `(ψ, ψ')` at `R_cut` with `ψ(ε) = ε, ψ'(ε) = 1`.
/// With `h_max` finite the observer sees steps no longer than that.
fn integrate_regular<O>(
    tp: &TruncatedPotential,
    k: Complex64,
    rtol: f64,
    h_max: f64,
    observer: O,
) -> Result<[Complex64; 2]>
where
    O: FnMut(f64, &[Complex64; 2]),
{
    let k2 = k * k;
    let solver = Dop853 {
        rtol,
        atol: rtol * 1e-4 * ORIGIN_EPS,
        h_max,
        ..Dop853::default()
    };
    let rhs = |r: f64, y: &[Complex64; 2]| [y[1], (tp.value(r) - k2) * y[0]];
    let y0 = [Complex64::new(ORIGIN_EPS, 0.0), Complex64::new(1.0, 0.0)];
    let (y, _) = solver.integrate(rhs, ORIGIN_EPS, y0, tp.r_cut, observer)?;
    Ok(y)
}

/// `(ψ(R_cut), ψ'(R_cut))` of the regular solution, unnormalized.
pub fn matching_values(tp: &TruncatedPotential, k: Complex64) -> Result<(Complex64, Complex64)> {
    matching_values_with_tol(tp, k, INTEGRATOR_RTOL)
}

pub fn matching_values_with_tol(
    tp: &TruncatedPotential,
    k: Complex64,
    rtol: f64,
) -> Result<(Complex64, Complex64)> {
    let y = integrate_regular(tp, k, rtol, f64::INFINITY, |_, _| {})?;
    Ok((y[0], y[1]))
}

pub fn integrate_log_derivative(tp: &TruncatedPotential, k: Complex64) -> Result<LogDerivative> {
    if k.norm() == 0.0 {
        return Err(Error::InvalidArgument("k must be nonzero".into()));
    }
    let (psi, dpsi) = matching_values(tp, k)?;
    let scale = k.norm().max(1.0 / tp.r_cut);
    if psi.norm() * scale <= 1e-12 * dpsi.norm() {
        return Err(Error::NodeAtMatching { k });
    }
    Ok(LogDerivative {
        gamma: dpsi / psi,
        k,
        r_cut: tp.r_cut,
    })
}

/// `θ(R) - kR` with the Prüfer angle `θ = arg(ψ' + ikψ)` followed
/// continuously from the origin.
fn prufer_phase(tp: &TruncatedPotential, k: f64) -> Result<f64> {
    let kc = Complex64::new(k, 0.0);
    let z = |y: &[Complex64; 2]| Complex64::new(y[1].re - k * y[0].im, k * y[0].re + y[1].im);
    let h_max = 0.5 / (k + tp.max_abs().sqrt() + 1.0);
    let mut prev = Complex64::new(1.0, k * ORIGIN_EPS);
    let mut theta = prev.arg();
    let y = integrate_regular(tp, kc, INTEGRATOR_RTOL, h_max, |_, y| {
        let cur = z(y);
        theta += (cur / prev).arg();
        prev = cur;
    })?;
    let last = z(&y);
    theta += (last / prev).arg();
    Ok(theta - k * tp.r_cut)
}

/// Phase shift of the truncated potential, continuous in `k` with
/// `δ_cut(0⁺) = 0`.
pub fn cutoff_phase_shift(tp: &TruncatedPotential, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    Ok(prufer_phase(tp, k)? - tp.levinson_offset()?)
}

/// `S_cut = e^{-2ikR} (γ + ik)/(γ - ik)`, written through `(ψ, ψ')` so that a
/// node at the matching radius is harmless.
pub fn s_matrix_cut(tp: &TruncatedPotential, k: f64) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    let kc = Complex64::new(k, 0.0);
    let (psi, dpsi) = matching_values(tp, kc)?;
    let i = Complex64::i();
    let phase = (-2.0 * i * kc * tp.r_cut).exp();
    Ok(phase * (dpsi + i * kc * psi) / (dpsi - i * kc * psi))
}

/// Node-free form of the pole condition `γ = ik`:
/// `e^{2ikR} (ψ' - ikψ) / (ψ' + ikψ)`, the ratio of incoming to outgoing
/// amplitude at `R_cut`, i.e. `1/S_cut`. Dividing by the outgoing part keeps
/// the residual O(1) deep in the lower half plane, where `ψ` itself grows
/// like `e^{|Im k| R}`.
pub fn transcendental_residual(tp: &TruncatedPotential, k: Complex64) -> Result<Complex64> {
    transcendental_residual_with_tol(tp, k, INTEGRATOR_RTOL)
}

pub fn transcendental_residual_with_tol(
    tp: &TruncatedPotential,
    k: Complex64,
    rtol: f64,
) -> Result<Complex64> {
    let m = matching(tp, k, rtol)?;
    if !(m.floor < RESOLVABLE_FLOOR) {
        return Err(Error::Unresolvable { k, floor: m.floor });
    }
    Ok(m.inverse_s)
}

/// The matching residual with its error estimates.
#[derive(Debug, Clone, Copy)]
struct Matching {
    inverse_s: Complex64,
    /// `|ψ' - ikψ| / (|ψ'| + |k||ψ|)`: the incoming amplitude relative to
    /// the terms it is the difference of.
    relative: f64,
    /// Noise expected in `inverse_s` from integration at `REFINE_RTOL`.
    floor: f64,
}

fn matching(tp: &TruncatedPotential, k: Complex64, rtol: f64) -> Result<Matching> {
    let (psi, dpsi) = matching_values_with_tol(tp, k, rtol)?;
    let ik = Complex64::i() * k;
    let out = dpsi + ik * psi;
    if out.norm() == 0.0 {
        return Err(Error::NodeAtMatching { k });
    }
    // The incoming part is a difference of terms e^{2|Im k| R} larger than
    // itself; integration error in those terms is what the residual sees.
    let terms = dpsi.norm() + k.norm() * psi.norm();
    let amplify = (-2.0 * k.im * tp.r_cut).exp();
    Ok(Matching {
        inverse_s: (2.0 * ik * tp.r_cut).exp() * (dpsi - ik * psi) / out,
        relative: (dpsi - ik * psi).norm() / terms,
        floor: amplify * REFINE_RTOL * terms / out.norm(),
    })
}

/// Momentum on the resonance sheet: principal root, `Re k ≥ 0`, `Im k ≤ 0`
/// for `Im E ≤ 0`.
pub fn momentum_of(e: Complex64) -> Complex64 {
    e.sqrt()
}

/// Newton on `1/S_cut` from `k_seed`, converged at `|1/S| < tol`. A point
/// where no step helps is accepted if `|1/S|` is within the integration
/// noise there and the relative incoming amplitude is below `tol`; that
/// relative amplitude is the reported residual.
pub fn refine_transcendental(tp: &TruncatedPotential, k_seed: Complex64) -> Result<PoleEstimate> {
    let opts = NewtonOptions {
        tol: TRANSCENDENTAL_TOL,
        ..NewtonOptions::default()
    };
    let root = damped_newton_or(
        |k| transcendental_residual_with_tol(tp, k, REFINE_RTOL),
        k_seed,
        &opts,
        |k, fk| {
            let m = matching(tp, k, REFINE_RTOL).ok()?;
            (fk.norm() <= 10.0 * m.floor && m.relative < TRANSCENDENTAL_TOL).then_some(m.relative)
        },
    )?;
    let residual = matching(tp, root.z, REFINE_RTOL)?.relative;
    Ok(PoleEstimate::new(
        root.z * root.z,
        Some(root.z),
        Method::Transcendental,
        residual,
    ))
}

/// Roots of `γ(k) = ik` with `E = k²` inside `region`.
pub fn find_transcendental_poles(
    tp: &TruncatedPotential,
    region: &Region,
    grid: (usize, usize),
) -> Result<Vec<PoleEstimate>> {
    region.validate_lower_half()?;
    let grid = ComplexGrid::graded(region, grid.0, grid.1);
    transcendental_poles_on_grid(tp, region, &grid)
}

pub fn transcendental_poles_on_grid(
    tp: &TruncatedPotential,
    region: &Region,
    grid: &ComplexGrid,
) -> Result<Vec<PoleEstimate>> {
    let values = grid.sample(|e| transcendental_residual(tp, momentum_of(e)).ok());
    let seeds = zero_seeds(grid, &values);
    debug!("transcendental search: {} seeds", seeds.len());
    let mut poles = Vec::new();
    for seed in seeds {
        match refine_transcendental(tp, momentum_of(seed)) {
            Ok(p) if region.contains(p.energy) => poles.push(p),
            Ok(p) => debug!("seed {seed} left the region, converged to {}", p.energy),
            Err(e) => debug!("seed {seed} dropped: {e}"),
        }
    }
    let mut poles = dedup(poles, 1e-6, |p| p.energy);
    sort_poles(&mut poles);
    Ok(poles)
}
