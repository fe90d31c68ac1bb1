//! Tight-binding box with one semi-infinite lead: the energy-dependent
//! effective Hamiltonian, lattice scattering, determinants and spectra.
//!
//! Sites are `r_i = i a`, `i = 1..N`, with `r_N = R`. The Dirichlet point
//! `r_0 = 0` is not part of the box.

use num_complex::Complex64;
use serde::Serialize;

use crate::continuum::TruncatedPotential;
use crate::dd::{cdd, dd, mag, to_c64, Cdd};
use crate::error::{Error, Result};
use crate::susy::AnalyticPotential;

type C = Complex64;

/// Largest allowed `|R/a - N|`.
const ALIGN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct LatticeModel {
    a: f64,
    t: f64,
    n: usize,
    r_cut: f64,
    u: Vec<f64>,
}

impl LatticeModel {
    /// Model with explicit site potentials `U_1..U_N`; the box ends at `N a`.
    pub fn from_sites(a: f64, u: Vec<f64>) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("lattice constant must be positive, got {a}")));
        }
        if u.is_empty() {
            return Err(Error::InvalidArgument("lattice needs at least one site".into()));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("site potentials must be finite".into()));
        }
        let n = u.len();
        Ok(LatticeModel {
            a,
            t: 1.0 / (a * a),
            n,
            r_cut: n as f64 * a,
            u,
        })
    }

    /// Samples `V` on the sites below `r_cut`; the lead attaches at `radius`.
    pub fn from_potential(potential: &AnalyticPotential, r_cut: f64, a: f64, radius: f64) -> Result<Self> {
        let n = lattice_sites(a, radius, r_cut)?;
        let u = (1..=n)
            .map(|i| {
                let r = i as f64 * a;
                if r < r_cut - 1e-9 * a {
                    potential.value(r)
                } else {
                    0.0
                }
            })
            .collect();
        let mut m = Self::from_sites(a, u)?;
        m.r_cut = r_cut;
        Ok(m)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Position of the last site, where the lead is attached.
    pub fn radius(&self) -> f64 {
        self.n as f64 * self.a
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    pub fn site_potentials(&self) -> &[f64] {
        &self.u
    }

    /// `r_i` for the 1-based site index `i`.
    pub fn site_radius(&self, i: usize) -> f64 {
        i as f64 * self.a
    }

    /// Upper band edge `4t`.
    pub fn band_top(&self) -> f64 {
        4.0 * self.t
    }

    /// `2t - t e^{ika}`, the lead's contribution to the last diagonal entry.
    pub fn corner(&self, k: C) -> C {
        2.0 * self.t - self.t * (C::i() * k * self.a).exp()
    }

    /// Diagonal of `H_eff(E)`; the off-diagonal is `-t` throughout.
    pub fn diagonal(&self, e: C) -> Vec<C> {
        let k = dispersion_k(e, self);
        let mut d: Vec<C> = self.u.iter().map(|&u| C::new(u + 2.0 * self.t, 0.0)).collect();
        d[self.n - 1] = self.u[self.n - 1] + self.corner(k);
        d
    }

    /// Dense `H_eff(E)`, row-major. Meant for checks on small boxes.
    pub fn dense(&self, e: C) -> Vec<Vec<C>> {
        let d = self.diagonal(e);
        let mut h = vec![vec![C::new(0.0, 0.0); self.n]; self.n];
        for i in 0..self.n {
            h[i][i] = d[i];
            if i + 1 < self.n {
                h[i][i + 1] = C::new(-self.t, 0.0);
                h[i + 1][i] = C::new(-self.t, 0.0);
            }
        }
        h
    }
}

fn lattice_sites(a: f64, radius: f64, r_cut: f64) -> Result<usize> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("lattice constant must be positive, got {a}")));
    }
    if !(radius >= r_cut - 1e-12 * r_cut.abs()) {
        return Err(Error::InvalidArgument(format!(
            "lead radius {radius} lies inside the cutoff radius {r_cut}"
        )));
    }
    let ratio = radius / a;
    let n = ratio.round();
    if (ratio - n).abs() > ALIGN_TOL || n < 1.0 {
        return Err(Error::MisalignedRadius { radius, a });
    }
    Ok(n as usize)
}

pub fn discretize(tp: &TruncatedPotential, a: f64, radius: f64) -> Result<LatticeModel> {
    LatticeModel::from_potential(tp.potential(), tp.r_cut(), a, radius)
}

/// Lattice momentum from `E = t(2 - 2 cos ka)`, written as
/// `k = (2/a) asin(a√E/2)` to keep precision near the band bottom. With the
/// principal roots `k` is real on the band and `Im k < 0` for `Im E < 0`;
/// the lower half plane is reached from the band without crossing a cut.
pub fn dispersion_k(e: C, model: &LatticeModel) -> C {
    let a = model.a;
    2.0 * (e.sqrt() * (a / 2.0)).asin() / a
}

pub fn band_energy(k: f64, model: &LatticeModel) -> f64 {
    model.t * (2.0 - 2.0 * (k * model.a).cos())
}

/// Solves the symmetric tridiagonal system with diagonal `diag` and
/// constant off-diagonal `off`, eliminating from the last row up. For the
/// open box the pivots then carry the lead's imaginary part and stay away
/// from zero on the band. `None` on a zero pivot.
pub fn solve_tridiagonal(diag: &[C], off: C, rhs: &[C]) -> Option<Vec<C>> {
    let n = diag.len();
    let mut cp = vec![C::new(0.0, 0.0); n];
    let mut x = vec![C::new(0.0, 0.0); n];
    let mut piv = diag[n - 1];
    if piv.norm() == 0.0 {
        return None;
    }
    cp[n - 1] = off / piv;
    x[n - 1] = rhs[n - 1] / piv;
    for i in (0..n - 1).rev() {
        piv = diag[i] - off * cp[i + 1];
        if piv.norm() == 0.0 || !piv.is_finite() {
            return None;
        }
        cp[i] = off / piv;
        x[i] = (rhs[i] - off * x[i + 1]) / piv;
    }
    for i in 1..n {
        x[i] = x[i] - cp[i] * x[i - 1];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub k: f64,
    pub energy: f64,
    pub s: C,
    /// `arg(S)/2`; made continuous by [`phase_sweep`].
    pub delta: f64,
}

pub fn solve_scattering(model: &LatticeModel, energy: f64) -> Result<ScatteringResult> {
    if !(energy > 0.0 && energy < model.band_top()) {
        return Err(Error::InvalidArgument(format!(
            "energy {energy} outside the band (0, {})",
            model.band_top()
        )));
    }
    let e = C::new(energy, 0.0);
    let k = dispersion_k(e, model).re;
    let kc = C::new(k, 0.0);
    let rn = model.radius();
    let t = model.t;
    let diag: Vec<C> = model.diagonal(e).into_iter().map(|d| e - d).collect();
    let mut b = vec![C::new(0.0, 0.0); model.n];
    let out = (-C::i() * kc * rn).exp();
    b[model.n - 1] = 2.0 * C::i() * t * (k * model.a).sin() * out;
    let psi = solve_tridiagonal(&diag, C::new(t, 0.0), &b).ok_or(Error::SingularSystem { energy: e })?;
    let s = (out - psi[model.n - 1]) * out;
    Ok(ScatteringResult {
        k,
        energy,
        s,
        delta: s.arg() / 2.0,
    })
}

/// Scattering over increasing in-band energies with the phase continued to
/// the nearest branch and pinned to 0 at the low end.
pub fn phase_sweep(model: &LatticeModel, energies: &[f64]) -> Result<Vec<ScatteringResult>> {
    let mut out = Vec::with_capacity(energies.len());
    let mut prev = 0.0;
    for &e in energies {
        let mut res = solve_scattering(model, e)?;
        res.delta = nearest_branch(res.delta, prev, std::f64::consts::PI);
        prev = res.delta;
        out.push(res);
    }
    Ok(out)
}

/// `x + mπ` closest to `reference`.
pub(crate) fn nearest_branch(x: f64, reference: f64, period: f64) -> f64 {
    x + period * ((reference - x) / period).round()
}

/// Leading minors `P_N`, `P_{N-1}` of `E - H_closed`, where `H_closed` has
/// `U_N + 2t` in the corner, scaled by `2^{-log2_scale}`.
struct Minors {
    p_n: Cdd,
    p_nm1: Cdd,
    log2_scale: i64,
}

fn minors(model: &LatticeModel, e: C) -> Minors {
    let ed = cdd(e);
    let two_t = dd(2.0 * model.t);
    let t2 = dd(model.t) * dd(model.t);
    let mut prev = Cdd::new(dd(1.0), dd(0.0));
    let mut cur = Cdd::new(ed.re - dd(model.u[0]) - two_t, ed.im);
    let mut log2_scale = 0i64;
    for &u in &model.u[1..] {
        let diag = Cdd::new(ed.re - dd(u) - two_t, ed.im);
        let next = diag * cur - Cdd::new(t2 * prev.re, t2 * prev.im);
        prev = cur;
        cur = next;
        let m = mag(cur).max(mag(prev));
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let p = -(m.log2().round() as i32);
            prev = scale2(prev, p);
            cur = scale2(cur, p);
            log2_scale -= p as i64;
        }
    }
    Minors {
        p_n: cur,
        p_nm1: prev,
        log2_scale,
    }
}

fn scale2(z: Cdd, p: i32) -> Cdd {
    let s = 2f64.powi(p);
    Cdd::new(z.re * s, z.im * s)
}

/// `(ln|Det[E - H_eff(E)]|, arg Det)`, by the three-term recurrence with
/// power-of-two rescaling.
pub fn log_determinant(model: &LatticeModel, e: C) -> (f64, f64) {
    let m = minors(model, e);
    let lead = lead_phase_dd(model, e);
    let c = Cdd::new(lead.re * model.t, lead.im * model.t);
    let det = to_c64(m.p_n + c * m.p_nm1);
    (
        det.norm().ln() + m.log2_scale as f64 * std::f64::consts::LN_2,
        det.arg(),
    )
}

/// `Det[E - H_eff(E)]` divided by the determinant with the lead taken as
/// incoming (`e^{-ika}` in the corner), times `e^{2ikR}`. This is `1/S` of
/// the lattice: same zeros as the determinant, no overflow, O(1) in the
/// lower half plane.
pub fn normalized_determinant(model: &LatticeModel, e: C) -> C {
    determinant_value(model, e).inverse_s
}

/// Values of the normalized determinant at one energy.
#[derive(Debug, Clone, Copy)]
pub struct DeterminantValue {
    /// `1/S`, see [`normalized_determinant`].
    pub inverse_s: C,
    /// `|Det| / (|P_N| + |t e^{ika} P_{N-1}|)`: the determinant relative to
    /// the size of the two terms that cancel at a pole.
    pub relative: f64,
    /// Rounding noise expected in `inverse_s`.
    pub floor: f64,
}

/// `e^{ika}` in double-double, with `k` polished so that the dispersion
/// relation holds for `E` to extended precision.
fn lead_phase_dd(model: &LatticeModel, e: C) -> Cdd {
    use crate::dd::{ccos, cexp};
    let k0 = dispersion_k(e, model);
    let a = dd(model.a);
    let ka = cdd(k0) * a;
    let cos = ccos(ka);
    let e_k = Cdd::new(dd(2.0 * model.t) - cos.re * (2.0 * model.t), -(cos.im * (2.0 * model.t)));
    let resid = to_c64(cdd(e) - e_k);
    let slope = 2.0 * model.t * model.a * (k0 * model.a).sin();
    let ka = if slope.norm() > 0.0 {
        ka + cdd(resid / slope * model.a)
    } else {
        ka
    };
    cexp(Cdd::new(-ka.im, ka.re))
}

pub fn determinant_value(model: &LatticeModel, e: C) -> DeterminantValue {
    let m = minors(model, e);
    let k = dispersion_k(e, model);
    let lead = lead_phase_dd(model, e);
    let t = dd(model.t);
    let c_out = Cdd::new(lead.re * t, lead.im * t);
    let c_in = crate::dd::cdiv(Cdd::new(t * t, dd(0.0)), c_out);
    let num = m.p_n + c_out * m.p_nm1;
    let den = m.p_n + c_in * m.p_nm1;
    let ratio = to_c64(crate::dd::cdiv(num, den));
    let phase = (2.0 * C::i() * k * model.radius()).exp();
    let terms = mag(m.p_n) + mag(c_out) * mag(m.p_nm1);
    DeterminantValue {
        inverse_s: phase * ratio,
        relative: mag(num) / terms,
        floor: 1e-30 * phase.norm() * terms / mag(den),
    }
}

/// Lattice S matrix from the determinant pair; agrees with
/// [`solve_scattering`] on the band and continues it to complex `E`.
pub fn s_matrix_det(model: &LatticeModel, e: C) -> C {
    1.0 / normalized_determinant(model, e)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenpairSet {
    pub energy: f64,
    pub eigenvalues: Vec<C>,
    /// Normalized so that `φᵀφ = 1` (no conjugation).
    pub eigenvectors: Vec<Vec<C>>,
    /// Largest `|φ_λᵀ φ_μ|`, `λ ≠ μ`, over the checked pairs.
    pub defect: f64,
}

impl EigenpairSet {
    pub const BIORTHOGONALITY_TOL: f64 = 1e-8;

    /// `DefectiveSpectrum` when biorthogonality is lost.
    pub fn check(&self) -> Result<()> {
        if self.defect > Self::BIORTHOGONALITY_TOL {
            Err(Error::DefectiveSpectrum { defect: self.defect })
        } else {
            Ok(())
        }
    }
}

/// Unconjugated product `xᵀy`.
pub fn bilinear(x: &[C], y: &[C]) -> C {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Eigenvalues of the complex symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off`, by implicit QL with complex orthogonal
/// rotations.
pub fn tridiagonal_eigenvalues(diag: &[C], off: &[C]) -> Result<Vec<C>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![C::new(0.0, 0.0); n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let one = C::new(1.0, 0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence(format!("QL iteration stalled at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let r = (g * g + one).sqrt();
            let gr = if (g + r).norm() >= (g - r).norm() { g + r } else { g - r };
            g = d[m] - d[l] + e[l] / gr;
            let (mut s, mut c, mut p) = (one, one, C::new(0.0, 0.0));
            let mut restarted = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                let r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r.norm() <= 1e-300 {
                    d[i + 1] -= p;
                    e[m] = C::new(0.0, 0.0);
                    restarted = true;
                    break;
                }
                if r.norm() < 1e-12 * (f.norm() + g.norm()) {
                    // f² + g² = 0 with f, g ≠ 0: no complex orthogonal rotation
                    return Err(Error::DefectiveSpectrum { defect: 1.0 });
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if restarted {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = C::new(0.0, 0.0);
        }
    }
    Ok(d)
}

/// Eigenvector for the eigenvalue `z` by two steps of inverse iteration,
/// scaled to `φᵀφ = 1`.
fn eigenvector(diag: &[C], off: f64, z: C) -> Option<Vec<C>> {
    let n = diag.len();
    let scale = diag.iter().map(|d| d.norm()).fold(off.abs(), f64::max);
    let sigma = z + C::new(1e-13 * scale, 1e-13 * scale);
    let shifted: Vec<C> = diag.iter().map(|d| d - sigma).collect();
    let offc = C::new(off, 0.0);
    let mut x: Vec<C> = (0..n).map(|i| C::new(1.0 + 0.1 * (i % 7) as f64, 0.0)).collect();
    for _ in 0..3 {
        x = solve_tridiagonal(&shifted, offc, &x)?;
        let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        for v in &mut x {
            *v /= norm;
        }
    }
    let q = bilinear(&x, &x).sqrt();
    if q.norm() < 1e-150 {
        return Some(x);
    }
    for v in &mut x {
        *v /= q;
    }
    Some(x)
}

/// Eigenvalues of `H_eff(E)` sorted by real part.
pub fn spectrum(model: &LatticeModel, energy: f64) -> Result<Vec<C>> {
    let diag = model.diagonal(C::new(energy, 0.0));
    let off = vec![C::new(-model.t, 0.0); model.n];
    let mut z = tridiagonal_eigenvalues(&diag, &off)?;
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

/// Right eigenvector of `H_eff(E)` for its eigenvalue `z`, `φᵀφ = 1`.
pub fn eigenvector_at(model: &LatticeModel, energy: f64, z: C) -> Result<Vec<C>> {
    let diag = model.diagonal(C::new(energy, 0.0));
    eigenvector(&diag, -model.t, z).ok_or(Error::SingularSystem {
        energy: C::new(energy, 0.0),
    })
}

/// Full spectrum of `H_eff(E)` at real `E` with unconjugated-normalized
/// eigenvectors. Loss of biorthogonality is recorded in `defect`, not
/// raised; see [`EigenpairSet::check`].
pub fn eigenvalues_at(model: &LatticeModel, energy: f64) -> Result<EigenpairSet> {
    let z = spectrum(model, energy)?;
    let diag = model.diagonal(C::new(energy, 0.0));
    let mut vecs = Vec::with_capacity(z.len());
    for &zl in &z {
        let v = eigenvector(&diag, -model.t, zl).ok_or(Error::SingularSystem {
            energy: C::new(energy, 0.0),
        })?;
        vecs.push(v);
    }
    let defect = biorthogonality_defect(&vecs, if z.len() <= 64 { z.len() } else { 4 });
    Ok(EigenpairSet {
        energy,
        eigenvalues: z,
        eigenvectors: vecs,
        defect,
    })
}

/// Largest off-diagonal `|φ_λᵀ φ_μ|` over index distance `≤ reach`.
pub fn biorthogonality_defect(vecs: &[Vec<C>], reach: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..vecs.len() {
        let self_overlap = (bilinear(&vecs[i], &vecs[i]) - 1.0).norm();
        worst = worst.max(self_overlap);
        for j in i + 1..vecs.len().min(i + reach + 1) {
            worst = worst.max(bilinear(&vecs[i], &vecs[j]).norm());
        }
    }
    worst
}
