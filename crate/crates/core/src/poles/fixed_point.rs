//! Fixed points `E = Re z_λ(E)` of the eigenvalues of `H_eff` on the real
//! energy axis.

use log::debug;
use num_complex::Complex64;

use super::{Method, PoleEstimate};
use crate::error::{Error, Result};
use crate::lattice::{bilinear, eigenvector_at, spectrum, LatticeModel};

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// `E ← E + ω (Re z - E)`; 1 is the plain iteration.
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest accepted overlap between successive eigenvectors.
    pub min_overlap: f64,
    /// Eigenvalues nearest the tracked one that compete for the branch.
    pub candidates: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            omega: 0.5,
            tol: 1e-9,
            max_iter: 200,
            min_overlap: 0.5,
            candidates: 6,
        }
    }
}

/// `|xᵀy| / sqrt(|xᵀx| |yᵀy|)`, equal to 1 for `y ∝ x`.
///
/// Normalizing with `‖x‖` instead fails for resonant vectors, which are
/// close to self-orthogonal (`|xᵀx| ≪ ‖x‖²`).
pub fn overlap(x: &[Complex64], y: &[Complex64]) -> f64 {
    bilinear(x, y).norm() / (bilinear(x, x).norm() * bilinear(y, y).norm()).sqrt()
}

fn nearest(z: &[Complex64], target: Complex64, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()));
    idx.truncate(count.max(1));
    idx
}

/// Solves `E = Re z_λ(E)` from `seed`, following the branch `λ` whose
/// eigenvalue starts closest to the seed. The estimate is reported as
/// `E_λ + i Im z_λ(E_λ)`, so its width is `Γ = -2 Im z_λ`.
pub fn fixed_point_solve(model: &LatticeModel, seed: f64, opts: &FixedPointOptions) -> Result<PoleEstimate> {
    let top = model.band_top();
    if !(seed > 0.0 && seed < top) {
        return Err(Error::InvalidArgument(format!("seed {seed} outside the band (0, {top})")));
    }
    let mut e = seed;
    let z = spectrum(model, e)?;
    let mut lam = nearest(&z, Complex64::new(e, 0.0), 1)[0];
    let mut zl = z[lam];
    let mut vec = eigenvector_at(model, e, zl)?;
    for it in 0..opts.max_iter {
        let step = opts.omega * (zl.re - e);
        if step.abs() < opts.tol {
            debug!("fixed point at {e} after {it} iterations");
            return Ok(PoleEstimate::new(
                Complex64::new(e, zl.im),
                None,
                Method::FixedPoint,
                step.abs(),
            ));
        }
        let next = e + step;
        if !(next > 0.0 && next < top) {
            return Err(Error::NoConvergence(format!("fixed-point iterate {next} left the band")));
        }
        e = next;
        let z = spectrum(model, e)?;
        let mut best = (0.0, lam, zl);
        let mut best_vec = Vec::new();
        for i in nearest(&z, zl, opts.candidates) {
            let v = eigenvector_at(model, e, z[i])?;
            let o = overlap(&vec, &v);
            if o > best.0 {
                best = (o, i, z[i]);
                best_vec = v;
            }
        }
        if best.0 < opts.min_overlap {
            return Err(Error::BranchLoss { overlap: best.0 });
        }
        lam = best.1;
        zl = best.2;
        vec = best_vec;
    }
    Err(Error::NoConvergence(format!(
        "{} fixed-point iterations from {seed}, last E = {e}",
        opts.max_iter
    )))
}

/// Fixed points seeded from the real parts of the spectrum at `reference`
/// that fall in `[re_min, re_max]`.
pub fn fixed_points_in(
    model: &LatticeModel,
    reference: f64,
    re_min: f64,
    re_max: f64,
    opts: &FixedPointOptions,
) -> Result<Vec<PoleEstimate>> {
    let seeds: Vec<f64> = spectrum(model, reference)?
        .into_iter()
        .map(|z| z.re)
        .filter(|&x| x >= re_min && x <= re_max)
        .collect();
    Ok(fixed_points_from(model, &seeds, opts))
}

/// Fixed points from the given seed energies; seeds outside the band and
/// failed iterations are dropped with a log entry.
pub fn fixed_points_from(model: &LatticeModel, seeds: &[f64], opts: &FixedPointOptions) -> Vec<PoleEstimate> {
    let mut out: Vec<PoleEstimate> = Vec::new();
    for &seed in seeds {
        if !(seed > 0.0 && seed < model.band_top()) {
            continue;
        }
        match fixed_point_solve(model, seed, opts) {
            Ok(p) => out.push(p),
            Err(e) => debug!("fixed point from {seed} dropped: {e}"),
        }
    }
    let mut out = crate::roots::dedup(out, 1e-6, |p| p.energy);
    super::sort_poles(&mut out);
    out
}
