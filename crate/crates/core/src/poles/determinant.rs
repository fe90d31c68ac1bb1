//! Zeros of `Det[E - H_eff(E)]` in the lower half E plane.

use log::debug;
use num_complex::Complex64;

use super::{sort_poles, Method, PoleEstimate};
use crate::error::{Error, Result};
use crate::lattice::{determinant_value, dispersion_k, LatticeModel};
use crate::roots::{damped_newton_or, dedup, zero_seeds, ComplexGrid, NewtonOptions, Region};

/// Acceptance threshold on the normalized determinant.
pub const DETERMINANT_TOL: f64 = 1e-9;

/// `1/S` of the lattice, or `Unresolvable` where rounding alone exceeds the
/// acceptance threshold.
pub fn determinant_residual(model: &LatticeModel, e: Complex64) -> Result<Complex64> {
    let v = determinant_value(model, e);
    if !(v.floor < DETERMINANT_TOL) || !v.inverse_s.is_finite() {
        return Err(Error::Unresolvable {
            k: dispersion_k(e, model),
            floor: v.floor,
        });
    }
    Ok(v.inverse_s)
}

/// Newton on `1/S`. Converged when `|1/S| < tol`; where the spacing of
/// doubles in `E` keeps `|1/S|` above that, a point at which no step makes
/// progress is accepted if the determinant relative to its cancelling terms
/// is below `tol`. The reported residual is that relative determinant.
pub fn refine_determinant(model: &LatticeModel, seed: Complex64) -> Result<PoleEstimate> {
    let opts = NewtonOptions {
        tol: DETERMINANT_TOL,
        ..NewtonOptions::default()
    };
    let root = damped_newton_or(
        |e| determinant_residual(model, e),
        seed,
        &opts,
        |e, _| {
            let r = determinant_value(model, e).relative;
            (r < DETERMINANT_TOL).then_some(r)
        },
    )?;
    let residual = determinant_value(model, root.z).relative;
    Ok(PoleEstimate::new(
        root.z,
        Some(dispersion_k(root.z, model)),
        Method::Determinant,
        residual,
    ))
}

/// Determinant zeros seeded from one grid, without the doubling check.
pub fn det_poles_on_grid(model: &LatticeModel, region: &Region, grid: &ComplexGrid) -> Vec<PoleEstimate> {
    det_poles_seeded(model, region, grid, &[])
}

/// As [`det_poles_on_grid`], with `extra` seeds refined alongside the grid
/// seeds (poles of a neighbouring radius in a sweep).
pub fn det_poles_seeded(
    model: &LatticeModel,
    region: &Region,
    grid: &ComplexGrid,
    extra: &[Complex64],
) -> Vec<PoleEstimate> {
    let values = grid.sample(|e| determinant_residual(model, e).ok());
    let mut seeds = zero_seeds(grid, &values);
    seeds.extend_from_slice(extra);
    debug!("determinant search at R = {}: {} seeds", model.radius(), seeds.len());
    let mut poles = Vec::new();
    for seed in seeds {
        match refine_determinant(model, seed) {
            Ok(p) if region.contains(p.energy) => poles.push(p),
            Ok(p) => debug!("seed {seed} left the region, converged to {}", p.energy),
            Err(e) => debug!("seed {seed} dropped: {e}"),
        }
    }
    let mut poles = dedup(poles, 1e-6, |p| p.energy);
    sort_poles(&mut poles);
    poles
}

/// Determinant zeros in `region`. The search is repeated on the doubled
/// grid; a change in the pole count means cells held more than one zero.
pub fn det_poles(model: &LatticeModel, region: &Region, grid: (usize, usize)) -> Result<Vec<PoleEstimate>> {
    region.validate_lower_half()?;
    let base = ComplexGrid::graded(region, grid.0, grid.1);
    let coarse = det_poles_on_grid(model, region, &base);
    let fine = det_poles_on_grid(model, region, &base.doubled());
    if coarse.len() != fine.len() {
        return Err(Error::GridTooCoarse {
            coarse: coarse.len(),
            fine: fine.len(),
        });
    }
    Ok(fine)
}
