//! Root seeding and refinement for holomorphic functions on a rectangle of
//! the complex plane.
//!
//! Seeds come from intersections of the zero-level curves of the real and
//! imaginary parts, extracted cell by cell with marching squares. A cell
//! whose boundary carries a nonzero winding number but no intersection (the
//! curves can be too curved for linear interpolation) is seeded at its centre.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let region = Region {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.re_min < self.re_max) || !(self.im_min < self.im_max) {
            return Err(Error::EmptyRegion(format!("{self:?}")));
        }
        Ok(())
    }

    /// Rejects regions reaching into the upper half plane.
    pub fn validate_lower_half(&self) -> Result<()> {
        self.validate()?;
        if self.im_max > 0.0 {
            return Err(Error::EmptyRegion(format!(
                "region must lie in the lower half plane, im_max = {}",
                self.im_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    /// `re_min,re_max,im_min,im_max`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("region '{s}': {e}")))?;
        match parts[..] {
            [a, b, c, d] => Region::new(a, b, c, d),
            _ => Err(Error::InvalidArgument(format!(
                "region '{s}' needs four numbers re_min,re_max,im_min,im_max"
            ))),
        }
    }
}

/// Tensor grid whose nodes are uniform in `sign(x) sqrt|x|` along both
/// axes, which concentrates nodes near the real axis and at low energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

fn graded_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let warp = |x: f64| x.signum() * x.abs().sqrt();
    let unwarp = |u: f64| u.signum() * u * u;
    let (ulo, uhi) = (warp(lo), warp(hi));
    let n = n.max(2);
    let mut out: Vec<f64> = (0..n)
        .map(|i| unwarp(ulo + (uhi - ulo) * i as f64 / (n - 1) as f64))
        .collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

impl ComplexGrid {
    pub fn graded(region: &Region, n_re: usize, n_im: usize) -> Self {
        ComplexGrid {
            re: graded_axis(region.re_min, region.re_max, n_re),
            im: graded_axis(region.im_min, region.im_max, n_im),
        }
    }

    /// Twice as many cells along each axis, containing the old nodes.
    pub fn doubled(&self) -> Self {
        let refine = |v: &[f64]| {
            let mut out = Vec::with_capacity(2 * v.len());
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.extend(v.last());
            out
        };
        ComplexGrid {
            re: refine(&self.re),
            im: refine(&self.im),
        }
    }

    pub fn node(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(self.re[i_re], self.im[i_im])
    }

    /// Samples `f` at every node; `values[i_im][i_re]`.
    pub fn sample<F>(&self, mut f: F) -> Vec<Vec<Option<Complex64>>>
    where
        F: FnMut(Complex64) -> Option<Complex64>,
    {
        self.im
            .iter()
            .map(|&y| {
                self.re
                    .iter()
                    .map(|&x| f(Complex64::new(x, y)).filter(|v| v.is_finite()))
                    .collect()
            })
            .collect()
    }
}

type Point = (f64, f64);

/// Zero-level segments of a bilinear-ish scalar field on the unit square.
/// Corner order: (0,0), (1,0), (1,1), (0,1).
fn level_segments(c: [f64; 4]) -> Vec<(Point, Point)> {
    let corners: [Point; 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let positive = |v: f64| v >= 0.0;
    let mut crossings: Vec<(usize, Point)> = Vec::with_capacity(4);
    for e in 0..4 {
        let (a, b) = (e, (e + 1) % 4);
        if positive(c[a]) != positive(c[b]) {
            let t = c[a] / (c[a] - c[b]);
            let (pa, pb) = (corners[a], corners[b]);
            crossings.push((e, (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))));
        }
    }
    match crossings.len() {
        2 => vec![(crossings[0].1, crossings[1].1)],
        4 => {
            // Saddle: the centre value decides which corners connect.
            let centre = 0.25 * c.iter().sum::<f64>();
            if positive(centre) == positive(c[0]) {
                vec![(crossings[0].1, crossings[1].1), (crossings[2].1, crossings[3].1)]
            } else {
                vec![(crossings[0].1, crossings[3].1), (crossings[1].1, crossings[2].1)]
            }
        }
        _ => Vec::new(),
    }
}

fn intersect(p: (Point, Point), q: (Point, Point)) -> Option<Point> {
    let (p0, p1) = p;
    let (q0, q1) = q;
    let r = (p1.0 - p0.0, p1.1 - p0.1);
    let s = (q1.0 - q0.0, q1.1 - q0.1);
    let den = r.0 * s.1 - r.1 * s.0;
    if den.abs() < 1e-300 {
        return None;
    }
    let w = (q0.0 - p0.0, q0.1 - p0.1);
    let t = (w.0 * s.1 - w.1 * s.0) / den;
    let u = (w.0 * r.1 - w.1 * r.0) / den;
    let inside = |x: f64| (-1e-12..=1.0 + 1e-12).contains(&x);
    (inside(t) && inside(u)).then_some((p0.0 + t * r.0, p0.1 + t * r.1))
}

/// Net number of turns of `arg f` around the cell boundary. Returns `None`
/// when a single edge turns by more than a quarter revolution, where four
/// corner samples cannot resolve the winding.
fn cell_winding(v: [Complex64; 4]) -> Option<i32> {
    let mut total = 0.0;
    for e in 0..4 {
        let d = (v[(e + 1) % 4] / v[e]).arg();
        if d.abs() > 0.5 * std::f64::consts::PI {
            return None;
        }
        total += d;
    }
    Some((total / std::f64::consts::TAU).round() as i32)
}

/// Seeds for zeros of a holomorphic function sampled on `grid`.
pub fn zero_seeds(grid: &ComplexGrid, values: &[Vec<Option<Complex64>>]) -> Vec<Complex64> {
    let mut seeds = Vec::new();
    for j in 0..grid.im.len().saturating_sub(1) {
        for i in 0..grid.re.len().saturating_sub(1) {
            let corners = [
                values[j][i],
                values[j][i + 1],
                values[j + 1][i + 1],
                values[j + 1][i],
            ];
            let Some(v) = corners.iter().copied().collect::<Option<Vec<_>>>() else {
                continue;
            };
            let v = [v[0], v[1], v[2], v[3]];
            let (x0, x1) = (grid.re[i], grid.re[i + 1]);
            let (y0, y1) = (grid.im[j], grid.im[j + 1]);
            let to_plane = |p: Point| Complex64::new(x0 + p.0 * (x1 - x0), y0 + p.1 * (y1 - y0));
            let re_segs = level_segments(v.map(|z| z.re));
            let im_segs = level_segments(v.map(|z| z.im));
            let mut found = false;
            for &a in &re_segs {
                for &b in &im_segs {
                    if let Some(p) = intersect(a, b) {
                        seeds.push(to_plane(p));
                        found = true;
                    }
                }
            }
            if !found && cell_winding(v).map_or(!re_segs.is_empty() && !im_segs.is_empty(), |w| w != 0)
            {
                seeds.push(to_plane((0.5, 0.5)));
            }
        }
    }
    seeds
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Stop once `|f| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Central-difference step relative to `max(1, |z|)`.
    pub rel_step: f64,
    /// Halvings tried before a step is declared stuck.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-9,
            max_iter: 60,
            rel_step: 1e-6,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub z: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration with finite-difference derivative; the step is halved
/// while `|f|` fails to decrease.
pub fn damped_newton<F>(f: F, z0: Complex64, opts: &NewtonOptions) -> Result<Root>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    damped_newton_or(f, z0, opts, |_, _| None)
}

/// [`damped_newton`] with a fallback test: when no step reduces `|f|` any
/// further (or iterations run out), `at_floor(z, f(z))` may still accept
/// the point by returning the residual to report.
pub fn damped_newton_or<F, A>(mut f: F, z0: Complex64, opts: &NewtonOptions, mut at_floor: A) -> Result<Root>
where
    F: FnMut(Complex64) -> Result<Complex64>,
    A: FnMut(Complex64, Complex64) -> Option<f64>,
{
    let mut z = z0;
    let mut fz = f(z)?;
    for it in 0..opts.max_iter {
        if fz.norm() < opts.tol {
            return Ok(Root {
                z,
                residual: fz.norm(),
                iterations: it,
            });
        }
        let h = opts.rel_step * z.norm().max(1.0);
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(Error::NoConvergence(format!("zero derivative at {z}")));
        }
        let step = -fz / d;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = z + step * lambda;
            if let Ok(ft) = f(trial) {
                if ft.is_finite() && ft.norm() < fz.norm() {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((zn, fzn)) => {
                z = zn;
                fz = fzn;
            }
            None => {
                if let Some(residual) = at_floor(z, fz) {
                    return Ok(Root {
                        z,
                        residual,
                        iterations: it,
                    });
                }
                return Err(Error::NoConvergence(format!(
                    "stalled at {z} with |f| = {:.3e}",
                    fz.norm()
                )))
            }
        }
    }
    if fz.norm() < opts.tol {
        return Ok(Root {
            z,
            residual: fz.norm(),
            iterations: opts.max_iter,
        });
    }
    if let Some(residual) = at_floor(z, fz) {
        return Ok(Root {
            z,
            residual,
            iterations: opts.max_iter,
        });
    }
    Err(Error::NoConvergence(format!(
        "{} iterations from {z0}, |f| = {:.3e}",
        opts.max_iter,
        fz.norm()
    )))
}

/// Keeps the first of any points closer than `rel_tol * max(1, |z|)`.
pub fn dedup<T, F>(items: Vec<T>, rel_tol: f64, key: F) -> Vec<T>
where
    F: Fn(&T) -> Complex64,
{
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        let z = key(&item);
        if !out
            .iter()
            .any(|o| (key(o) - z).norm() <= rel_tol * z.norm().max(1.0))
        {
            out.push(item);
        }
    }
    out
}
