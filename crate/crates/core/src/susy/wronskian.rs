//! Dense-determinant evaluation of Wronskians of the exp/sinh/sin family.
//!
//! Every function column is divided by its largest derivative magnitude at
//! the evaluation point, so raw exponentials never overflow. Derivatives of
//! the Wronskian are obtained by replacing the last rows of the derivative
//! matrix; the replaced determinants are expressed through the LU factors of
//! the base matrix (Cramer's rule) instead of being differentiated
//! numerically.

use num_complex::Complex64;

use crate::dd::{ccos, cdd, cdiv, cexp, cscale, csin, dd, mag, sinh_cosh, to_c64, Cdd};

use super::chain::DarbouxChainSpec;
use crate::error::{Error, Result};

/// Below this ratio of `|W|` to the product of column norms the Wronskian is
/// treated as zero.
pub const SINGULAR_WRONSKIAN_THRESHOLD: f64 = 1e-40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformFn {
    /// `exp(c r)`
    Exp(Complex64),
    /// `sinh(b r)`
    Sinh(f64),
    /// `sin(k r)`, the regular free solution
    Sin(Complex64),
}

impl TransformFn {
    /// `m`-th derivative at `r`.
    pub fn derivative(&self, m: usize, r: f64) -> Complex64 {
        to_c64(self.derivatives(m + 1, r)[m])
    }

    /// Derivatives of orders `0..count` in double-double precision.
    fn derivatives(&self, count: usize, r: f64) -> Vec<Cdd> {
        let rr = dd(r);
        let (rate, even, odd) = match *self {
            TransformFn::Exp(c) => {
                let c = cdd(c);
                let e = cexp(c * rr);
                (c, e, e)
            }
            TransformFn::Sinh(b) => {
                let (s, ch) = sinh_cosh(dd(b) * rr);
                (cdd(Complex64::new(b, 0.0)), Cdd::new(s, dd(0.0)), Cdd::new(ch, dd(0.0)))
            }
            TransformFn::Sin(k) => {
                let x = cdd(k) * rr;
                (cdd(k), csin(x), ccos(x))
            }
        };
        let mut out = Vec::with_capacity(count);
        let mut power = Cdd::new(dd(1.0), dd(0.0));
        for m in 0..count {
            let base = if m % 2 == 0 { even } else { odd };
            let sign = matches!(self, TransformFn::Sin(_)) && m % 4 >= 2;
            let v = power * base;
            out.push(if sign { -v } else { v });
            power *= rate;
        }
        out
    }
}

/// The transformation functions of a chain, ordered `u_1, u_2, ..., v_1, v_2, ...`.
pub fn chain_functions(spec: &DarbouxChainSpec) -> Vec<TransformFn> {
    let mut out: Vec<TransformFn> = spec
        .resonances()
        .iter()
        .flat_map(|p| p.exponents())
        .map(TransformFn::Exp)
        .collect();
    out.extend(spec.rates().iter().map(|&b| TransformFn::Sinh(b)));
    out
}

/// Value and first two logarithmic-type derivatives of a Wronskian at one
/// point. `value` carries the column scaling; `d1 = W'/W`, `d2 = W''/W`.
#[derive(Debug, Clone, Copy)]
pub struct WronskianJet {
    pub value: Complex64,
    /// Logarithm of the product of column scale factors; `W = value * exp(ln_scale)`.
    pub ln_scale: f64,
    pub d1: Complex64,
    pub d2: Complex64,
    log_d2: Complex64,
}

impl WronskianJet {
    /// `(ln W)'' = W''/W - (W'/W)^2`, formed before rounding to double.
    pub fn log_second_derivative(&self) -> Complex64 {
        self.log_d2
    }
}

struct DdJet {
    value: Cdd,
    ln_scale: f64,
    d1: Cdd,
    d2: Cdd,
}

fn dd_jet(funcs: &[TransformFn], r: f64) -> Result<DdJet> {
    let n = funcs.len();
    let zero = Cdd::new(dd(0.0), dd(0.0));
    if n == 0 {
        return Ok(DdJet {
            value: Cdd::new(dd(1.0), dd(0.0)),
            ln_scale: 0.0,
            d1: zero,
            d2: zero,
        });
    }
    // rows[m][j] = f_j^{(m)}(r) / s_j for m = 0..=n+1
    let mut rows = vec![vec![zero; n]; n + 2];
    let mut ln_scale = 0.0;
    for (j, f) in funcs.iter().enumerate() {
        let col = f.derivatives(n + 2, r);
        let s = col.iter().map(|&z| mag(z)).fold(0.0, f64::max);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::SingularWronskian { r, relative: 0.0 });
        }
        ln_scale += s.ln();
        for (m, z) in col.into_iter().enumerate() {
            rows[m][j] = cscale(z, s);
        }
    }
    let lu = Lu::factor(&rows[..n], true);
    let value = lu.determinant();
    let col_norms: f64 = (0..n)
        .map(|j| (0..n).map(|m| mag(rows[m][j]).powi(2)).sum::<f64>().sqrt())
        .product();
    let relative = mag(value) / col_norms;
    if !(relative > SINGULAR_WRONSKIAN_THRESHOLD) || lu.singular {
        return Err(Error::SingularWronskian { r, relative });
    }
    // Row n expressed in the basis of rows 0..n-1: y^T M = x^T.
    let y_n = lu.solve(&rows[n]);
    let y_n1 = lu.solve(&rows[n + 1]);
    let d1 = y_n[n - 1];
    let d2 = if n >= 2 {
        y_n1[n - 1] - y_n[n - 2]
    } else {
        y_n1[n - 1]
    };
    Ok(DdJet {
        value,
        ln_scale,
        d1,
        d2,
    })
}

/// Evaluates `W(f_1, ..., f_n)` and its first two derivatives at `r`.
pub fn wronskian_jet(funcs: &[TransformFn], r: f64) -> Result<WronskianJet> {
    let jet = dd_jet(funcs, r)?;
    Ok(WronskianJet {
        value: to_c64(jet.value),
        ln_scale: jet.ln_scale,
        d1: to_c64(jet.d1),
        d2: to_c64(jet.d2),
        log_d2: to_c64(jet.d2 - jet.d1 * jet.d1),
    })
}

/// `V_n(r) = -2 (ln W)''` for the chain's transformation functions.
pub fn generic_wronskian_potential(spec: &DarbouxChainSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if spec.is_empty() {
        return Ok(0.0);
    }
    let jet = wronskian_jet(&chain_functions(spec), r)?;
    Ok(-2.0 * jet.log_second_derivative().re)
}

/// `ψ_n(r, k) = W(u_1..u_2n, sin kr) / W(u_1..u_2n)` and its radial derivative.
pub fn wronskian_wavefunction(
    spec: &DarbouxChainSpec,
    k: Complex64,
    r: f64,
) -> Result<(Complex64, Complex64)> {
    let mut funcs = chain_functions(spec);
    let base = dd_jet(&funcs, r)?;
    funcs.push(TransformFn::Sin(k));
    let ext = dd_jet(&funcs, r)?;
    let ratio = to_c64(cdiv(ext.value, base.value)) * (ext.ln_scale - base.ln_scale).exp();
    let dpsi = ratio * to_c64(ext.d1 - base.d1);
    Ok((ratio, dpsi))
}

/// LU factorization with partial pivoting for small double-double matrices.
pub(crate) struct Lu {
    lu: Vec<Vec<Cdd>>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    /// Factors `a` (row-major) or, with `transpose`, its transpose.
    pub(crate) fn factor(a: &[Vec<Cdd>], transpose: bool) -> Self {
        let n = a.len();
        let mut lu: Vec<Vec<Cdd>> = if transpose {
            (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
        } else {
            a.to_vec()
        };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| mag(lu[x][col]).total_cmp(&mag(lu[y][col])))
                .unwrap_or(col);
            if mag(lu[pivot][col]) == 0.0 {
                singular = true;
                continue;
            }
            if pivot != col {
                lu.swap(pivot, col);
                perm.swap(pivot, col);
                sign = -sign;
            }
            let p = lu[col][col];
            for row in col + 1..n {
                let factor = cdiv(lu[row][col], p);
                lu[row][col] = factor;
                for c in col + 1..n {
                    let sub = factor * lu[col][c];
                    lu[row][c] -= sub;
                }
            }
        }
        Lu {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub(crate) fn determinant(&self) -> Cdd {
        self.lu
            .iter()
            .enumerate()
            .fold(Cdd::new(dd(self.sign), dd(0.0)), |acc, (i, row)| acc * row[i])
    }

    /// Solves `A x = b` for the factored matrix `A`. With the factorization
    /// of `Mᵀ` this returns `y` such that `yᵀ M = bᵀ`.
    pub(crate) fn solve(&self, b: &[Cdd]) -> Vec<Cdd> {
        let n = self.lu.len();
        let mut x: Vec<Cdd> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let sub = self.lu[i][j] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[i][j] * x[j];
                x[i] -= sub;
            }
            x[i] = cdiv(x[i], self.lu[i][i]);
        }
        x
    }
}
