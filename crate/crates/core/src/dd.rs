//! Double-double real and complex arithmetic.
//!
//! `twofloat` supplies the arithmetic; its transcendental functions lose
//! several digits (exp in particular), so exp/sin/cos are evaluated here by
//! argument reduction and Taylor series. Its division by a double-double
//! forms the reciprocal residual without a fused multiply-add and is only
//! good to plain precision, so quotients go through [`div`] and [`cdiv`].

use num_complex::{Complex, Complex64};
use twofloat::{consts, TwoFloat};

pub(crate) type Dd = TwoFloat;
pub(crate) type Cdd = Complex<TwoFloat>;

const TINY: f64 = 1e-34;

pub(crate) fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

pub(crate) fn cdd(z: Complex64) -> Cdd {
    Complex::new(dd(z.re), dd(z.im))
}

pub(crate) fn to_f64(x: Dd) -> f64 {
    x.hi() + x.lo()
}

pub(crate) fn to_c64(z: Cdd) -> Complex64 {
    Complex64::new(to_f64(z.re), to_f64(z.im))
}

/// Magnitude in plain precision, used for pivoting and scaling.
pub(crate) fn mag(z: Cdd) -> f64 {
    z.re.hi().hypot(z.im.hi())
}

/// `a / b` with one residual correction.
pub(crate) fn div(a: Dd, b: Dd) -> Dd {
    let q = a / b;
    let r = a - q * b;
    q + r / b.hi()
}

pub(crate) fn cdiv(a: Cdd, b: Cdd) -> Cdd {
    let den = b.re * b.re + b.im * b.im;
    let num = a * b.conj();
    Complex::new(div(num.re, den), div(num.im, den))
}

/// Complex value divided by a plain double.
pub(crate) fn cscale(z: Cdd, s: f64) -> Cdd {
    Complex::new(z.re / s, z.im / s)
}

fn scale_pow2(x: Dd, e: i32) -> Dd {
    let s = 2f64.powi(e);
    TwoFloat::new_add(x.hi() * s, x.lo() * s)
}

pub(crate) fn exp(x: Dd) -> Dd {
    let xh = x.hi();
    if xh == 0.0 {
        return dd(1.0);
    }
    if xh > 709.0 {
        return dd(f64::INFINITY);
    }
    if xh < -745.0 {
        return dd(0.0);
    }
    let n = (xh / std::f64::consts::LN_2).round();
    // |r| <= ln2/2, then divided by 2^5 before the series
    let r = scale_pow2(x - consts::LN_2 * n, -5);
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for i in 1..30 {
        term = term * r / (i as f64);
        sum += term;
        if term.hi().abs() < TINY {
            break;
        }
    }
    for _ in 0..5 {
        sum = sum * sum;
    }
    scale_pow2(sum, n as i32)
}

/// Series for sin and cos on the reduced range `|r| <= π/4`.
fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
    let r2 = r * r;
    let mut s_term = r;
    let mut s = r;
    let mut c_term = dd(1.0);
    let mut c = dd(1.0);
    let mut i = 1.0;
    loop {
        s_term = -s_term * r2 / ((i + 1.0) * (i + 2.0));
        c_term = -c_term * r2 / (i * (i + 1.0));
        s += s_term;
        c += c_term;
        i += 2.0;
        if s_term.hi().abs() < TINY && c_term.hi().abs() < TINY {
            break;
        }
    }
    (s, c)
}

pub(crate) fn sin_cos(x: Dd) -> (Dd, Dd) {
    let q = (x.hi() / std::f64::consts::FRAC_PI_2).round();
    let r = x - consts::FRAC_PI_2 * q;
    let (s, c) = sin_cos_reduced(r);
    match (q as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

pub(crate) fn sinh_cosh(x: Dd) -> (Dd, Dd) {
    if x.hi() == 0.0 {
        return (dd(0.0), dd(1.0));
    }
    if x.hi().abs() < 0.5 {
        let x2 = x * x;
        let mut term = x;
        let mut s = x;
        let mut i = 1.0;
        loop {
            term = term * x2 / ((i + 1.0) * (i + 2.0));
            s += term;
            i += 2.0;
            if term.hi().abs() <= TINY * s.hi().abs() {
                break;
            }
        }
        let c = (dd(1.0) + s * s).sqrt();
        return (s, c);
    }
    let e = exp(x);
    let inv = div(dd(1.0), e);
    ((e - inv) / 2.0, (e + inv) / 2.0)
}

/// `(tanh x, sech² x)` without overflow for large `|x|`.
pub(crate) fn tanh_sech2(x: Dd) -> (Dd, Dd) {
    if x.hi().abs() < 0.5 {
        let (s, c) = sinh_cosh(x);
        let inv = div(dd(1.0), c);
        return (s * inv, inv * inv);
    }
    let e = exp(x.abs() * -2.0);
    let one_plus = dd(1.0) + e;
    let t = div(dd(1.0) - e, one_plus);
    let sech2 = div(e * 4.0, one_plus * one_plus);
    (if x.hi() < 0.0 { -t } else { t }, sech2)
}

/// Natural logarithm by one Newton step on the plain-precision value.
pub(crate) fn ln(x: Dd) -> Dd {
    let y = dd(x.hi().ln());
    y + div(x, exp(y)) - dd(1.0)
}

pub(crate) fn atanh(x: Dd) -> Dd {
    ln(div(dd(1.0) + x, dd(1.0) - x)) / 2.0
}

pub(crate) fn cexp(z: Cdd) -> Cdd {
    let m = exp(z.re);
    let (s, c) = sin_cos(z.im);
    Complex::new(m * c, m * s)
}

pub(crate) fn csin(z: Cdd) -> Cdd {
    let (s, c) = sin_cos(z.re);
    let (sh, ch) = sinh_cosh(z.im);
    Complex::new(s * ch, c * sh)
}

pub(crate) fn ccos(z: Cdd) -> Cdd {
    let (s, c) = sin_cos(z.re);
    let (sh, ch) = sinh_cosh(z.im);
    Complex::new(c * ch, -(s * sh))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference digits from a 40-digit evaluation.
    fn close(x: Dd, hi_digits: &str) -> bool {
        let reference: f64 = hi_digits.parse().unwrap();
        let err = x - dd(reference);
        // Residual below plain double resolution of the reference string
        to_f64(err).abs() < 1e-15 * reference.abs()
    }

    #[test]
    fn exp_is_consistent_with_f64() {
        for &x in &[-25.0, -3.2, -0.007, 0.0, 0.5, 1.0, 7.25] {
            let e = exp(dd(x));
            assert!((to_f64(e) - f64::exp(x)).abs() <= 2e-16 * f64::exp(x), "{x}");
        }
        assert!(close(exp(dd(1.0)), "2.718281828459045"));
    }

    #[test]
    fn exp_addition_theorem_in_extended_precision() {
        let a = dd(0.37);
        let b = dd(-2.91);
        let lhs = exp(a + b);
        let rhs = exp(a) * exp(b);
        assert!(to_f64(lhs - rhs).abs() < 1e-29);
    }

    #[test]
    fn pythagorean_identity() {
        for &x in &[0.1, 1.3, 2.9, -4.4, 30.0] {
            let (s, c) = sin_cos(dd(x));
            assert!(to_f64(s * s + c * c - dd(1.0)).abs() < 1e-30, "{x}");
            assert!((to_f64(s) - x.sin()).abs() < 2e-16);
        }
        for &x in &[0.0, 0.01, 0.3, 0.7, -2.0] {
            let (s, c) = sinh_cosh(dd(x));
            assert!(to_f64(c * c - s * s - dd(1.0)).abs() < 1e-29, "{x}");
            assert!((to_f64(s) - x.sinh()).abs() < 4e-16 * x.cosh());
        }
    }

    #[test]
    fn division_is_accurate_to_double_double() {
        let a = dd(1.1);
        let b = dd(0.7);
        let q = div(a, b);
        assert!(to_f64(q * b - a).abs() < 1e-31);
        let third = div(dd(1.0), dd(3.0));
        assert!(to_f64(third * 3.0 - dd(1.0)).abs() < 1e-31);
        let z = Complex::new(dd(0.3), dd(-1.7));
        let w = Complex::new(dd(2.2), dd(0.9));
        let back = cdiv(z, w) * w - z;
        assert!(mag(back) < 1e-30);
    }

    #[test]
    fn logarithm_inverts_exponential() {
        for &x in &[0.3, 2.0, 1e-5, 123.4] {
            let y = ln(dd(x));
            assert!(to_f64(exp(y) - dd(x)).abs() < 1e-29 * x, "{x}");
        }
        let t = atanh(dd(-0.04));
        let (th, _) = tanh_sech2(t);
        assert!(to_f64(th + dd(0.04)).abs() < 1e-31);
    }

    #[test]
    fn tanh_branches_agree() {
        for &x in &[0.49999, 0.50001, -3.0, 40.0, -800.0] {
            let (t, s2) = tanh_sech2(dd(x));
            assert!((to_f64(t) - x.tanh()).abs() < 2e-16, "{x}");
            let sech = 1.0 / x.cosh();
            assert!((to_f64(s2) - sech * sech).abs() <= 4e-16 * sech * sech, "{x}");
            assert!(to_f64(t * t + s2 - dd(1.0)).abs() < 1e-30, "{x}");
        }
    }

    #[test]
    fn ln2_multiple_reproduces_powers_of_two() {
        let e = exp(consts::LN_2 * 5.0);
        assert!(to_f64(e - dd(32.0)).abs() < 1e-28);
    }

    #[test]
    fn complex_sine_matches_plain_precision() {
        let z = Complex64::new(1.3, -0.4);
        let s = to_c64(csin(cdd(z)));
        assert!((s - z.sin()).norm() < 1e-15);
        let c = to_c64(ccos(cdd(z)));
        assert!((c - z.cos()).norm() < 1e-15);
        let e = to_c64(cexp(cdd(z)));
        assert!((e - z.exp()).norm() < 1e-15);
    }
}
