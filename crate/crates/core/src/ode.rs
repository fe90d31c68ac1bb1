//! Adaptive Dormand–Prince 8(5,3) integrator for complex-valued first-order
//! systems along a real independent variable.

use num_complex::Complex64;

use crate::error::{Error, Result};

const A: [[f64; 12]; 12] = [
    [0.0; 12],
    [5.260_015_195_876_773E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.972_505_698_453_79E-2, 5.917_517_095_361_37E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.958_758_547_680_685E-2, 0.0, 8.876_275_643_042_054E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        2.413_651_341_592_667E-1, 0.0, -8.845_494_793_282_861E-1, 9.248_340_032_617_92E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.703_703_703_703_703_5E-2, 0.0, 0.0, 1.708_286_087_294_738_6E-1,
        1.254_676_875_668_224_2E-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.7109375E-2, 0.0, 0.0, 1.702_522_110_195_440_5E-1, 6.021_653_898_045_596E-2,
        -1.7578125E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.709_200_011_850_479E-2, 0.0, 0.0, 1.703_839_257_122_399_8E-1,
        1.072_620_304_463_732_8E-1, -1.531_943_774_862_440_2E-2, 8.273_789_163_814_023E-3,
        0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        6.241_109_587_160_757E-1, 0.0, 0.0, -3.360_892_629_446_941_4,
        -8.682_193_468_417_26E-1, 2.759_209_969_944_671E1, 2.015_406_755_047_789_4E1,
        -4.348_988_418_106_996E1, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        4.776_625_364_382_643_4E-1, 0.0, 0.0, -2.488_114_619_971_667_7,
        -5.902_908_268_368_43E-1, 2.123_005_144_818_119_3E1, 1.527_923_363_288_242_3E1,
        -3.328_821_096_898_486E1, -2.033_120_170_850_862_7E-2, 0.0, 0.0, 0.0,
    ],
    [
        -9.371_424_300_859_873E-1, 0.0, 0.0, 5.186_372_428_844_064, 1.091_437_348_996_729_5,
        -8.149_787_010_746_927, -1.852_006_565_999_696E1, 2.273_948_709_935_050_5E1,
        2.493_605_552_679_652_3, -3.046_764_471_898_219_6, 0.0, 0.0,
    ],
    [
        2.273_310_147_516_538, 0.0, 0.0, -1.053_449_546_673_725E1, -2.000_872_058_224_862_5,
        -1.795_893_186_311_88E1, 2.794_888_452_941_996E1, -2.858_998_277_135_023_5,
        -8.872_856_933_530_63, 1.236_056_717_579_430_3E1, 6.433_927_460_157_636E-1, 0.0,
    ],
];

const C: [f64; 12] = [
    0.0,
    5.260_015_195_876_773E-2,
    7.890_022_793_815_16E-2,
    1.183_503_419_072_274E-1,
    2.816_496_580_927_726E-1,
    3.333_333_333_333_333E-1,
    0.25,
    3.076_923_076_923_077E-1,
    6.512_820_512_820_513E-1,
    0.6,
    8.571_428_571_428_571E-1,
    1.0,
];

const B: [f64; 12] = [
    5.429_373_411_656_876_5E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450_312_892_752_409,
    1.891_517_899_314_500_3,
    -5.801_203_960_010_585,
    3.111_643_669_578_199E-1,
    -1.521_609_496_625_161E-1,
    2.013_654_008_040_303_4E-1,
    4.471_061_572_777_259E-2,
];

const ER: [f64; 12] = [
    1.312_004_499_419_488E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.225_156_446_376_204_4,
    -4.957_589_496_572_502E-1,
    1.664_377_182_454_986_4,
    -3.503_288_487_499_736_6E-1,
    3.341_791_187_130_175E-1,
    8.192_320_648_511_571E-2,
    -2.235_530_786_388_629_4E-2,
];

const BHH: [f64; 3] = [
    2.440_944_881_889_764E-1,
    7.338_466_882_816_118E-1,
    2.205_882_352_941_176_6E-2,
];

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Dop853 {
            rtol: 1e-10,
            atol: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

type State<const N: usize> = [Complex64; N];

fn axpy<const N: usize>(y: &State<N>, h: f64, coeffs: &[f64], ks: &[State<N>]) -> State<N> {
    let mut out = *y;
    for (coef, k) in coeffs.iter().zip(ks) {
        if *coef != 0.0 {
            let s = coef * h;
            for i in 0..N {
                out[i] += k[i] * s;
            }
        }
    }
    out
}

impl Dop853 {
    /// Integrates `y' = f(x, y)` from `x0` to `x_end`, calling `observer`
    /// after every accepted step. Returns the state at `x_end`.
    pub fn integrate<const N: usize, F, O>(
        &self,
        mut f: F,
        x0: f64,
        y0: State<N>,
        x_end: f64,
        mut observer: O,
    ) -> Result<(State<N>, Stats)>
    where
        F: FnMut(f64, &State<N>) -> State<N>,
        O: FnMut(f64, &State<N>),
    {
        let mut stats = Stats::default();
        let span = x_end - x0;
        if span == 0.0 {
            return Ok((y0, stats));
        }
        let dir = span.signum();
        let mut x = x0;
        let mut y = y0;
        let mut k: [State<N>; 12] = [[Complex64::new(0.0, 0.0); N]; 12];
        k[0] = f(x, &y);
        stats.evaluations += 1;
        let mut h = self.initial_step(&y, &k[0], span.abs()) * dir;
        let mut last = false;
        let n_real = (2 * N) as f64;

        while !last || (x - x_end) * dir < 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::IntegratorFailure {
                    r: x,
                    reason: format!("step budget of {} exhausted", self.max_steps),
                });
            }
            if (x + 1.01 * h - x_end) * dir > 0.0 {
                h = x_end - x;
                last = true;
            } else {
                last = false;
            }
            if h.abs() < 1e-15 * x.abs().max(1.0) {
                return Err(Error::IntegratorFailure {
                    r: x,
                    reason: "step size underflow".into(),
                });
            }
            for s in 1..12 {
                let ys = axpy(&y, h, &A[s][..s], &k[..s]);
                k[s] = f(x + C[s] * h, &ys);
            }
            stats.evaluations += 11;
            let y_new = axpy(&y, h, &B, &k);

            let (mut err5, mut err3) = (0.0, 0.0);
            for i in 0..N {
                let sk = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                let mut e5 = Complex64::new(0.0, 0.0);
                let mut weighted = Complex64::new(0.0, 0.0);
                for s in 0..12 {
                    e5 += k[s][i] * ER[s];
                    weighted += k[s][i] * B[s];
                }
                let e3 = weighted - k[0][i] * BHH[0] - k[8][i] * BHH[1] - k[11][i] * BHH[2];
                err5 += (e5 / sk).norm_sqr();
                err3 += (e3 / sk).norm_sqr();
            }
            let mut deno = err5 + 0.01 * err3;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = h.abs() * err5 * (1.0 / (deno * n_real)).sqrt();
            if !err.is_finite() || y_new.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::IntegratorFailure {
                    r: x,
                    reason: "non-finite state".into(),
                });
            }
            let fac11 = err.powf(0.125);
            let fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac11 / SAFE));
            let mut h_new = h / fac;
            if err <= 1.0 {
                x += h;
                y = y_new;
                k[0] = f(x, &y);
                stats.evaluations += 1;
                stats.accepted += 1;
                observer(x, &y);
                if h_new.abs() > self.h_max {
                    h_new = self.h_max * dir;
                }
                h = h_new;
            } else {
                h_new = h / (1.0 / FAC_MIN).min(fac11 / SAFE);
                stats.rejected += 1;
                last = false;
                h = h_new;
            }
        }
        Ok((y, stats))
    }

    fn initial_step<const N: usize>(&self, y: &State<N>, f0: &State<N>, span: f64) -> f64 {
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = self.atol + self.rtol * y[i].norm();
            dnf += (f0[i] / sk).norm_sqr();
            dny += (y[i] / sk).norm_sqr();
        }
        let h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h.min(span).min(self.h_max).max(1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_complex_frequency() {
        // y'' = -w^2 y with complex w; exact y = sin(w x)/w
        let w = Complex64::new(2.0, -0.3);
        let solver = Dop853::default();
        let (y, stats) = solver
            .integrate(
                |_x, s: &[Complex64; 2]| [s[1], -w * w * s[0]],
                0.0,
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                5.0,
                |_, _| {},
            )
            .unwrap();
        let exact = (w * 5.0).sin() / w;
        assert!((y[0] - exact).norm() < 1e-9 * exact.norm(), "{} vs {}", y[0], exact);
        assert!((y[1] - (w * 5.0).cos()).norm() < 1e-9 * (w * 5.0).cos().norm());
        assert!(stats.accepted > 0);
    }

    #[test]
    fn respects_step_cap_and_reports_each_step() {
        let solver = Dop853 {
            h_max: 0.1,
            ..Dop853::default()
        };
        let mut xs = Vec::new();
        solver
            .integrate(
                |_x, s: &[Complex64; 1]| [s[0]],
                0.0,
                [Complex64::new(1.0, 0.0)],
                1.0,
                |x, _| xs.push(x),
            )
            .unwrap();
        assert!(xs.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-12));
        assert_eq!(*xs.last().unwrap(), 1.0);
    }
}
