use bargmann_fpo::continuum::*;
use bargmann_fpo::lattice::*;
use bargmann_fpo::susy::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn fig1() -> AnalyticPotential {
    build_one_resonance(-0.1, -2.0, 1.0, 2.0).unwrap()
}

fn two_res_model() -> LatticeModel {
    let p = build_two_resonance([-0.1, -2.0, -0.08, -3.0], [0.2, 0.1, 0.08, 0.05]).unwrap();
    LatticeModel::from_potential(&p, 5.0, 0.01, 5.0).unwrap()
}

fn dense(model: &LatticeModel, e: C) -> DMatrix<C> {
    let h = model.dense(e);
    let n = h.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { e - h[i][j] } else { -h[i][j] })
}

// characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner
fn char_poly(h: &DMatrix<C>) -> Vec<C> {
    let n = h.nrows();
    let mut c = vec![C::new(0.0, 0.0); n + 1];
    c[n] = C::new(1.0, 0.0);
    let mut m = DMatrix::<C>::zeros(n, n);
    for k in 1..=n {
        m = h * &m + DMatrix::identity(n, n) * c[n - k + 1];
        c[n - k] = -(h * &m).trace() / k as f64;
    }
    c
}

fn poly_roots(c: &[C]) -> Vec<C> {
    let n = c.len() - 1;
    let eval = |z: C| c.iter().rev().fold(C::new(0.0, 0.0), |acc, &a| acc * z + a);
    let mut z: Vec<C> = (0..n).map(|i| C::from_polar(1.0, 0.4 + 0.9 * i as f64) * 3.0).collect();
    for _ in 0..500 {
        for i in 0..n {
            let zi = z[i];
            let denom: C = (0..n).filter(|&j| j != i).map(|j| zi - z[j]).product();
            z[i] = zi - eval(zi) / denom;
        }
    }
    z
}

#[test]
fn small_free_box_eigenvalues_are_polynomial_roots() {
    let m = LatticeModel::from_sites(0.5, vec![0.0; 4]).unwrap();
    let e = 3.0;
    let h = m.dense(C::new(e, 0.0));
    let h = DMatrix::from_fn(4, 4, |i, j| h[i][j]);
    let mut roots = poly_roots(&char_poly(&h));
    let mut z = spectrum(&m, e).unwrap();
    let key = |a: &C, b: &C| a.re.total_cmp(&b.re);
    roots.sort_by(key);
    z.sort_by(key);
    for (r, z) in roots.iter().zip(&z) {
        assert!((r - z).norm() < 1e-10 * m.t(), "{r} vs {z}");
    }
}

#[test]
fn free_box_levels_all_decay() {
    let m = LatticeModel::from_sites(0.5, vec![0.0; 4]).unwrap();
    for e in [1.0, 5.0, 10.0] {
        for z in spectrum(&m, e).unwrap() {
            assert!(z.im < 0.0 && z.im > -m.t(), "{z}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn log_determinant_matches_dense_lu(
        u in prop::collection::vec(-1.0f64..1.0, 1..=100),
        a in 0.1f64..0.5,
    ) {
        let m = LatticeModel::from_sites(a, u).unwrap();
        let e = C::new(1.0, 0.3);
        let det = dense(&m, e).lu().determinant();
        let (lm, ph) = log_determinant(&m, e);
        let lm_ref = det.norm().ln();
        prop_assert!((lm - lm_ref).abs() <= 1e-8 * lm_ref.abs().max(1.0), "{} vs {}", lm, lm_ref);
        let dph = (ph - det.arg() + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        prop_assert!(dph.abs() < 1e-8, "phase {} vs {}", ph, det.arg());
    }

    #[test]
    fn two_resonance_lattice_is_unitary(e in 1e-3f64..3.9999e4) {
        let m = two_res_model();
        let s = solve_scattering(&m, e).unwrap().s;
        prop_assert!((s.norm() - 1.0).abs() < 1e-10, "|S| = {}", s.norm());
    }

    #[test]
    fn thomas_and_determinant_s_agree(e in 0.05f64..200.0) {
        let m = LatticeModel::from_potential(&fig1(), 5.0, 0.01, 5.0).unwrap();
        let a = solve_scattering(&m, e).unwrap().s;
        let b = s_matrix_det(&m, C::new(e, 0.0));
        prop_assert!((a - b).norm() < 1e-9, "{} vs {}", a, b);
    }
}

#[test]
fn free_lattice_is_trivial_across_the_band() {
    let m = LatticeModel::from_sites(0.01, vec![0.0; 500]).unwrap();
    let energies: Vec<f64> = (1..400).map(|i| m.band_top() * i as f64 / 400.0).collect();
    for r in phase_sweep(&m, &energies).unwrap() {
        assert!((r.s - 1.0).norm() < 1e-10, "E = {}: S = {}", r.energy, r.s);
        assert!(r.delta.abs() < 1e-10);
    }
}

#[test]
fn dispersion_near_the_continuum() {
    let m = LatticeModel::from_sites(0.01, vec![0.0; 500]).unwrap();
    let e = C::new(3.99, -0.4);
    let k = dispersion_k(e, &m);
    assert!((k - e.sqrt()).norm() < 0.01 * 0.01 * e.norm());
    assert!(k.im < 0.0 && k.re > 0.0);
    let small = dispersion_k(C::new(1e-6, 0.0), &m);
    assert!((small.re - 1e-3).abs() < 1e-12);
}

#[test]
fn spectrum_at_the_resonance_energy() {
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.01, 5.0).unwrap();
    let set = eigenvalues_at(&m, 3.99).unwrap();
    set.check().unwrap();
    assert!(set.defect < EigenpairSet::BIORTHOGONALITY_TOL);
    let crossing = set
        .eigenvalues
        .iter()
        .map(|z| (z.re - 3.99).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(crossing < 0.02 * 3.99, "{crossing}");
}

#[test]
fn biorthogonality_on_a_small_box() {
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.1, 5.0).unwrap();
    let set = eigenvalues_at(&m, 2.0).unwrap();
    // n = 50, so every pair is checked
    assert_eq!(set.eigenvectors.len(), 50);
    assert!(set.defect < 1e-8, "{}", set.defect);
}

#[test]
fn lattice_phase_converges_at_second_order() {
    let p = fig1();
    let tp = TruncatedPotential::new(p.clone(), 5.0).unwrap();
    let coarse = LatticeModel::from_potential(&p, 5.0, 0.01, 5.0).unwrap();
    let fine = LatticeModel::from_potential(&p, 5.0, 0.005, 5.0).unwrap();
    let pi = std::f64::consts::PI;
    let wrap = |x: f64| x - pi * (x / pi).round();
    for k in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let target = cutoff_phase_shift(&tp, k).unwrap();
        let e1 = wrap(solve_scattering(&coarse, k * k).unwrap().delta - target).abs();
        let e2 = wrap(solve_scattering(&fine, k * k).unwrap().delta - target).abs();
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "k = {k}: order {order}");
    }
}
