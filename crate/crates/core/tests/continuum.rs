use bargmann_fpo::continuum::*;
use bargmann_fpo::roots::Region;
use bargmann_fpo::susy::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn fig1() -> AnalyticPotential {
    build_one_resonance(-0.1, -2.0, 1.0, 2.0).unwrap()
}

fn two_res() -> AnalyticPotential {
    build_two_resonance([-0.1, -2.0, -0.08, -3.0], [0.2, 0.1, 0.08, 0.05]).unwrap()
}

fn free(r_cut: f64) -> TruncatedPotential {
    TruncatedPotential::new(AnalyticPotential::generic(DarbouxChainSpec::empty()), r_cut).unwrap()
}

fn oracle_gamma(p: &AnalyticPotential, k: C, r: f64) -> C {
    let (psi, dpsi) = analytic_wavefunction(p.spec(), k, r).unwrap();
    dpsi / psi
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn log_derivative_matches_darboux_solution() {
    let tp = TruncatedPotential::new(fig1(), 5.0).unwrap();
    let k = C::new(2.0, 0.0);
    let g = integrate_log_derivative(&tp, k).unwrap().gamma;
    assert!(rel(g, oracle_gamma(&fig1(), k, 5.0)) < 1e-8);

    let k = C::new(2.0, -0.1);
    let g = integrate_log_derivative(&tp, k).unwrap().gamma;
    assert!(rel(g, oracle_gamma(&fig1(), k, 5.0)) < 1e-7);
}

#[test]
fn log_derivative_oracle_over_spec_set() {
    let specs = [
        fig1(),
        build_one_resonance(-0.2, -2.0, 1.0, 2.0).unwrap(),
        two_res(),
        build_two_resonance([-0.1, -2.0, -0.08, -3.0], [0.2, 0.14, 0.08, 0.05]).unwrap(),
    ];
    let ks = [
        C::new(0.4, 0.0),
        C::new(1.7, 0.0),
        C::new(3.1, 0.0),
        C::new(1.2, -0.3),
        C::new(2.9, -0.05),
        C::new(5.0, -1.0),
    ];
    for p in specs {
        for r_cut in [3.0, 5.0, 7.0] {
            let tp = TruncatedPotential::new(p.clone(), r_cut).unwrap();
            for k in ks {
                let g = integrate_log_derivative(&tp, k).unwrap().gamma;
                let e = rel(g, oracle_gamma(&p, k, r_cut));
                assert!(e < 1e-7, "R={r_cut} k={k}: {e:e}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn free_log_derivative_is_k_cot(m in 0.1f64..10.0, phi in -0.5f64..0.0, r_cut in 1.0f64..8.0) {
        let k = C::from_polar(m, phi);
        // stay off the poles of cot
        prop_assume!((k * r_cut).sin().norm() > 1e-3);
        let g = integrate_log_derivative(&free(r_cut), k).unwrap().gamma;
        let exact = k * (k * r_cut).cos() / (k * r_cut).sin();
        prop_assert!((g - exact).norm() < 1e-9 * exact.norm().max(1.0), "{} vs {}", g, exact);
    }

    #[test]
    fn continuum_s_matrix_is_unitary(k in 0.05f64..12.0, r_cut in 0.5f64..10.0) {
        let tp = TruncatedPotential::new(fig1(), r_cut).unwrap();
        let s = s_matrix_cut(&tp, k).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        let tp = TruncatedPotential::new(two_res(), r_cut).unwrap();
        let s = s_matrix_cut(&tp, k).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn long_cutoff_phase_matches_exact() {
    let p = fig1();
    let tp = TruncatedPotential::new(p.clone(), 15.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=145 {
        let k = 0.1 + 0.02 * i as f64;
        let d = cutoff_phase_shift(&tp, k).unwrap();
        worst = worst.max((d - exact_phase_shift(p.spec(), k)).abs());
    }
    assert!(worst < 1e-3, "{worst}");

    // at R = 5 the tail matters but stays small
    let tp = TruncatedPotential::new(p.clone(), 5.0).unwrap();
    let d = cutoff_phase_shift(&tp, 1.0).unwrap() - exact_phase_shift(p.spec(), 1.0);
    assert!(d.abs() > 1e-12 && d.abs() < 0.1, "{d}");
}

#[test]
fn cutoff_phase_is_continuous_through_resonance() {
    let tp = TruncatedPotential::new(fig1(), 5.0).unwrap();
    let mut prev = cutoff_phase_shift(&tp, 0.01).unwrap();
    assert!(prev.abs() < 0.05);
    for i in 1..=400 {
        let k = 0.01 + 0.01 * i as f64;
        let d = cutoff_phase_shift(&tp, k).unwrap();
        assert!((d - prev).abs() < 0.5, "jump at k={k}: {prev} -> {d}");
        prev = d;
    }
}

#[test]
fn free_truncation_has_no_poles() {
    let region = Region::new(-10.0, 100.0, -50.0, -0.02).unwrap();
    let poles = find_transcendental_poles(&free(5.0), &region, (80, 30)).unwrap();
    assert!(poles.is_empty(), "{poles:?}");
}

fn fig3_region() -> Region {
    Region::new(-10.0, 100.0, -50.0, -0.02).unwrap()
}

#[test]
fn fig3_chain_and_physical_pole() {
    let tp = TruncatedPotential::new(fig1(), 5.0).unwrap();
    let poles = find_transcendental_poles(&tp, &fig3_region(), (160, 60)).unwrap();
    let target = C::new(3.99, -0.4);
    let hits: Vec<_> = poles.iter().filter(|p| rel(p.energy, target) < 0.01).collect();
    assert_eq!(hits.len(), 1, "{poles:?}");
    for p in &poles {
        assert!(p.residual < TRANSCENDENTAL_TOL);
    }
    // the cutoff chain: Im E falls as Re E grows
    let chain: Vec<_> = poles
        .iter()
        .filter(|p| rel(p.energy, target) >= 0.01 && p.energy.re > 0.0)
        .collect();
    assert!(chain.len() >= 12, "{}", chain.len());
    for w in chain.windows(2) {
        assert!(w[1].energy.im < w[0].energy.im);
    }
}

#[test]
fn poles_come_in_mirror_pairs() {
    let tp = TruncatedPotential::new(fig1(), 5.0).unwrap();
    let region = Region::new(0.0, 40.0, -20.0, -0.02).unwrap();
    let poles = find_transcendental_poles(&tp, &region, (100, 40)).unwrap();
    assert!(poles.len() >= 5);
    for p in poles {
        let k = p.momentum.unwrap();
        let mirror = -k.conj();
        let found = refine_transcendental(&tp, mirror + C::new(1e-4, 1e-4)).unwrap();
        let km = found.momentum.unwrap();
        assert!((km - mirror).norm() < 1e-8 * k.norm().max(1.0), "{k} -> {km}");
    }
}

#[test]
fn pole_set_is_stable_under_grid_doubling() {
    let tp = TruncatedPotential::new(fig1(), 5.0).unwrap();
    let coarse = find_transcendental_poles(&tp, &fig3_region(), (160, 60)).unwrap();
    let fine = find_transcendental_poles(&tp, &fig3_region(), (320, 120)).unwrap();
    assert_eq!(coarse.len(), fine.len());
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a.energy - b.energy).norm() < 1e-6 * a.energy.norm().max(1.0), "{} {}", a.energy, b.energy);
    }
}
