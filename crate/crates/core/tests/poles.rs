use bargmann_fpo::continuum::*;
use bargmann_fpo::lattice::LatticeModel;
use bargmann_fpo::poles::trajectory::link_snapshots;
use bargmann_fpo::poles::*;
use bargmann_fpo::roots::{ComplexGrid, Region};
use bargmann_fpo::susy::*;
use bargmann_fpo::Error;
use num_complex::Complex64 as C;

fn fig1() -> AnalyticPotential {
    build_one_resonance(-0.1, -2.0, 1.0, 2.0).unwrap()
}

fn region() -> Region {
    Region::new(-10.0, 100.0, -50.0, -0.02).unwrap()
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn determinant_and_transcendental_poles_agree_over_radii() {
    for r in [3.0, 5.0, 7.0] {
        let tp = TruncatedPotential::new(fig1(), r).unwrap();
        let m = LatticeModel::from_potential(&fig1(), r, 0.01, r).unwrap();
        let cont = find_transcendental_poles(&tp, &region(), (160, 60)).unwrap();
        let det = det_poles(&m, &region(), (160, 60)).unwrap();
        assert_eq!(cont.len(), det.len(), "R = {r}");
        assert!(!det.is_empty());
        for p in &det {
            assert!(p.residual < DETERMINANT_TOL);
            let best = cont.iter().map(|q| rel(p.energy, q.energy)).fold(f64::INFINITY, f64::min);
            assert!(best < 0.01, "R = {r}: {} unmatched ({best})", p.energy);
        }
    }
}

#[test]
fn two_resonance_determinant_poles() {
    let p = build_two_resonance([-0.1, -2.0, -0.08, -3.0], [0.2, 0.1, 0.08, 0.05]).unwrap();
    let region = Region::new(0.0, 20.0, -10.0, -0.02).unwrap();
    let targets = [C::new(3.99, -0.4), C::new(8.9936, -0.48)];
    let errors = |a: f64| -> Vec<f64> {
        let m = LatticeModel::from_potential(&p, 5.0, a, 5.0).unwrap();
        let det = det_poles(&m, &region, (80, 40)).unwrap();
        targets
            .iter()
            .map(|t| det.iter().map(|q| rel(q.energy, *t)).fold(f64::INFINITY, f64::min))
            .collect()
    };
    // the deep well near the origin needs a finer lattice than a = 0.01
    let coarse = errors(0.01);
    let fine = errors(0.005);
    assert!(coarse.iter().all(|&e| e < 0.03), "{coarse:?}");
    assert!(fine.iter().all(|&e| e < 0.02), "{fine:?}");
    assert!(fine[1] < 0.5 * coarse[1]);
}

#[test]
fn determinant_poles_are_stable_under_grid_doubling() {
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.01, 5.0).unwrap();
    let g = ComplexGrid::graded(&region(), 160, 60);
    let coarse = det_poles_on_grid(&m, &region(), &g);
    let fine = det_poles_on_grid(&m, &region(), &g.doubled());
    assert_eq!(coarse.len(), fine.len());
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a.energy - b.energy).norm() < 1e-6 * a.energy.norm().max(1.0));
    }
}

#[test]
fn upper_half_plane_region_is_rejected() {
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.01, 5.0).unwrap();
    let r = Region::new(0.0, 10.0, -1.0, 1.0).unwrap();
    assert!(matches!(det_poles(&m, &r, (10, 10)), Err(Error::EmptyRegion(_))));
}

#[test]
fn fixed_point_narrow_pole_and_its_width() {
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.01, 5.0).unwrap();
    let det = refine_determinant(&m, C::new(4.0, -0.4)).unwrap();
    let fp = fixed_point_solve(&m, 4.0, &FixedPointOptions::default()).unwrap();
    assert_eq!(fp.method, Method::FixedPoint);
    assert!(fp.residual < 1e-9);
    let pos_err = (fp.energy.re - det.energy.re).abs() / det.energy.re;
    assert!(pos_err < 0.02, "{pos_err}");
    assert!(fp.width() > 0.0);
}

#[test]
fn plain_iteration_reaches_the_same_fixed_point() {
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.01, 5.0).unwrap();
    let damped = fixed_point_solve(&m, 4.0, &FixedPointOptions::default()).unwrap();
    let opts = FixedPointOptions {
        omega: 1.0,
        ..FixedPointOptions::default()
    };
    match fixed_point_solve(&m, 4.0, &opts) {
        Ok(plain) => assert!((plain.energy - damped.energy).norm() < 1e-7),
        Err(e) => assert!(matches!(e, Error::NoConvergence(_)), "{e}"),
    }
}

#[test]
fn broad_resonance_fixed_point_converges() {
    let p = build_one_resonance(-0.2, -2.0, 1.0, 2.0).unwrap();
    let m = LatticeModel::from_potential(&p, 5.0, 0.01, 5.0).unwrap();
    let fp = fixed_point_solve(&m, 4.0, &FixedPointOptions::default()).unwrap();
    assert!(fp.residual < 1e-9);
}

#[test]
fn free_box_fixed_points_form_a_plain_chain() {
    let free = LatticeModel::from_sites(0.1, vec![0.0; 50]).unwrap();
    let fps = fixed_points_in(&free, 10.0, 0.0, 60.0, &FixedPointOptions::default()).unwrap();
    assert!(fps.len() >= 4);
    // widths grow with energy; nothing narrow stands apart
    for w in fps.windows(2) {
        assert!(w[1].width() > w[0].width(), "{} then {}", w[0].energy, w[1].energy);
    }
    // with the resonance present the chain is broken by a narrow level
    let m = LatticeModel::from_potential(&fig1(), 5.0, 0.1, 5.0).unwrap();
    let fps = fixed_points_in(&m, 10.0, 0.0, 60.0, &FixedPointOptions::default()).unwrap();
    assert!(fps.windows(2).any(|w| w[1].width() < w[0].width()));
}

#[test]
fn seed_outside_band_is_rejected() {
    let m = LatticeModel::from_sites(0.1, vec![0.0; 50]).unwrap();
    let r = fixed_point_solve(&m, -1.0, &FixedPointOptions::default());
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

fn det_sweep(p: &AnalyticPotential, step: f64) -> TrajectorySet {
    let region = Region::new(0.0, 40.0, -12.0, -0.01).unwrap();
    let grid = ComplexGrid::graded(&region, 80, 40);
    let n = ((7.0 - 0.5) / step + 1e-9) as usize;
    let radii: Vec<f64> = (0..=n).map(|i| 0.5 + step * i as f64).collect();
    let ts = trace_trajectories(&radii, |r, prev| {
        let m = LatticeModel::from_potential(p, r, 0.01, r)?;
        Ok(det_poles_seeded(&m, &region, &grid, prev))
    })
    .unwrap();
    classify_poles(ts, (5.0, 7.0)).unwrap()
}

#[test]
fn one_resonance_sweep_has_a_single_stable_family() {
    let ts = det_sweep(&fig1(), 0.1);
    let phys = ts.physical();
    assert_eq!(phys.len(), 1);
    let path = ts.path(phys[0]);
    let end = path.last().unwrap().1;
    assert!(rel(end, C::new(3.99, -0.4)) < 0.01, "{end}");
    let d = ts.families[phys[0]].displacement.unwrap();
    assert!(d * 10.0 <= ts.median_cutoff_displacement().unwrap());
    // cutoff families drift to smaller Re E and |Im E|
    for (f, fam) in ts.families.iter().enumerate() {
        if fam.classification == Classification::Cutoff {
            let p = ts.path(f);
            let (a, b) = (p[0].1, p.last().unwrap().1);
            assert!(b.re < a.re && b.im.abs() < a.im.abs(), "family {f}: {a} -> {b}");
        }
    }
    for link in &ts.links {
        let here = ts.snapshots[link.step].poles.len();
        assert!(link.from < here);
    }
}

#[test]
fn free_sweep_has_no_physical_family() {
    let free = AnalyticPotential::generic(DarbouxChainSpec::empty());
    let ts = det_sweep(&free, 0.5);
    assert!(ts.physical().is_empty());
}

#[test]
fn each_pole_links_to_at_most_one_predecessor() {
    let ts = det_sweep(&fig1(), 0.25);
    let mut seen = std::collections::HashSet::new();
    for l in &ts.links {
        assert!(seen.insert((l.step, l.to)));
    }
    // relinking the stored snapshots reproduces the families
    let again = link_snapshots(ts.snapshots.clone());
    assert_eq!(again.families.len(), ts.families.len());
}
