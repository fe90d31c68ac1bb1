//! Named experiments fig1 through fig9.

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::config::*;
use crate::error::{Error, Result};
use crate::poles::Method;

pub const PRESETS: [&str; 9] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

fn params(a: &[f64], b: &[f64]) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for (i, &v) in a.iter().enumerate() {
        m.insert(format!("a{}", i + 1), v);
    }
    for (i, &v) in b.iter().enumerate() {
        m.insert(format!("b{}", i + 1), v);
    }
    m
}

fn one_resonance(a1: f64) -> BTreeMap<String, f64> {
    params(&[a1, -2.0], &[1.0, 2.0])
}

fn two_resonance(b2: f64) -> BTreeMap<String, f64> {
    params(&[-0.1, -2.0, -0.08, -3.0], &[0.2, b2, 0.08, 0.05])
}

fn base(name: &str, kind: ExperimentKind, potential: BTreeMap<String, f64>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        kind,
        potential,
        continuum: ContinuumConfig::default(),
        lattice: LatticeConfig::default(),
        profile: ProfileConfig::default(),
        phase: PhaseConfig::default(),
        poles: PolesConfig::default(),
        fixed_point: FixedPointConfig::default(),
        sweep: SweepConfig::default(),
        output: OutputConfig {
            dir: PathBuf::from("out").join(name),
        },
    }
}

fn sweep(name: &str, potential: BTreeMap<String, f64>, method: Method) -> ExperimentConfig {
    let mut c = base(name, ExperimentKind::Trajectories, potential);
    c.sweep.method = method;
    if method == Method::FixedPoint {
        // fixed points live near the real axis
        c.sweep.region.im_min = -4.0;
        c.sweep.region.re_max = 20.0;
    }
    c
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    use ExperimentKind::*;
    let c = match name {
        "fig1" => base(name, Potential, one_resonance(-0.1)),
        "fig2" => base(name, PhaseShift, one_resonance(-0.1)),
        "fig3" => base(name, Poles, one_resonance(-0.1)),
        "fig4" => sweep(name, one_resonance(-0.1), Method::FixedPoint),
        "fig5" => sweep(name, one_resonance(-0.2), Method::FixedPoint),
        "fig6" => sweep(name, one_resonance(-0.1), Method::Determinant),
        "fig7" => base(name, Poles, two_resonance(0.1)),
        "fig8" => sweep(name, two_resonance(0.1), Method::FixedPoint),
        "fig9" => sweep(name, two_resonance(0.14), Method::Determinant),
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}', expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    c.validate()?;
    Ok(c)
}
