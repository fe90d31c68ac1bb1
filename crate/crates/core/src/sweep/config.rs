//! Experiment configuration: a TOML file with one section per stage.
//!
//! ```toml
//! name = "fig3"
//! kind = "poles"
//!
//! [potential]
//! a1 = -0.1
//! a2 = -2.0
//! b1 = 1.0
//! b2 = 2.0
//!
//! [continuum]
//! r_cut = 5.0
//!
//! [lattice]
//! a = 0.01
//!
//! [poles]
//! region = { re_min = -10.0, re_max = 100.0, im_min = -50.0, im_max = -0.02 }
//! grid = [160, 60]
//! methods = ["transcendental", "determinant", "fixed_point"]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continuum::TruncatedPotential;
use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::poles::{FixedPointOptions, Method};
use crate::roots::Region;
use crate::susy::{AnalyticPotential, DarbouxChainSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Potential,
    PhaseShift,
    Poles,
    Trajectories,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    /// Flat `a1.., b1..` keys; empty for the free particle.
    #[serde(default)]
    pub potential: BTreeMap<String, f64>,
    #[serde(default)]
    pub continuum: ContinuumConfig,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub poles: PolesConfig,
    #[serde(default)]
    pub fixed_point: FixedPointConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuumConfig {
    pub r_cut: f64,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        ContinuumConfig { r_cut: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub a: f64,
    /// Lead attachment radius; `R_cut` when absent.
    pub radius: Option<f64>,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { a: 0.01, radius: None }
    }
}

/// `r` grid of the potential dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            r_min: 0.01,
            r_max: 10.0,
            points: 1000,
        }
    }
}

/// Energies of the phase-shift scan: `low_points` uniform in `(0, low_max]`
/// followed by `band_points` uniform in lattice momentum up to the band top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub low_max: f64,
    pub low_points: usize,
    pub band_points: usize,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            low_max: 20.0,
            low_points: 2000,
            band_points: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolesConfig {
    pub region: Region,
    pub grid: (usize, usize),
    pub methods: Vec<Method>,
    /// Grid of the determinant field dump, if wanted.
    pub field_grid: Option<(usize, usize)>,
}

impl Default for PolesConfig {
    fn default() -> Self {
        PolesConfig {
            region: Region {
                re_min: -10.0,
                re_max: 100.0,
                im_min: -50.0,
                im_max: -0.02,
            },
            grid: (160, 60),
            methods: vec![Method::Transcendental, Method::Determinant, Method::FixedPoint],
            field_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointConfig {
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Explicit seed energies; otherwise determinant poles or the spectrum.
    pub seeds: Vec<f64>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        let d = FixedPointOptions::default();
        FixedPointConfig {
            omega: d.omega,
            tol: d.tol,
            max_iter: d.max_iter,
            seeds: Vec::new(),
        }
    }
}

impl FixedPointConfig {
    pub fn options(&self) -> FixedPointOptions {
        FixedPointOptions {
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
            ..FixedPointOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
    pub window: (f64, f64),
    pub method: Method,
    pub region: Region,
    pub grid: (usize, usize),
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            r_min: 0.5,
            r_max: 7.0,
            step: 0.01,
            window: (5.0, 7.0),
            method: Method::Determinant,
            region: Region {
                re_min: 0.0,
                re_max: 40.0,
                im_min: -12.0,
                im_max: -0.01,
            },
            grid: (80, 40),
        }
    }
}

impl SweepConfig {
    pub fn radii(&self) -> Vec<f64> {
        let n = ((self.r_max - self.r_min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.r_min + self.step * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

fn cfg<E: std::fmt::Display>(e: E) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(cfg)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(cfg)
    }

    pub fn spec(&self) -> Result<DarbouxChainSpec> {
        let flat: Vec<String> = self.potential.iter().map(|(k, v)| format!("{k}={v}")).collect();
        flat.join(",").parse::<DarbouxChainSpec>().map_err(cfg)
    }

    pub fn analytic_potential(&self) -> Result<AnalyticPotential> {
        Ok(AnalyticPotential::from_spec(self.spec()?))
    }

    pub fn truncated(&self) -> Result<TruncatedPotential> {
        TruncatedPotential::new(self.analytic_potential()?, self.continuum.r_cut)
    }

    pub fn lattice_radius(&self) -> f64 {
        self.lattice.radius.unwrap_or(self.continuum.r_cut)
    }

    pub fn lattice_model(&self) -> Result<LatticeModel> {
        LatticeModel::from_potential(
            &self.analytic_potential()?,
            self.continuum.r_cut,
            self.lattice.a,
            self.lattice_radius(),
        )
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {x}")))
            }
        };
        positive("continuum.r_cut", self.continuum.r_cut)?;
        positive("lattice.a", self.lattice.a)?;
        let radius = self.lattice_radius();
        if radius < self.continuum.r_cut {
            return Err(Error::Config(format!(
                "lattice.radius {radius} is inside R_cut = {}",
                self.continuum.r_cut
            )));
        }
        let aligned = |r: f64| ((r / self.lattice.a) - (r / self.lattice.a).round()).abs() <= 1e-6;
        if !aligned(radius) {
            return Err(Error::Config(format!(
                "radius {radius} is not a multiple of a = {}",
                self.lattice.a
            )));
        }
        match self.kind {
            ExperimentKind::Potential => {
                let p = &self.profile;
                if !(p.r_min > 0.0 && p.r_max > p.r_min && p.points >= 2) {
                    return Err(Error::Config(format!("bad profile grid {p:?}")));
                }
            }
            ExperimentKind::PhaseShift => {
                let p = &self.phase;
                positive("phase.low_max", p.low_max)?;
                if p.low_points + p.band_points < 2 {
                    return Err(Error::Config("phase scan needs at least two energies".into()));
                }
            }
            ExperimentKind::Poles => {
                self.poles.region.validate_lower_half().map_err(cfg)?;
                if self.poles.grid.0 < 2 || self.poles.grid.1 < 2 {
                    return Err(Error::Config(format!("poles.grid {:?} too small", self.poles.grid)));
                }
                if self.poles.methods.is_empty() {
                    return Err(Error::Config("poles.methods is empty".into()));
                }
                self.check_fixed_point()?;
            }
            ExperimentKind::Trajectories => {
                let s = &self.sweep;
                positive("sweep.step", s.step)?;
                positive("sweep.r_min", s.r_min)?;
                if s.r_max < s.r_min {
                    return Err(Error::Config(format!("sweep range {}..{} is empty", s.r_min, s.r_max)));
                }
                if s.method == Method::Transcendental {
                    return Err(Error::Config("sweeps support determinant and fixed_point".into()));
                }
                s.region.validate_lower_half().map_err(cfg)?;
                if let Some(r) = s.radii().into_iter().find(|&r| !aligned(r)) {
                    return Err(Error::Config(format!(
                        "sweep radius {r} is not a multiple of a = {}",
                        self.lattice.a
                    )));
                }
                self.check_fixed_point()?;
            }
        }
        Ok(())
    }

    fn check_fixed_point(&self) -> Result<()> {
        let f = &self.fixed_point;
        if !(f.omega > 0.0 && f.omega <= 1.0) || !(f.tol > 0.0) || f.max_iter == 0 {
            return Err(Error::Config(format!("bad fixed-point settings {f:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = r#"
name = "fig3"
kind = "poles"

[potential]
a1 = -0.1
a2 = -2.0
b1 = 1.0
b2 = 2.0

[poles]
grid = [40, 20]
methods = ["determinant"]
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_toml_str(FIG3).unwrap();
        assert_eq!(c.continuum.r_cut, 5.0);
        assert_eq!(c.lattice.a, 0.01);
        assert_eq!(c.poles.grid, (40, 20));
        assert_eq!(c.poles.region.re_max, 100.0);
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn positive_a1_cites_the_ordering_rule() {
        let text = FIG3.replace("a1 = -0.1", "a1 = 0.1");
        match ExperimentConfig::from_toml_str(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("a2 < a1 < 0"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_misaligned_radius_are_rejected() {
        assert!(ExperimentConfig::from_toml_str(&format!("{FIG3}\n[extra]\nx = 1\n")).is_err());
        let text = FIG3.replace("[poles]", "[lattice]\nradius = 5.005\n\n[poles]");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_radii_are_inclusive() {
        let s = SweepConfig {
            step: 0.05,
            ..SweepConfig::default()
        };
        let r = s.radii();
        assert_eq!(r.len(), 131);
        assert!((r[130] - 7.0).abs() < 1e-12);
    }
}
