//! S-matrix pole estimates and the lattice-based pole finders.

pub mod determinant;
pub mod fixed_point;
pub mod trajectory;

use num_complex::Complex64;
use serde::Serialize;

pub use determinant::{det_poles, det_poles_on_grid, det_poles_seeded, refine_determinant, DETERMINANT_TOL};
pub use fixed_point::{fixed_point_solve, fixed_points_from, fixed_points_in, FixedPointOptions};
pub use trajectory::{classify_poles, trace_trajectories, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Transcendental,
    Determinant,
    FixedPoint,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Transcendental => "transcendental",
            Method::Determinant => "determinant",
            Method::FixedPoint => "fixed_point",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "transcendental" | "continuum" => Ok(Method::Transcendental),
            "determinant" | "det" => Ok(Method::Determinant),
            "fixed_point" | "fixedpoint" | "fpo" => Ok(Method::FixedPoint),
            other => Err(crate::Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Physical,
    Cutoff,
    Unclassified,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Physical => "physical",
            Classification::Cutoff => "cutoff",
            Classification::Unclassified => "unclassified",
        }
    }
}

/// A located pole. `energy` is the complex pole position in the E plane;
/// for fixed-point estimates it is `E_λ - iΓ_λ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleEstimate {
    pub energy: Complex64,
    pub momentum: Option<Complex64>,
    pub method: Method,
    pub residual: f64,
    pub classification: Classification,
}

impl PoleEstimate {
    pub fn new(energy: Complex64, momentum: Option<Complex64>, method: Method, residual: f64) -> Self {
        PoleEstimate {
            energy,
            momentum,
            method,
            residual,
            classification: Classification::Unclassified,
        }
    }

    /// `Γ = -2 Im E`, positive for decaying states.
    pub fn width(&self) -> f64 {
        -2.0 * self.energy.im
    }
}

/// Orders poles by real part, then imaginary part.
pub fn sort_poles(poles: &mut [PoleEstimate]) {
    poles.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
    });
}
