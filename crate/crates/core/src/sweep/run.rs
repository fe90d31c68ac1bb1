//! Experiment execution and artifact writing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{compare_report, CompareReport};
use crate::continuum::find_transcendental_poles;
use crate::error::{Error, Result};
use crate::lattice::{band_energy, dispersion_k, log_determinant, nearest_branch, phase_sweep, spectrum, LatticeModel};
use crate::poles::{
    classify_poles, det_poles, det_poles_seeded, fixed_points_from, trace_trajectories, Method, PoleEstimate,
    TrajectorySet,
};
use crate::roots::ComplexGrid;
use crate::susy::exact_phase_shift;

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub v: f64,
    pub v_cut: f64,
}

pub fn potential_profile(config: &ExperimentConfig) -> Result<Vec<ProfileRow>> {
    config.validate()?;
    let pot = config.analytic_potential()?;
    let p = &config.profile;
    let r_cut = config.continuum.r_cut;
    (0..p.points)
        .map(|i| {
            let r = p.r_min + (p.r_max - p.r_min) * i as f64 / (p.points - 1) as f64;
            let v = pot.try_value(r)?;
            Ok(ProfileRow {
                r,
                v,
                v_cut: if r < r_cut { v } else { 0.0 },
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseRow {
    pub energy: f64,
    pub delta_fpo: f64,
    pub delta_exact: f64,
    /// `δ_FPO - δ_exact` reduced to `(-π/2, π/2]`.
    pub difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseTable {
    pub rows: Vec<PhaseRow>,
    pub max_difference: f64,
    pub argmax_energy: f64,
}

impl PhaseTable {
    /// Largest `|difference|` among rows with `energy <= e_max`.
    pub fn max_difference_below(&self, e_max: f64) -> (f64, f64) {
        self.rows
            .iter()
            .filter(|r| r.energy <= e_max)
            .map(|r| (r.difference.abs(), r.energy))
            .fold((0.0, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

/// Scan energies: uniform in `E` up to `low_max`, then uniform in lattice
/// momentum up to (not including) the band top.
pub fn phase_energies(config: &ExperimentConfig, model: &LatticeModel) -> Vec<f64> {
    let p = &config.phase;
    let top = model.band_top();
    let low_max = p.low_max.min(0.5 * top);
    let mut out: Vec<f64> = (1..=p.low_points)
        .map(|i| low_max * i as f64 / p.low_points as f64)
        .collect();
    let ka0 = dispersion_k(Complex64::new(low_max, 0.0), model).re * model.a();
    let pi = std::f64::consts::PI;
    for j in 1..=p.band_points {
        let ka = ka0 + (pi - ka0) * j as f64 / (p.band_points + 1) as f64;
        out.push(band_energy(ka / model.a(), model));
    }
    out
}

pub fn phase_table(config: &ExperimentConfig) -> Result<PhaseTable> {
    config.validate()?;
    let spec = config.spec()?;
    let model = config.lattice_model()?;
    let energies = phase_energies(config, &model);
    let sweep = phase_sweep(&model, &energies)?;
    let pi = std::f64::consts::PI;
    let rows: Vec<PhaseRow> = sweep
        .iter()
        .map(|s| {
            let delta_exact = exact_phase_shift(&spec, s.energy.sqrt());
            PhaseRow {
                energy: s.energy,
                delta_fpo: s.delta,
                delta_exact,
                difference: nearest_branch(s.delta - delta_exact, 0.0, pi),
            }
        })
        .collect();
    let (max_difference, argmax_energy) = rows
        .iter()
        .map(|r| (r.difference.abs(), r.energy))
        .fold((0.0, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(PhaseTable {
        rows,
        max_difference,
        argmax_energy,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleRun {
    pub sets: Vec<(Method, Vec<PoleEstimate>)>,
    pub report: Option<CompareReport>,
    /// Seconds per method.
    pub timings: Vec<(Method, f64)>,
}

impl PoleRun {
    pub fn set(&self, method: Method) -> Option<&[PoleEstimate]> {
        self.sets.iter().find(|s| s.0 == method).map(|s| s.1.as_slice())
    }
}

fn ordered_methods(methods: &[Method]) -> Vec<Method> {
    let mut out = Vec::new();
    for m in [Method::Transcendental, Method::Determinant, Method::FixedPoint] {
        if methods.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn spectrum_seeds(model: &LatticeModel, re_min: f64, re_max: f64) -> Result<Vec<f64>> {
    let lo = re_min.max(0.0);
    let reference = 0.5 * (lo + re_max.min(model.band_top()));
    Ok(spectrum(model, reference)?
        .into_iter()
        .map(|z| z.re)
        .filter(|&x| x > lo && x <= re_max)
        .collect())
}

pub fn pole_run(config: &ExperimentConfig) -> Result<PoleRun> {
    config.validate()?;
    let pc = &config.poles;
    let mut sets: Vec<(Method, Vec<PoleEstimate>)> = Vec::new();
    let mut timings = Vec::new();
    let model = config.lattice_model()?;
    for method in ordered_methods(&pc.methods) {
        let start = Instant::now();
        let poles = match method {
            Method::Transcendental => find_transcendental_poles(&config.truncated()?, &pc.region, pc.grid)?,
            Method::Determinant => det_poles(&model, &pc.region, pc.grid)?,
            Method::FixedPoint => {
                let seeds: Vec<f64> = if !config.fixed_point.seeds.is_empty() {
                    config.fixed_point.seeds.clone()
                } else if let Some((_, det)) = sets.iter().find(|s| s.0 == Method::Determinant) {
                    det.iter().map(|p| p.energy.re).collect()
                } else {
                    spectrum_seeds(&model, pc.region.re_min, pc.region.re_max)?
                };
                fixed_points_from(&model, &seeds, &config.fixed_point.options())
            }
        };
        let secs = start.elapsed().as_secs_f64();
        info!("{method}: {} poles in {secs:.1} s", poles.len());
        timings.push((method, secs));
        sets.push((method, poles));
    }
    let report = if sets.len() >= 2 { Some(compare_report(&sets)?) } else { None };
    Ok(PoleRun { sets, report, timings })
}

/// Finds poles over the sweep and classifies the families; a sweep that
/// misses the stability window is returned unclassified.
pub fn trajectory_run(config: &ExperimentConfig) -> Result<TrajectorySet> {
    config.validate()?;
    let s = &config.sweep;
    let pot = config.analytic_potential()?;
    let a = config.lattice.a;
    let region = s.region;
    let grid = ComplexGrid::graded(&region, s.grid.0, s.grid.1);
    let fp_opts = config.fixed_point.options();
    let radii = s.radii();
    let ts = trace_trajectories(&radii, |r, prev| {
        let model = LatticeModel::from_potential(&pot, r, a, r)?;
        match s.method {
            Method::Determinant => Ok(det_poles_seeded(&model, &region, &grid, prev)),
            Method::FixedPoint => {
                let mut seeds: Vec<f64> = prev.iter().map(|e| e.re).collect();
                seeds.extend(spectrum_seeds(&model, region.re_min, region.re_max)?);
                Ok(fixed_points_from(&model, &seeds, &fp_opts)
                    .into_iter()
                    .filter(|p| region.contains(p.energy))
                    .collect())
            }
            Method::Transcendental => Err(Error::InvalidArgument("sweeps support determinant and fixed_point".into())),
        }
    })?;
    match classify_poles(ts.clone(), s.window) {
        Ok(ts) => Ok(ts),
        Err(e @ Error::WindowUncovered { .. }) => {
            warn!("{e}; families left unclassified");
            Ok(ts)
        }
        Err(e) => Err(e),
    }
}

/// Writes `contents` to `dir/name` and records the path.
fn emit(dir: &Path, name: &str, contents: &str, artifacts: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, contents)?;
    artifacts.push(path);
    Ok(())
}

pub fn poles_csv(sets: &[(Method, Vec<PoleEstimate>)]) -> String {
    let mut out = String::from("re_e,im_e,method,residual,classification\n");
    for (_, poles) in sets {
        for p in poles {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(p.energy.re),
                num(p.energy.im),
                p.method,
                num(p.residual),
                p.classification.as_str()
            );
        }
    }
    out
}

pub fn compare_csv(report: &CompareReport) -> String {
    let mut out = String::from(
        "method_a,method_b,re_a,im_a,re_b,im_b,position_discrepancy,width_discrepancy,width_flagged\n",
    );
    for c in &report.comparisons {
        for p in &c.pairs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.a,
                c.b,
                num(p.a.energy.re),
                num(p.a.energy.im),
                num(p.b.energy.re),
                num(p.b.energy.im),
                num(p.position_discrepancy),
                num(p.width_discrepancy),
                p.width_flagged
            );
        }
        for p in &c.unmatched_a {
            let _ = writeln!(out, "{},{},{},{},,,,,", c.a, c.b, num(p.energy.re), num(p.energy.im));
        }
        for p in &c.unmatched_b {
            let _ = writeln!(out, "{},{},,,{},{},,,", c.a, c.b, num(p.energy.re), num(p.energy.im));
        }
    }
    out
}

fn determinant_field_csv(model: &LatticeModel, config: &ExperimentConfig, n: (usize, usize)) -> String {
    let grid = ComplexGrid::graded(&config.poles.region, n.0, n.1);
    let mut out = String::from("re_e,im_e,log_abs_det,arg_det\n");
    for &im in &grid.im {
        for &re in &grid.re {
            let (lm, ph) = log_determinant(model, Complex64::new(re, im));
            let _ = writeln!(out, "{},{},{},{}", num(re), num(im), num(lm), num(ph));
        }
    }
    out
}

fn family_summary(ts: &TrajectorySet, f: usize) -> serde_json::Value {
    let fam = &ts.families[f];
    let path = ts.path(f);
    let (r0, e0) = path[0];
    let (r1, e1) = path[path.len() - 1];
    json!({
        "family": f,
        "classification": fam.classification.as_str(),
        "displacement": fam.displacement,
        "r_start": r0,
        "r_end": r1,
        "start": [e0.re, e0.im],
        "end": [e1.re, e1.im],
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Runs the experiment and writes its artifacts and `manifest.json` into
/// `config.output.dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let start = Instant::now();
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let mut artifacts = Vec::new();
    let summary = match config.kind {
        ExperimentKind::Potential => {
            let rows = potential_profile(config)?;
            let mut csv = String::from("r,v,v_cut\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{}", num(r.r), num(r.v), num(r.v_cut));
            }
            emit(&dir, "potential.csv", &csv, &mut artifacts)?;
            json!({ "points": rows.len() })
        }
        ExperimentKind::PhaseShift => {
            let table = phase_table(config)?;
            let mut csv = String::from("energy,delta_fpo,delta_exact,difference\n");
            for r in &table.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    num(r.energy),
                    num(r.delta_fpo),
                    num(r.delta_exact),
                    num(r.difference)
                );
            }
            emit(&dir, "phase_shift.csv", &csv, &mut artifacts)?;
            let (low_max, low_at) = table.max_difference_below(config.phase.low_max);
            json!({
                "max_difference": table.max_difference,
                "argmax_energy": table.argmax_energy,
                "max_difference_low": low_max,
                "argmax_energy_low": low_at,
            })
        }
        ExperimentKind::Poles => {
            let run = pole_run(config)?;
            emit(&dir, "poles.csv", &poles_csv(&run.sets), &mut artifacts)?;
            if let Some(report) = &run.report {
                emit(&dir, "compare.csv", &compare_csv(report), &mut artifacts)?;
            }
            if let Some(n) = config.poles.field_grid {
                let model = config.lattice_model()?;
                emit(&dir, "det_field.csv", &determinant_field_csv(&model, config, n), &mut artifacts)?;
            }
            let counts: serde_json::Map<String, serde_json::Value> = run
                .sets
                .iter()
                .map(|(m, p)| (m.to_string(), json!(p.len())))
                .collect();
            let timings: serde_json::Map<String, serde_json::Value> =
                run.timings.iter().map(|(m, t)| (m.to_string(), json!(t))).collect();
            let comparisons: Vec<serde_json::Value> = run
                .report
                .iter()
                .flat_map(|r| r.comparisons.iter())
                .map(|c| {
                    json!({
                        "a": c.a, "b": c.b,
                        "matched": c.pairs.len(),
                        "unmatched_a": c.unmatched_a.len(),
                        "unmatched_b": c.unmatched_b.len(),
                        "max_position_discrepancy": c.max_position_discrepancy(),
                    })
                })
                .collect();
            json!({ "counts": counts, "method_seconds": timings, "comparisons": comparisons })
        }
        ExperimentKind::Trajectories => {
            let ts = trajectory_run(config)?;
            for f in 0..ts.families.len() {
                let mut csv = String::from("r_cut,re_e,im_e,method,classification\n");
                let cls = ts.families[f].classification.as_str();
                for &m in &ts.families[f].members {
                    let p = &ts.snapshots[m.0].poles[m.1];
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{}",
                        num(ts.snapshots[m.0].r_cut),
                        num(p.energy.re),
                        num(p.energy.im),
                        p.method,
                        cls
                    );
                }
                emit(&dir, &format!("families/family_{f:03}.csv"), &csv, &mut artifacts)?;
            }
            let summary = json!({
                "snapshots": ts.snapshots.len(),
                "families": (0..ts.families.len()).map(|f| family_summary(&ts, f)).collect::<Vec<_>>(),
                "physical": ts.physical().into_iter().map(|f| family_summary(&ts, f)).collect::<Vec<_>>(),
                "median_cutoff_displacement": ts.median_cutoff_displacement(),
                "breaks": ts.breaks,
            });
            emit(
                &dir,
                "summary.json",
                &serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?,
                &mut artifacts,
            )?;
            json!({
                "families": ts.families.len(),
                "physical": ts.physical().len(),
                "breaks": ts.breaks.len(),
            })
        }
    };
    let manifest = json!({
        "name": config.name,
        "kind": config.kind,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "artifacts": artifacts.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "seconds": start.elapsed().as_secs_f64(),
        "summary": summary,
    });
    emit(
        &dir,
        "manifest.json",
        &serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?,
        &mut artifacts,
    )?;
    Ok(RunSummary { artifacts, summary })
}
