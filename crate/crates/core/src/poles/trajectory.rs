//! Pole trajectories under a sweep of the cutoff radius, and their
//! classification into physical and cutoff families.

use log::debug;
use num_complex::Complex64;
use serde::Serialize;

use super::{Classification, PoleEstimate};
use crate::error::{Error, Result};

/// Floor of the continuation threshold.
pub const LINK_FLOOR: f64 = 1e-3;
/// Threshold in units of the previous displacement of a family.
pub const LINK_FACTOR: f64 = 3.0;
/// Largest window displacement of a physical family.
pub const THETA_PHYS: f64 = 0.05;
/// Physical families move less than this fraction of the median.
pub const MEDIAN_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub r_cut: f64,
    pub poles: Vec<PoleEstimate>,
}

/// Pole `from` of snapshot `step` continues as pole `to` of `step + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Link {
    pub step: usize,
    pub from: usize,
    pub to: usize,
    pub distance: f64,
}

/// A family that found no continuation. `r_cut` is its last radius.
#[derive(Debug, Clone, Serialize)]
pub struct LinkBreak {
    pub family: usize,
    pub r_cut: f64,
    pub energy: Complex64,
    pub nearest: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Family {
    /// `(snapshot, pole)` indices, one per consecutive snapshot.
    pub members: Vec<(usize, usize)>,
    pub classification: Classification,
    /// Path length over the stability window, once classified.
    pub displacement: Option<f64>,
}

impl Family {
    pub fn first_step(&self) -> usize {
        self.members[0].0
    }

    pub fn last_step(&self) -> usize {
        self.members[self.members.len() - 1].0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySet {
    pub snapshots: Vec<Snapshot>,
    pub links: Vec<Link>,
    pub families: Vec<Family>,
    pub breaks: Vec<LinkBreak>,
}

impl TrajectorySet {
    pub fn energy(&self, member: (usize, usize)) -> Complex64 {
        self.snapshots[member.0].poles[member.1].energy
    }

    /// Path of a family as `(R_cut, E)`.
    pub fn path(&self, family: usize) -> Vec<(f64, Complex64)> {
        self.families[family]
            .members
            .iter()
            .map(|&m| (self.snapshots[m.0].r_cut, self.energy(m)))
            .collect()
    }

    pub fn physical(&self) -> Vec<usize> {
        (0..self.families.len())
            .filter(|&f| self.families[f].classification == Classification::Physical)
            .collect()
    }

    /// Median window displacement over the families labeled cutoff.
    pub fn median_cutoff_displacement(&self) -> Option<f64> {
        median(
            self.families
                .iter()
                .filter(|f| f.classification == Classification::Cutoff)
                .filter_map(|f| f.displacement)
                .collect(),
        )
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Half the distance from `poles[i]` to its nearest rival: the other poles
/// of its own snapshot and the second nearest pole of the next one.
fn first_link_threshold(i: usize, here: &[PoleEstimate], next: &[PoleEstimate]) -> f64 {
    let e = here[i].energy;
    let mut rivals: Vec<f64> = here
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| (p.energy - e).norm())
        .collect();
    let mut ahead: Vec<f64> = next.iter().map(|p| (p.energy - e).norm()).collect();
    ahead.sort_by(f64::total_cmp);
    if ahead.len() > 1 {
        rivals.push(ahead[1]);
    }
    match rivals.into_iter().min_by(f64::total_cmp) {
        Some(d) => (0.5 * d).max(LINK_FLOOR),
        None => f64::INFINITY,
    }
}

/// Finds the poles at every radius and links consecutive snapshots.
///
/// `finder` receives the radius and the pole energies of the previous
/// snapshot, which it may use as extra seeds.
pub fn trace_trajectories<F>(radii: &[f64], mut finder: F) -> Result<TrajectorySet>
where
    F: FnMut(f64, &[Complex64]) -> Result<Vec<PoleEstimate>>,
{
    if radii.is_empty() {
        return Err(Error::InvalidArgument("empty radius sweep".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("radii must increase".into()));
    }
    let mut snapshots: Vec<Snapshot> = Vec::with_capacity(radii.len());
    let mut prev: Vec<Complex64> = Vec::new();
    for &r in radii {
        let poles = finder(r, &prev)?;
        debug!("R_cut = {r}: {} poles", poles.len());
        prev = poles.iter().map(|p| p.energy).collect();
        snapshots.push(Snapshot { r_cut: r, poles });
    }
    Ok(link_snapshots(snapshots))
}

/// Greedy nearest-neighbour continuation between consecutive snapshots.
pub fn link_snapshots(snapshots: Vec<Snapshot>) -> TrajectorySet {
    let mut families: Vec<Family> = Vec::new();
    let mut links = Vec::new();
    let mut breaks = Vec::new();
    // family owning each pole of the current snapshot
    let mut owner: Vec<usize> = Vec::new();
    if let Some(first) = snapshots.first() {
        for i in 0..first.poles.len() {
            owner.push(families.len());
            families.push(Family {
                members: vec![(0, i)],
                classification: Classification::Unclassified,
                displacement: None,
            });
        }
    }
    for step in 0..snapshots.len().saturating_sub(1) {
        let here = &snapshots[step].poles;
        let next = &snapshots[step + 1].poles;
        let thresholds: Vec<f64> = (0..here.len())
            .map(|i| {
                let fam = &families[owner[i]];
                if fam.members.len() >= 2 {
                    let m = &fam.members;
                    let last = snapshots[m[m.len() - 1].0].poles[m[m.len() - 1].1].energy;
                    let before = snapshots[m[m.len() - 2].0].poles[m[m.len() - 2].1].energy;
                    (LINK_FACTOR * (last - before).norm()).max(LINK_FLOOR)
                } else {
                    first_link_threshold(i, here, next)
                }
            })
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, p) in here.iter().enumerate() {
            for (j, q) in next.iter().enumerate() {
                let d = (q.energy - p.energy).norm();
                if d <= thresholds[i] {
                    pairs.push((d, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut taken_here = vec![false; here.len()];
        let mut next_owner = vec![usize::MAX; next.len()];
        for (d, i, j) in pairs {
            if taken_here[i] || next_owner[j] != usize::MAX {
                continue;
            }
            taken_here[i] = true;
            next_owner[j] = owner[i];
            families[owner[i]].members.push((step + 1, j));
            links.push(Link {
                step,
                from: i,
                to: j,
                distance: d,
            });
        }
        for i in (0..here.len()).filter(|&i| !taken_here[i]) {
            let nearest = next
                .iter()
                .map(|q| (q.energy - here[i].energy).norm())
                .min_by(f64::total_cmp);
            breaks.push(LinkBreak {
                family: owner[i],
                r_cut: snapshots[step].r_cut,
                energy: here[i].energy,
                nearest,
                threshold: thresholds[i],
            });
        }
        for o in next_owner.iter_mut().filter(|o| **o == usize::MAX) {
            *o = families.len();
            families.push(Family {
                members: Vec::new(),
                classification: Classification::Unclassified,
                displacement: None,
            });
        }
        for (j, &o) in next_owner.iter().enumerate() {
            if families[o].members.is_empty() {
                families[o].members.push((step + 1, j));
            }
        }
        owner = next_owner;
    }
    TrajectorySet {
        snapshots,
        links,
        families,
        breaks,
    }
}

/// Labels every family that spans `window` as physical or cutoff by its
/// path length inside the window; the rest stay unclassified.
pub fn classify_poles(mut ts: TrajectorySet, window: (f64, f64)) -> Result<TrajectorySet> {
    let (lo, hi) = window;
    let eps = 1e-9 * hi.abs().max(1.0);
    let radii: Vec<f64> = ts.snapshots.iter().map(|s| s.r_cut).collect();
    let uncovered = || Error::WindowUncovered { lo, hi };
    if !(lo < hi) || radii.is_empty() || radii[0] > lo + eps || radii[radii.len() - 1] < hi - eps {
        return Err(uncovered());
    }
    let start = radii.iter().position(|&r| r >= lo - eps).ok_or_else(uncovered)?;
    let end = radii.iter().rposition(|&r| r <= hi + eps).ok_or_else(uncovered)?;
    if end <= start {
        return Err(uncovered());
    }
    for f in 0..ts.families.len() {
        let fam = &ts.families[f];
        let spans = fam.first_step() <= start && fam.last_step() >= end;
        let displacement = spans.then(|| {
            let path: Vec<Complex64> = fam
                .members
                .iter()
                .filter(|m| m.0 >= start && m.0 <= end)
                .map(|&m| ts.energy(m))
                .collect();
            path.windows(2).map(|w| (w[1] - w[0]).norm()).sum::<f64>()
        });
        ts.families[f].displacement = displacement;
        ts.families[f].classification = Classification::Unclassified;
    }
    let med = median(ts.families.iter().filter_map(|f| f.displacement).collect());
    for fam in ts.families.iter_mut() {
        if let (Some(d), Some(m)) = (fam.displacement, med) {
            fam.classification = if d < THETA_PHYS && d < MEDIAN_FRACTION * m {
                Classification::Physical
            } else {
                Classification::Cutoff
            };
        }
    }
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poles::Method;

    fn pole(re: f64, im: f64) -> PoleEstimate {
        PoleEstimate::new(Complex64::new(re, im), None, Method::Determinant, 0.0)
    }

    fn synthetic(r: f64) -> Vec<PoleEstimate> {
        // one fixed pole, two drifting ones
        vec![pole(4.0, -0.4), pole(20.0 / r, -8.0 / r), pole(60.0 / r, -20.0 / r)]
    }

    #[test]
    fn single_radius_has_no_links() {
        let ts = trace_trajectories(&[5.0], |r, _| Ok(synthetic(r))).unwrap();
        assert_eq!(ts.snapshots.len(), 1);
        assert!(ts.links.is_empty());
        assert_eq!(ts.families.len(), 3);
        assert!(matches!(classify_poles(ts, (5.0, 7.0)), Err(Error::WindowUncovered { .. })));
    }

    #[test]
    fn synthetic_sweep_has_one_physical_family() {
        let radii: Vec<f64> = (0..=40).map(|i| 3.0 + 0.1 * i as f64).collect();
        let ts = trace_trajectories(&radii, |r, _| Ok(synthetic(r))).unwrap();
        assert_eq!(ts.families.len(), 3);
        assert!(ts.breaks.is_empty());
        let ts = classify_poles(ts, (5.0, 7.0)).unwrap();
        let phys = ts.physical();
        assert_eq!(phys.len(), 1);
        assert!((ts.path(phys[0])[0].1 - Complex64::new(4.0, -0.4)).norm() < 1e-12);
    }

    #[test]
    fn vanished_pole_breaks_its_family() {
        let radii = [1.0, 1.1, 1.2, 1.3];
        let ts = trace_trajectories(&radii, |r, _| {
            let mut p = vec![pole(4.0, -0.4)];
            if r < 1.15 {
                p.push(pole(9.0, -3.0));
            }
            Ok(p)
        })
        .unwrap();
        assert_eq!(ts.breaks.len(), 1);
        assert_eq!(ts.breaks[0].r_cut, 1.1);
        assert_eq!(ts.families.len(), 2);
        assert_eq!(ts.families[0].members.len(), 4);
    }

    #[test]
    fn jump_beyond_threshold_starts_a_new_family() {
        let radii = [1.0, 1.1, 1.2, 1.3];
        let ts = trace_trajectories(&radii, |r, _| {
            let x = if r < 1.25 { 5.0 + r * 0.01 } else { 6.0 };
            Ok(vec![pole(x, -1.0)])
        })
        .unwrap();
        assert_eq!(ts.families.len(), 2);
        assert_eq!(ts.breaks.len(), 1);
    }
}
