//! Pairwise comparison of pole sets from different methods.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poles::{Method, PoleEstimate};

/// Pairs further apart than this (relative) are left unmatched.
pub const MATCH_GATE: f64 = 0.1;
/// Width discrepancies below this are never flagged.
pub const WIDTH_FLAG_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct MatchedPair {
    pub a: PoleEstimate,
    pub b: PoleEstimate,
    /// Relative distance of the positions; real parts only when a fixed-point
    /// estimate is involved, complex energies otherwise.
    pub position_discrepancy: f64,
    pub width_discrepancy: f64,
    /// Width discrepancy above both the position discrepancy and the floor.
    pub width_flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodComparison {
    pub a: Method,
    pub b: Method,
    pub pairs: Vec<MatchedPair>,
    pub unmatched_a: Vec<PoleEstimate>,
    pub unmatched_b: Vec<PoleEstimate>,
}

impl MethodComparison {
    pub fn max_position_discrepancy(&self) -> f64 {
        self.pairs.iter().map(|p| p.position_discrepancy).fold(0.0, f64::max)
    }

    pub fn is_one_to_one(&self) -> bool {
        self.unmatched_a.is_empty() && self.unmatched_b.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub comparisons: Vec<MethodComparison>,
}

impl CompareReport {
    pub fn get(&self, a: Method, b: Method) -> Option<&MethodComparison> {
        self.comparisons
            .iter()
            .find(|c| (c.a, c.b) == (a, b) || (c.a, c.b) == (b, a))
    }
}

fn position_discrepancy(a: &PoleEstimate, b: &PoleEstimate) -> f64 {
    if a.method == Method::FixedPoint || b.method == Method::FixedPoint {
        (a.energy.re - b.energy.re).abs() / b.energy.re.abs().max(1e-12)
    } else {
        (a.energy - b.energy).norm() / b.energy.norm().max(1e-12)
    }
}

fn compare(a: Method, pa: &[PoleEstimate], b: Method, pb: &[PoleEstimate]) -> MethodComparison {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in pa.iter().enumerate() {
        for (j, q) in pb.iter().enumerate() {
            let d = position_discrepancy(p, q);
            if d < MATCH_GATE {
                cand.push((d, i, j));
            }
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; pa.len()];
    let mut used_b = vec![false; pb.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in cand {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        let (wa, wb) = (pa[i].width(), pb[j].width());
        let width_discrepancy = (wa - wb).abs() / wb.abs().max(1e-12);
        pairs.push(MatchedPair {
            a: pa[i],
            b: pb[j],
            position_discrepancy: d,
            width_discrepancy,
            width_flagged: width_discrepancy > d.max(WIDTH_FLAG_FLOOR),
        });
    }
    pairs.sort_by(|x, y| x.b.energy.re.total_cmp(&y.b.energy.re));
    let pick = |set: &[PoleEstimate], used: &[bool]| -> Vec<PoleEstimate> {
        set.iter().zip(used).filter(|(_, &u)| !u).map(|(p, _)| *p).collect()
    };
    MethodComparison {
        a,
        b,
        unmatched_a: pick(pa, &used_a),
        unmatched_b: pick(pb, &used_b),
        pairs,
    }
}

/// Greedy one-to-one nearest-neighbour matching for every pair of sets.
pub fn compare_report(sets: &[(Method, Vec<PoleEstimate>)]) -> Result<CompareReport> {
    if sets.len() < 2 {
        return Err(Error::InvalidArgument("comparison needs at least two methods".into()));
    }
    let mut comparisons = Vec::new();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            comparisons.push(compare(sets[i].0, &sets[i].1, sets[j].0, &sets[j].1));
        }
    }
    Ok(CompareReport { comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn p(re: f64, im: f64, m: Method) -> PoleEstimate {
        PoleEstimate::new(Complex64::new(re, im), None, m, 0.0)
    }

    #[test]
    fn identical_single_pole() {
        let a = vec![p(3.99, -0.4, Method::Transcendental)];
        let b = vec![p(3.99, -0.4, Method::Determinant)];
        let r = compare_report(&[(Method::Transcendental, a), (Method::Determinant, b)]).unwrap();
        let c = &r.comparisons[0];
        assert!(c.is_one_to_one());
        assert_eq!(c.pairs[0].position_discrepancy, 0.0);
        assert!(!c.pairs[0].width_flagged);
    }

    #[test]
    fn greedy_matching_is_one_to_one() {
        let a = vec![p(1.0, -1.0, Method::Transcendental), p(1.05, -1.0, Method::Transcendental)];
        let b = vec![p(1.04, -1.0, Method::Determinant), p(50.0, -5.0, Method::Determinant)];
        let r = compare_report(&[(Method::Transcendental, a), (Method::Determinant, b)]).unwrap();
        let c = &r.comparisons[0];
        assert_eq!(c.pairs.len(), 1);
        assert_eq!(c.pairs[0].a.energy.re, 1.05);
        assert_eq!(c.unmatched_a.len(), 1);
        assert_eq!(c.unmatched_b.len(), 1);
    }

    #[test]
    fn fixed_point_matches_on_position_and_flags_width() {
        let d = vec![p(3.978, -0.398, Method::Determinant)];
        let f = vec![p(3.925, -0.2, Method::FixedPoint)];
        let r = compare_report(&[(Method::Determinant, d), (Method::FixedPoint, f)]).unwrap();
        let pair = &r.comparisons[0].pairs[0];
        assert!(pair.position_discrepancy < 0.02);
        assert!(pair.width_flagged);
    }

    #[test]
    fn needs_two_sets() {
        assert!(compare_report(&[(Method::Determinant, vec![])]).is_err());
    }
}
