use rayon::prelude::*;

use super::{solve, ProblemSpec, Solution};
use crate::error::{invalid, Error, Result};

/// Slack for the monotonicity and convexity checks.
pub const CURVE_SLACK: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub v: f64,
    pub solution: std::result::Result<Solution, Error>,
}

impl CurvePoint {
    pub fn risk(&self) -> Option<f64> {
        self.solution.as_ref().ok().map(|s| s.risk)
    }
}

#[derive(Debug, Clone)]
pub struct CurveReport {
    pub points: Vec<CurvePoint>,
    pub failed: usize,
    /// Consecutive risks never drop by more than the slack.
    pub monotone: bool,
    pub strictly_increasing: bool,
    /// `None` for measures without the convexity axiom.
    pub convex: Option<bool>,
}

/// Minimal risk at each budget of an ascending grid; points are solved in
/// parallel and failures are kept per point. Shape checks use the successful
/// points only.
pub fn risk_curve(spec: &ProblemSpec, grid: &[f64]) -> Result<CurveReport> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("budget grid must be strictly ascending"));
    }
    if grid.iter().any(|v| !(0.0..=spec.cap).contains(v)) {
        return Err(invalid(format!("budget grid leaves [0, {}]", spec.cap)));
    }
    let points: Vec<CurvePoint> = grid
        .par_iter()
        .map(|&v| CurvePoint { v, solution: spec.with_budget(v).and_then(|s| solve(&s)) })
        .collect();
    let ok: Vec<(f64, f64)> = points.iter().filter_map(|p| p.risk().map(|r| (p.v, r))).collect();
    let failed = points.len() - ok.len();
    let monotone = ok.windows(2).all(|w| w[1].1 >= w[0].1 - CURVE_SLACK);
    let strictly_increasing = ok.windows(2).all(|w| w[1].1 > w[0].1);
    let convex = spec.measure.is_convex().then(|| {
        ok.windows(3).all(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let chord = a.1 + (c.1 - a.1) * (b.0 - a.0) / (c.0 - a.0);
            b.1 <= chord + CURVE_SLACK
        })
    });
    Ok(CurveReport { points, failed, monotone, strictly_increasing, convex })
}
