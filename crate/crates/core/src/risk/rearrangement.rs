use crate::error::{invalid, Result};

/// A nondecreasing quantile function of a nonnegative variable, linear on each
/// level segment `[levels[i], levels[i+1])` from `starts[i]` to `ends[i]`;
/// jumps between segments are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    levels: Vec<f64>,
    starts: Vec<f64>,
    ends: Vec<f64>,
}

impl QuantileTable {
    pub fn new(levels: Vec<f64>, starts: Vec<f64>, ends: Vec<f64>) -> Result<Self> {
        let n = starts.len();
        if n == 0 || levels.len() != n + 1 || ends.len() != n {
            return Err(invalid("quantile table needs n segments and n + 1 levels"));
        }
        if levels[0] != 0.0 || levels[n] != 1.0 || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("quantile table levels must increase from 0 to 1"));
        }
        if starts.iter().chain(&ends).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("quantile table values must be finite and nonnegative"));
        }
        for i in 0..n {
            if ends[i] < starts[i] || (i + 1 < n && starts[i + 1] < ends[i]) {
                return Err(invalid(format!("quantile table decreases on segment {i}")));
            }
        }
        Ok(Self { levels, starts, ends })
    }

    /// Step quantile function of a discrete law given as sorted `(value, prob)`.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut levels = vec![0.0];
        let mut acc = 0.0;
        for (_, p) in atoms {
            acc += p;
            levels.push(acc);
        }
        if (acc - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("atom probabilities sum to {acc}")));
        }
        *levels.last_mut().unwrap() = 1.0;
        let values: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        Self::new(levels, values.clone(), values)
    }

    /// Continuous piecewise-linear quantile through `(t, q)` knots.
    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("need at least two knots"));
        }
        Self::new(
            knots.iter().map(|k| k.0).collect(),
            knots[..knots.len() - 1].iter().map(|k| k.1).collect(),
            knots[1..].iter().map(|k| k.1).collect(),
        )
    }

    fn segment(&self, t: f64) -> usize {
        self.levels.partition_point(|l| *l <= t).clamp(1, self.starts.len()) - 1
    }

    fn on_segment(&self, i: usize, t: f64) -> f64 {
        let (t0, t1) = (self.levels[i], self.levels[i + 1]);
        self.starts[i] + (self.ends[i] - self.starts[i]) * (t - t0) / (t1 - t0)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.on_segment(self.segment(t), t)
    }
}

/// Bounds `∫₀¹ q_X(1−t) q_Y(t) dt ≤ E[XY] ≤ ∫₀¹ q_X(t) q_Y(t) dt` over all
/// couplings of the two laws. Exact: the integrands are piecewise quadratic.
pub fn hardy_littlewood_bounds(qx: &QuantileTable, qy: &QuantileTable) -> (f64, f64) {
    let product = |reversed: bool| {
        let mut cuts: Vec<f64> = qy.levels.clone();
        cuts.extend(qx.levels.iter().map(|l| if reversed { 1.0 - l } else { *l }));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 <= t0 {
                continue;
            }
            let mid = 0.5 * (t0 + t1);
            let iy = qy.segment(mid);
            let f = |t: f64| {
                let x = if reversed {
                    qx.on_segment(qx.segment(1.0 - mid), 1.0 - t)
                } else {
                    qx.on_segment(qx.segment(mid), t)
                };
                x * qy.on_segment(iy, t)
            };
            total += (t1 - t0) / 6.0 * (f(t0) + 4.0 * f(mid) + f(t1));
        }
        total
    };
    (product(true), product(false))
}
