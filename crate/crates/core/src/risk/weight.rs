use serde::{Deserialize, Serialize};

use crate::distribution::PriceDensity;
use crate::error::{invalid, Result};

/// Tolerance on `|∫₀¹ k − 1|`.
pub const WEIGHT_MASS_TOL: f64 = 1e-12;

/// One linear piece `k(t) = value + slope·(t − start)` of a weight function,
/// active from `start` up to the next piece's start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPiece {
    pub start: f64,
    pub value: f64,
    #[serde(default)]
    pub slope: f64,
}

/// Nondecreasing, right-continuous weight `k` on `[0, 1)` with unit integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<WeightPiece>", into = "Vec<WeightPiece>")]
pub struct WeightFunction {
    pieces: Vec<WeightPiece>,
    /// `Γ` at each piece start.
    gamma_at: Vec<f64>,
}

impl TryFrom<Vec<WeightPiece>> for WeightFunction {
    type Error = crate::Error;

    fn try_from(pieces: Vec<WeightPiece>) -> Result<Self> {
        Self::from_pieces(pieces)
    }
}

impl From<WeightFunction> for Vec<WeightPiece> {
    fn from(k: WeightFunction) -> Self {
        k.pieces
    }
}

impl WeightFunction {
    pub fn from_pieces(mut pieces: Vec<WeightPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(invalid("weight function has no pieces"));
        }
        if pieces.iter().any(|p| !(p.start.is_finite() && p.value.is_finite() && p.slope.is_finite())) {
            return Err(invalid("weight pieces must be finite"));
        }
        if pieces[0].start > 0.0 {
            pieces.insert(0, WeightPiece { start: 0.0, value: 0.0, slope: 0.0 });
        }
        if pieces[0].start != 0.0 || pieces.iter().any(|p| p.start >= 1.0) {
            return Err(invalid("weight thresholds must lie in [0, 1)"));
        }
        if pieces.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(invalid("weight thresholds must be strictly increasing"));
        }
        if pieces[0].value < 0.0 || pieces.iter().any(|p| p.slope < 0.0) {
            return Err(invalid("weight must be nonnegative and nondecreasing"));
        }
        for w in pieces.windows(2) {
            let end_value = w[0].value + w[0].slope * (w[1].start - w[0].start);
            if w[1].value < end_value - 1e-12 {
                return Err(invalid(format!("weight decreases at t = {}", w[1].start)));
            }
        }
        let mut gamma_at = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            gamma_at.push(acc);
            let end = pieces.get(i + 1).map_or(1.0, |n| n.start);
            let len = end - p.start;
            acc += p.value * len + 0.5 * p.slope * len * len;
        }
        if (acc - 1.0).abs() > WEIGHT_MASS_TOL {
            return Err(invalid(format!("weight integrates to {acc}, not 1")));
        }
        Ok(Self { pieces, gamma_at })
    }

    /// `k ≡ 1`, for which `ρ_k` is the plain expectation.
    pub fn expectation() -> Self {
        Self::from_pieces(vec![WeightPiece { start: 0.0, value: 1.0, slope: 0.0 }]).unwrap()
    }

    /// `k = (1/λ)·1_{[1−λ, 1)}`.
    pub fn avar(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(invalid(format!("AVaR level must lie in (0, 1], got {lambda}")));
        }
        if lambda == 1.0 {
            return Ok(Self::expectation());
        }
        Self::steps(&[(1.0 - lambda, 1.0 / lambda)])
    }

    /// `low` on `[0, ξ)` and the normalizing level `(1 − low·ξ)/(1 − ξ)` on `[ξ, 1)`.
    pub fn two_level(xi: f64, low: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(invalid(format!("two-level split must lie in (0, 1), got {xi}")));
        }
        if !(0.0..=1.0).contains(&low) {
            return Err(invalid(format!("two-level lower weight must lie in [0, 1], got {low}")));
        }
        let high = (1.0 - low * xi) / (1.0 - xi);
        Self::steps(&[(0.0, low), (xi, high)])
    }

    /// Piecewise-constant weight from `(threshold, value)` pairs; zero below
    /// the first threshold.
    pub fn steps(steps: &[(f64, f64)]) -> Result<Self> {
        Self::from_pieces(
            steps
                .iter()
                .map(|&(start, value)| WeightPiece { start, value, slope: 0.0 })
                .collect(),
        )
    }

    /// Piecewise-linear weight through `(t, k)` knots, the first at `t = 0`
    /// and the last at `t = 1`.
    pub fn linear(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 || knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(invalid("linear weight knots must run from t = 0 to t = 1"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("linear weight knots must be strictly increasing in t"));
        }
        Self::from_pieces(
            knots
                .windows(2)
                .map(|w| WeightPiece {
                    start: w[0].0,
                    value: w[0].1,
                    slope: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
                })
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[WeightPiece] {
        &self.pieces
    }

    fn piece_index(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= t).saturating_sub(1)
    }

    /// `k(t)`, right-continuous; `k(1)` extends the last piece.
    pub fn value(&self, t: f64) -> f64 {
        let p = self.pieces[self.piece_index(t)];
        p.value + p.slope * (t - p.start)
    }

    pub(crate) fn gamma(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(1.0);
        let i = self.piece_index(x);
        let p = self.pieces[i];
        let dx = x - p.start;
        self.gamma_at[i] + p.value * dx + 0.5 * p.slope * dx * dx
    }

    /// `Γ(x) = ∫₀ˣ k(t) dt`.
    pub fn gamma_value(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(invalid(format!("gamma_value: level {x} outside [0, 1]")));
        }
        Ok(self.gamma(x))
    }

    /// Levels in `(0, 1)` where `k` changes piece.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.start).filter(|t| *t > 0.0).collect()
    }

    /// `g_k(x)`: `k(F(x))` where `F` is continuous at `x`, otherwise the
    /// average of `k` over the jump `[F(x−), F(x)]`.
    pub fn g_k_value(&self, d: &PriceDensity, x: f64) -> f64 {
        let (lo, hi) = (d.cdf_left(x), d.cdf(x));
        if hi > lo {
            (self.gamma(hi) - self.gamma(lo)) / (hi - lo)
        } else {
            self.value(hi)
        }
    }
}
