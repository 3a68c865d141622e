use serde::{Deserialize, Serialize};

use super::loss::LossFunction;
use crate::error::{invalid, Result};

/// A claim written as a nondecreasing function of the price-density value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payoff {
    Constant { level: f64 },
    /// `0` below `a`, `beta` on `[a, b)`, `cap` from `b` on.
    TwoStep { beta: f64, a: f64, b: f64, cap: f64 },
    /// `x ↦ beta + (I(c·max(x, y)) − I(c·y)) ∧ (cap − beta)`.
    CappedInverse {
        beta: f64,
        c: f64,
        y: f64,
        cap: f64,
        loss: LossFunction,
    },
    /// `levels[j]` on `[breakpoints[j-1], breakpoints[j])`, with
    /// `levels.len() == breakpoints.len() + 1`.
    StepVector { breakpoints: Vec<f64>, levels: Vec<f64> },
}

impl Payoff {
    pub fn constant(level: f64) -> Self {
        Self::Constant { level }
    }

    /// `cap · 1{x ≥ b}`.
    pub fn indicator(b: f64, cap: f64) -> Self {
        Self::TwoStep { beta: 0.0, a: b, b, cap }
    }

    pub fn step_vector(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(invalid("step vector needs one more level than breakpoints"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("step vector breakpoints must be strictly increasing"));
        }
        Ok(Self::StepVector { breakpoints, levels })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Constant { level } => *level,
            Self::TwoStep { beta, a, b, cap } => {
                if x >= *b {
                    *cap
                } else if x >= *a {
                    *beta
                } else {
                    0.0
                }
            }
            Self::CappedInverse { beta, c, y, cap, loss } => {
                let rise = loss.inverse_derivative(c * x.max(*y)) - loss.inverse_derivative(c * y);
                beta + rise.min(cap - beta)
            }
            Self::StepVector { breakpoints, levels } => levels[breakpoints.partition_point(|b| *b <= x)],
        }
    }

    /// `lim_{s↑x} f(s)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        match self {
            Self::TwoStep { beta, a, b, cap } => {
                if x > *b {
                    *cap
                } else if x > *a {
                    *beta
                } else {
                    0.0
                }
            }
            Self::StepVector { breakpoints, levels } => levels[breakpoints.partition_point(|b| *b < x)],
            _ => self.value(x),
        }
    }

    /// Price-density values where the payoff changes form.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Constant { .. } => vec![],
            Self::TwoStep { a, b, .. } => vec![*a, *b],
            Self::CappedInverse { y, .. } => match self.cap_point() {
                Some(x) => vec![*y, x],
                None => vec![*y],
            },
            Self::StepVector { breakpoints, .. } => breakpoints.clone(),
        }
    }

    /// For `CappedInverse`, the value where the cap starts to bind.
    fn cap_point(&self) -> Option<f64> {
        match self {
            Self::CappedInverse { beta, c, y, cap, loss } => {
                let base = loss.inverse_derivative(c * y);
                let x = loss.derivative(cap - beta + base) / c;
                (base.is_finite() && x.is_finite()).then_some(x.max(*y))
            }
            _ => None,
        }
    }

    /// Whether the payoff is locally constant at `x` (between its kinks).
    pub(crate) fn flat_at(&self, x: f64) -> bool {
        match self {
            Self::CappedInverse { y, beta, cap, .. } => {
                x < *y || beta >= cap || self.cap_point().is_some_and(|xc| x >= xc)
            }
            _ => true,
        }
    }

    /// Bounds `(min, max)` on the values the payoff takes.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::Constant { level } => (*level, *level),
            Self::TwoStep { beta, cap, .. } => (0.0_f64.min(*beta), cap.max(*beta)),
            Self::CappedInverse { beta, cap, .. } => (*beta, cap.max(*beta)),
            Self::StepVector { levels, .. } => levels
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(*l), hi.max(*l))),
        }
    }

    /// The claim `f + t`, used to check translation properties; its values
    /// leave `[0, cap]` in general.
    pub fn shifted_by(&self, t: f64) -> Self {
        match self {
            Self::Constant { level } => Self::Constant { level: level + t },
            Self::TwoStep { beta, a, b, cap } => Self::StepVector {
                breakpoints: if a < b { vec![*a, *b] } else { vec![*b] },
                levels: if a < b {
                    vec![t, beta + t, cap + t]
                } else {
                    vec![t, cap + t]
                },
            },
            Self::CappedInverse { beta, c, y, cap, loss } => Self::CappedInverse {
                beta: beta + t,
                c: *c,
                y: *y,
                cap: cap + t,
                loss: loss.clone(),
            },
            Self::StepVector { breakpoints, levels } => Self::StepVector {
                breakpoints: breakpoints.clone(),
                levels: levels.iter().map(|l| l + t).collect(),
            },
        }
    }

    /// Checks that the payoff is nondecreasing with values in `[0, cap]`.
    pub fn check(&self, cap: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if lo < -1e-12 || hi > cap + 1e-12 {
            return Err(invalid(format!("payoff range [{lo}, {hi}] leaves [0, {cap}]")));
        }
        let monotone = match self {
            Self::Constant { .. } => true,
            Self::TwoStep { beta, a, b, cap } => a <= b && *beta >= 0.0 && beta <= cap,
            Self::CappedInverse { c, y, .. } => *c > 0.0 && *y >= 0.0,
            Self::StepVector { breakpoints, levels } => {
                levels.len() == breakpoints.len() + 1 && levels.windows(2).all(|w| w[1] >= w[0])
            }
        };
        if monotone {
            Ok(())
        } else {
            Err(invalid(format!("payoff is not nondecreasing: {self:?}")))
        }
    }
}
