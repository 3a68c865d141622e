use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Convex, strictly increasing loss `ℓ` with derivative `ℓ'` and the extended
/// inverse `I` of `ℓ'` (equal to `-∞` below the range of `ℓ'`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFunction {
    /// `ℓ(x) = exp(a x)`.
    Exponential { a: f64 },
    /// `ℓ(x) = x^p` on `x >= 0`.
    Power { p: f64 },
    /// `ℓ(x) = base(x - m)`.
    Shifted { base: Box<LossFunction>, m: f64 },
}

impl LossFunction {
    pub fn exponential(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("exponential loss needs a > 0, got {a}")));
        }
        Ok(Self::Exponential { a })
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(invalid(format!("power loss needs p > 1, got {p}")));
        }
        Ok(Self::Power { p })
    }

    pub fn shifted(&self, m: f64) -> Self {
        match self {
            // Shifts compose, so keep the tree flat.
            Self::Shifted { base, m: m0 } => Self::Shifted { base: base.clone(), m: m0 + m },
            base => Self::Shifted { base: Box::new(base.clone()), m },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Exponential { a } => (a * x).exp(),
            Self::Power { p } => x.max(0.0).powf(*p),
            Self::Shifted { base, m } => base.value(x - m),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Self::Exponential { a } => a * (a * x).exp(),
            Self::Power { p } => p * x.max(0.0).powf(p - 1.0),
            Self::Shifted { base, m } => base.derivative(x - m),
        }
    }

    /// `I(y)`: the point where `ℓ'` equals `y`; `-∞` when `y` lies below the
    /// range of `ℓ'`.
    pub fn inverse_derivative(&self, y: f64) -> f64 {
        match self {
            Self::Exponential { a } => {
                if y <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (y / a).ln() / a
                }
            }
            Self::Power { p } => {
                if y < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (y / p).powf(1.0 / (p - 1.0))
                }
            }
            Self::Shifted { base, m } => base.inverse_derivative(y) + m,
        }
    }

    /// `ℓ⁻¹(x)` for `x` in the range of `ℓ`.
    pub fn inverse(&self, x: f64) -> f64 {
        match self {
            Self::Exponential { a } => x.ln() / a,
            Self::Power { p } => x.max(0.0).powf(1.0 / p),
            Self::Shifted { base, m } => base.inverse(x) + m,
        }
    }

    pub fn defined_on_reals(&self) -> bool {
        match self {
            Self::Exponential { .. } => true,
            Self::Power { .. } => false,
            Self::Shifted { base, .. } => base.defined_on_reals(),
        }
    }

    /// Whether `x` lies in the interior of `ℓ(ℝ)`.
    pub fn is_interior_value(&self, x: f64) -> bool {
        match self {
            Self::Exponential { .. } => x.is_finite() && x > 0.0,
            Self::Power { .. } => x.is_finite() && x > 0.0,
            Self::Shifted { base, .. } => base.is_interior_value(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_derivative_round_trips() {
        let losses = [
            LossFunction::exponential(1.0).unwrap(),
            LossFunction::exponential(2.5).unwrap(),
            LossFunction::power(2.0).unwrap(),
            LossFunction::power(3.5).unwrap(),
            LossFunction::exponential(1.0).unwrap().shifted(0.4),
        ];
        for l in &losses {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                assert!((l.inverse_derivative(l.derivative(x)) - x).abs() < 1e-10, "{l:?} at {x}");
            }
        }
    }

    #[test]
    fn strictly_convex_on_unit_interval() {
        for l in [LossFunction::exponential(1.0).unwrap(), LossFunction::power(2.0).unwrap()] {
            let h = 0.01;
            for i in 1..99 {
                let x = i as f64 * h;
                let second = l.value(x + h) - 2.0 * l.value(x) + l.value(x - h);
                assert!(second > 0.0);
                assert!(l.value(x + h) > l.value(x));
            }
        }
    }

    #[test]
    fn extended_inverse_outside_range() {
        assert_eq!(LossFunction::exponential(1.0).unwrap().inverse_derivative(0.0), f64::NEG_INFINITY);
        assert_eq!(LossFunction::power(2.0).unwrap().inverse_derivative(-1.0), f64::NEG_INFINITY);
        assert_eq!(LossFunction::power(2.0).unwrap().inverse_derivative(1.0), 0.5);
    }

    #[test]
    fn shifts_compose() {
        let l = LossFunction::exponential(1.0).unwrap().shifted(0.5).shifted(0.25);
        assert!(matches!(&l, LossFunction::Shifted { m, .. } if *m == 0.75));
        assert!((l.value(0.75) - 1.0).abs() < 1e-15);
        assert!((l.inverse(1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn constructor_checks() {
        assert!(LossFunction::exponential(0.0).is_err());
        assert!(LossFunction::power(1.0).is_err());
    }
}
