//! Models of the price density `φ` and its distributional primitives.
//!
//! Every model exposes the CDF `F`, the right-continuous quantile function
//! `q` (with the convention `q(0) = 0` and `q(1) = ess sup φ`), the capital
//! integral `Φ(x) = ∫₀ˣ q(t) dt` and the partial expectations built from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{root_bracketed_report, Bracket};

/// Tolerance on `|E[φ] − 1|` accepted by [`PriceDensity::validate`].
pub const MEAN_TOL: f64 = 1e-9;
/// Tolerance on `|Σ p_i − 1|` for discrete models.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Residual tolerance on `Φ(z) − (1 − v)` in [`PriceDensity::z_of_v`].
pub const Z_TOL: f64 = 1e-12;
const Z_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileKnot {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityModel {
    Uniform { lo: f64, hi: f64 },
    /// Quantile function interpolated linearly between knots. With
    /// `tail_rate = Some(θ)` the last knot `(t_m, q_m)` has `t_m < 1` and the
    /// law above it is `q_m + Exp(θ)`, so `φ` is unbounded.
    PiecewiseLinearQuantile {
        knots: Vec<QuantileKnot>,
        tail_rate: Option<f64>,
    },
    EmpiricalDiscrete { atoms: Vec<Atom> },
}

/// A price density model with cached cumulative quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceDensity {
    model: DensityModel,
    /// PLQ: `Φ` at each knot. Discrete: cumulative probabilities.
    cum: Vec<f64>,
    /// Discrete only: `prefix[j] = Σ_{i<j} p_i φ_i`.
    prefix: Vec<f64>,
}

impl PriceDensity {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi <= lo {
            return Err(Error::InvalidDensity(format!(
                "uniform density needs 0 <= lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self {
            model: DensityModel::Uniform { lo, hi },
            cum: vec![],
            prefix: vec![],
        })
    }

    /// Bounded piecewise-linear quantile function; knots must span levels 0 to 1.
    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Self> {
        Self::build_plq(knots, None)
    }

    /// Piecewise-linear quantile on `[0, t_m]` with an exponential upper tail
    /// of rate `rate` beyond the last knot.
    pub fn piecewise_linear_with_tail(knots: &[(f64, f64)], rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidDensity(format!("tail rate must be positive, got {rate}")));
        }
        Self::build_plq(knots, Some(rate))
    }

    fn build_plq(knots: &[(f64, f64)], tail_rate: Option<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDensity(msg));
        if knots.len() < 2 {
            return bad("piecewise-linear quantile needs at least two knots".into());
        }
        if knots.iter().any(|(t, q)| !t.is_finite() || !q.is_finite() || *q < 0.0) {
            return bad("knots must be finite with nonnegative values".into());
        }
        if knots[0].0 != 0.0 {
            return bad(format!("first knot level must be 0, got {}", knots[0].0));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("knot levels must be strictly increasing".into());
        }
        let last = knots[knots.len() - 1].0;
        match tail_rate {
            None if last != 1.0 => return bad(format!("last knot level must be 1, got {last}")),
            Some(_) if last >= 1.0 => {
                return bad("with a tail extension the last knot level must be below 1".into())
            }
            _ => {}
        }
        let knots: Vec<QuantileKnot> = knots
            .iter()
            .map(|&(level, value)| QuantileKnot { level, value })
            .collect();
        let mut cum = Vec::with_capacity(knots.len());
        cum.push(0.0);
        for w in knots.windows(2) {
            let area = 0.5 * (w[0].value + w[1].value) * (w[1].level - w[0].level);
            cum.push(cum.last().unwrap() + area);
        }
        Ok(Self {
            model: DensityModel::PiecewiseLinearQuantile { knots, tail_rate },
            cum,
            prefix: vec![],
        })
    }

    /// Discrete law on atoms `(value, prob)` sorted by strictly increasing value.
    pub fn empirical(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDensity("no atoms".into()));
        }
        if atoms.iter().any(|(v, p)| !v.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidDensity("atoms must be finite".into()));
        }
        if atoms.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidDensity(
                "atoms must be sorted by strictly increasing value".into(),
            ));
        }
        let atoms: Vec<Atom> = atoms.iter().map(|&(value, prob)| Atom { value, prob }).collect();
        let mut cum = Vec::with_capacity(atoms.len());
        let mut prefix = Vec::with_capacity(atoms.len() + 1);
        let (mut c, mut s) = (0.0, 0.0);
        prefix.push(0.0);
        for a in &atoms {
            c += a.prob;
            s += a.prob * a.value;
            cum.push(c);
            prefix.push(s);
        }
        Ok(Self {
            model: DensityModel::EmpiricalDiscrete { atoms },
            cum,
            prefix,
        })
    }

    pub fn from_model(model: DensityModel) -> Result<Self> {
        match model {
            DensityModel::Uniform { lo, hi } => Self::uniform(lo, hi),
            DensityModel::PiecewiseLinearQuantile { knots, tail_rate } => {
                let pairs: Vec<(f64, f64)> = knots.iter().map(|k| (k.level, k.value)).collect();
                Self::build_plq(&pairs, tail_rate)
            }
            DensityModel::EmpiricalDiscrete { atoms } => {
                let pairs: Vec<(f64, f64)> = atoms.iter().map(|a| (a.value, a.prob)).collect();
                Self::empirical(&pairs)
            }
        }
    }

    pub fn model(&self) -> &DensityModel {
        &self.model
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.model, DensityModel::EmpiricalDiscrete { .. })
    }

    /// `F` is continuous and strictly increasing on the support, which is what
    /// the closed-form and variational solvers require.
    pub fn is_continuous(&self) -> bool {
        match &self.model {
            DensityModel::Uniform { .. } => true,
            DensityModel::PiecewiseLinearQuantile { knots, .. } => {
                knots.windows(2).all(|w| w[1].value > w[0].value)
            }
            DensityModel::EmpiricalDiscrete { .. } => false,
        }
    }

    pub(crate) fn require_continuous(&self, op: &str) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::UnsupportedDensity(format!(
                "{op} needs a continuous, strictly increasing distribution function"
            )))
        }
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.model {
            DensityModel::EmpiricalDiscrete { atoms } => Some(atoms),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        self.phi(1.0)
    }

    pub fn ess_sup(&self) -> f64 {
        self.q(1.0)
    }

    /// Levels in `(0, 1)` where the quantile function has a kink or jump.
    pub fn level_breakpoints(&self) -> Vec<f64> {
        match &self.model {
            DensityModel::Uniform { .. } => vec![],
            DensityModel::PiecewiseLinearQuantile { knots, .. } => knots
                .iter()
                .map(|k| k.level)
                .filter(|t| *t > 0.0 && *t < 1.0)
                .collect(),
            DensityModel::EmpiricalDiscrete { .. } => {
                self.cum.iter().copied().filter(|t| *t > 0.0 && *t < 1.0).collect()
            }
        }
    }

    /// `F(x) = P[φ ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.model {
            DensityModel::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            DensityModel::PiecewiseLinearQuantile { knots, tail_rate } => {
                let idx = knots.partition_point(|k| k.value <= x);
                plq_level(knots, *tail_rate, idx, x)
            }
            DensityModel::EmpiricalDiscrete { atoms } => {
                let idx = atoms.partition_point(|a| a.value <= x);
                if idx == 0 {
                    0.0
                } else {
                    self.cum[idx - 1]
                }
            }
        }
    }

    /// `F(x−) = P[φ < x]`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.model {
            DensityModel::Uniform { .. } => self.cdf(x),
            DensityModel::PiecewiseLinearQuantile { knots, tail_rate } => {
                let idx = knots.partition_point(|k| k.value < x);
                plq_level(knots, *tail_rate, idx, x)
            }
            DensityModel::EmpiricalDiscrete { atoms } => {
                let idx = atoms.partition_point(|a| a.value < x);
                if idx == 0 {
                    0.0
                } else {
                    self.cum[idx - 1]
                }
            }
        }
    }

    /// Right-continuous quantile `q(t) = inf{x : F(x) > t}`; rejects `t ∉ [0, 1]`.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        check_level(t, "quantile")?;
        Ok(self.q(t))
    }

    pub(crate) fn q(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.model {
            DensityModel::Uniform { lo, hi } => lo + t.min(1.0) * (hi - lo),
            DensityModel::PiecewiseLinearQuantile { knots, tail_rate } => plq_quantile(knots, *tail_rate, t),
            DensityModel::EmpiricalDiscrete { atoms } => {
                let idx = self.cum.partition_point(|c| *c <= t);
                atoms[idx.min(atoms.len() - 1)].value
            }
        }
    }

    /// Left limit `q(t−) = inf{x : F(x) ≥ t}`.
    pub fn quantile_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.model {
            DensityModel::EmpiricalDiscrete { atoms } => {
                let idx = self.cum.partition_point(|c| *c < t);
                atoms[idx.min(atoms.len() - 1)].value
            }
            _ => self.q(t),
        }
    }

    /// Whether `q` is constant on a left neighbourhood of `t`.
    pub(crate) fn quantile_flat_left_of(&self, t: f64) -> bool {
        match &self.model {
            DensityModel::Uniform { .. } => false,
            DensityModel::EmpiricalDiscrete { .. } => true,
            DensityModel::PiecewiseLinearQuantile { knots, .. } => {
                let idx = knots.partition_point(|k| k.level < t);
                idx > 0 && idx < knots.len() && knots[idx].value == knots[idx - 1].value
            }
        }
    }

    /// `Φ(x) = ∫₀ˣ q(t) dt`; rejects `x ∉ [0, 1]`.
    pub fn capital_integral(&self, x: f64) -> Result<f64> {
        check_level(x, "capital_integral")?;
        Ok(self.phi(x))
    }

    pub(crate) fn phi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(1.0);
        match &self.model {
            DensityModel::Uniform { lo, hi } => lo * x + 0.5 * (hi - lo) * x * x,
            DensityModel::PiecewiseLinearQuantile { knots, tail_rate } => {
                let m = knots.len() - 1;
                if x >= knots[m].level {
                    let base = self.cum[m];
                    return match tail_rate {
                        None => base,
                        Some(rate) => {
                            let (tm, qm) = (knots[m].level, knots[m].value);
                            let s = (1.0 - x) / (1.0 - tm);
                            let s_log_s = if s > 0.0 { s * s.ln() } else { 0.0 };
                            base + qm * (x - tm) + (1.0 - tm) * (1.0 - s + s_log_s) / rate
                        }
                    };
                }
                let i = knots.partition_point(|k| k.level <= x) - 1;
                let (a, b) = (knots[i], knots[i + 1]);
                let slope = (b.value - a.value) / (b.level - a.level);
                let dx = x - a.level;
                self.cum[i] + a.value * dx + 0.5 * slope * dx * dx
            }
            DensityModel::EmpiricalDiscrete { atoms } => {
                let j = self.cum.partition_point(|c| *c <= x);
                if j >= atoms.len() {
                    return self.prefix[atoms.len()];
                }
                let start = if j == 0 { 0.0 } else { self.cum[j - 1] };
                self.prefix[j] + (x - start) * atoms[j].value
            }
        }
    }

    /// `E[φ; φ ≥ x]`.
    pub fn tail_capital(&self, x: f64) -> f64 {
        (self.phi(1.0) - self.phi(self.cdf_left(x.max(0.0)))).max(0.0)
    }

    /// `E[φ; φ ≤ x]`.
    pub fn lower_capital(&self, x: f64) -> f64 {
        self.phi(self.cdf(x))
    }

    /// The level `z_v` with `Φ(z_v) = 1 − v`.
    pub fn z_of_v(&self, v: f64) -> Result<f64> {
        self.require_continuous("z_of_v")?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("budget {v} outside [0, 1]")));
        }
        if v == 1.0 {
            return Ok(0.0);
        }
        if v == 0.0 {
            return Ok(1.0);
        }
        let target = 1.0 - v;
        let report = root_bracketed_report(
            |z| self.phi(z) - target,
            Bracket::new(0.0, 1.0)?,
            Z_TOL,
            Z_MAX_ITER,
        )?;
        Ok(report.root)
    }

    /// Checks the model invariants and reports every violation with its residual.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        match &self.model {
            DensityModel::Uniform { .. } => {}
            DensityModel::PiecewiseLinearQuantile { knots, .. } => {
                for (i, w) in knots.windows(2).enumerate() {
                    if w[1].value < w[0].value {
                        violations.push(Violation::NonMonotoneQuantile {
                            index: i + 1,
                            residual: w[0].value - w[1].value,
                        });
                    }
                }
                if knots[0].value <= 0.0 && knots[1].value <= 0.0 {
                    violations.push(Violation::NonPositiveAtom { index: 0, value: 0.0 });
                }
            }
            DensityModel::EmpiricalDiscrete { atoms } => {
                for (i, a) in atoms.iter().enumerate() {
                    if a.value <= 0.0 {
                        violations.push(Violation::NonPositiveAtom { index: i, value: a.value });
                    }
                    if a.prob <= 0.0 {
                        violations.push(Violation::NonPositiveProbability { index: i, prob: a.prob });
                    }
                }
                let sum: f64 = atoms.iter().map(|a| a.prob).sum();
                if (sum - 1.0).abs() > PROB_SUM_TOL {
                    violations.push(Violation::ProbabilitySum { sum, residual: sum - 1.0 });
                }
            }
        }
        let mean = self.mean();
        if (mean - 1.0).abs() > MEAN_TOL {
            violations.push(Violation::MeanNotOne { mean, residual: mean - 1.0 });
        }
        ValidationReport { violations }
    }
}

fn check_level(t: f64, op: &str) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{op}: level {t} outside [0, 1]")))
    }
}

/// Level reached by a PLQ model at value `x`, given the index of the first
/// knot not below (or not strictly below) `x`.
fn plq_level(knots: &[QuantileKnot], tail_rate: Option<f64>, idx: usize, x: f64) -> f64 {
    let m = knots.len() - 1;
    if idx == 0 {
        return 0.0;
    }
    if idx > m {
        return match tail_rate {
            None => 1.0,
            Some(rate) => 1.0 - (1.0 - knots[m].level) * (-rate * (x - knots[m].value)).exp(),
        };
    }
    let (a, b) = (knots[idx - 1], knots[idx]);
    if b.value <= a.value {
        return b.level;
    }
    (a.level + (x - a.value) / (b.value - a.value) * (b.level - a.level)).clamp(a.level, b.level)
}

fn plq_quantile(knots: &[QuantileKnot], tail_rate: Option<f64>, t: f64) -> f64 {
    let m = knots.len() - 1;
    if t >= knots[m].level {
        return match tail_rate {
            None => knots[m].value,
            Some(_) if t >= 1.0 => f64::INFINITY,
            Some(rate) => {
                let s = (1.0 - t) / (1.0 - knots[m].level);
                knots[m].value - s.ln() / rate
            }
        };
    }
    let i = knots.partition_point(|k| k.level <= t) - 1;
    let (a, b) = (knots[i], knots[i + 1]);
    a.value + (b.value - a.value) * (t - a.level) / (b.level - a.level)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    MeanNotOne { mean: f64, residual: f64 },
    NonMonotoneQuantile { index: usize, residual: f64 },
    NonPositiveAtom { index: usize, value: f64 },
    NonPositiveProbability { index: usize, prob: f64 },
    ProbabilitySum { sum: f64, residual: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidDensity(format!("{:?}", self.violations)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni() -> PriceDensity {
        PriceDensity::uniform(0.0, 2.0).unwrap()
    }

    fn two_atoms() -> PriceDensity {
        PriceDensity::empirical(&[(0.5, 0.5), (1.5, 0.5)]).unwrap()
    }

    #[test]
    fn uniform_cdf() {
        assert_eq!(uni().cdf(1.0), 0.5);
        assert_eq!(uni().cdf(0.0), 0.0);
    }

    #[test]
    fn discrete_cdf() {
        assert_eq!(two_atoms().cdf(1.0), 0.5);
        assert_eq!(two_atoms().cdf_left(1.5), 0.5);
        assert_eq!(two_atoms().cdf(1.5), 1.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(uni().quantile(0.5).unwrap(), 1.0);
        assert_eq!(uni().quantile(0.0).unwrap(), 0.0);
        assert_eq!(two_atoms().quantile(0.75).unwrap(), 1.5);
        assert_eq!(two_atoms().quantile(0.5).unwrap(), 1.5);
        assert_eq!(two_atoms().quantile_left(0.5), 0.5);
        assert!(uni().quantile(1.2).is_err());
        assert!(uni().quantile(-0.1).is_err());
    }

    #[test]
    fn capital_integral_examples() {
        assert!((uni().capital_integral(0.5).unwrap() - 0.25).abs() < 1e-15);
        for d in [uni(), two_atoms()] {
            assert!((d.capital_integral(1.0).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(d.capital_integral(0.0).unwrap(), 0.0);
        }
        assert!(uni().capital_integral(1.5).is_err());
    }

    #[test]
    fn tail_capital_examples() {
        // Oracle: summation over 200k equal-probability atoms of Uniform(0, 2).
        let n = 200_000;
        let oracle: f64 = (0..n)
            .map(|i| 2.0 * (i as f64 + 0.5) / n as f64)
            .filter(|x| *x >= 1.0)
            .sum::<f64>()
            / n as f64;
        assert!((oracle - 0.75).abs() < 1e-9);
        assert!((uni().tail_capital(1.0) - 0.75).abs() < 1e-15);
        assert_eq!(uni().tail_capital(0.0), 1.0);
        assert_eq!(uni().tail_capital(2.0), 0.0);
        assert_eq!(two_atoms().tail_capital(1.5), 0.75);
        assert_eq!(two_atoms().tail_capital(1.0), 0.75);
    }

    #[test]
    fn z_of_v_examples() {
        assert!((uni().z_of_v(0.75).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(uni().z_of_v(1.0).unwrap(), 0.0);
        assert_eq!(uni().z_of_v(0.0).unwrap(), 1.0);
        let z = uni().z_of_v(0.3).unwrap();
        assert!((uni().phi(z) - 0.7).abs() <= 1e-12);
        assert!(matches!(two_atoms().z_of_v(0.5), Err(Error::UnsupportedDensity(_))));
        assert!(uni().z_of_v(1.5).is_err());
    }

    #[test]
    fn validate_examples() {
        assert!(uni().validate().is_valid());
        let r = PriceDensity::uniform(0.0, 3.0).unwrap().validate();
        assert_eq!(r.violations.len(), 1);
        match &r.violations[0] {
            Violation::MeanNotOne { residual, .. } => assert!((residual - 0.5).abs() < 1e-15),
            v => panic!("unexpected {v:?}"),
        }
        let r = PriceDensity::empirical(&[(0.5, 0.45), (1.5, 0.45)]).unwrap().validate();
        assert!(r.violations.iter().any(|v| matches!(v, Violation::ProbabilitySum { .. })));
        let r = PriceDensity::empirical(&[(-0.5, 0.5), (2.5, 0.5)]).unwrap().validate();
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NonPositiveAtom { .. })));
        let r = PriceDensity::piecewise_linear(&[(0.0, 0.5), (0.5, 1.6), (1.0, 1.2)]).unwrap().validate();
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NonMonotoneQuantile { .. })));
    }

    #[test]
    fn structural_errors() {
        assert!(PriceDensity::uniform(1.0, 1.0).is_err());
        assert!(PriceDensity::piecewise_linear(&[(0.0, 1.0)]).is_err());
        assert!(PriceDensity::piecewise_linear(&[(0.1, 0.0), (1.0, 2.0)]).is_err());
        assert!(PriceDensity::piecewise_linear(&[(0.0, 0.0), (0.9, 2.0)]).is_err());
        assert!(PriceDensity::empirical(&[(1.5, 0.5), (0.5, 0.5)]).is_err());
        assert!(PriceDensity::piecewise_linear_with_tail(&[(0.0, 0.0), (1.0, 2.0)], 1.0).is_err());
    }

    #[test]
    fn plq_matches_uniform() {
        let d = PriceDensity::piecewise_linear(&[(0.0, 0.0), (0.3, 0.6), (1.0, 2.0)]).unwrap();
        let u = uni();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((d.q(t) - u.q(t)).abs() < 1e-14);
            assert!((d.phi(t) - u.phi(t)).abs() < 1e-14);
            let x = 2.0 * t;
            assert!((d.cdf(x) - u.cdf(x)).abs() < 1e-14);
        }
        assert!(d.is_continuous());
        assert!(d.validate().is_valid());
    }

    #[test]
    fn plq_flat_segment_is_an_atom() {
        let d = PriceDensity::piecewise_linear(&[(0.0, 0.5), (0.25, 1.0), (0.75, 1.0), (1.0, 1.0)]).unwrap();
        assert!(!d.is_continuous());
        assert_eq!(d.cdf(1.0), 1.0);
        assert!((d.cdf_left(1.0) - 0.25).abs() < 1e-15);
        assert!(d.quantile_flat_left_of(0.5));
    }

    #[test]
    fn exponential_tail_model() {
        // Uniform(0, 1) on [0, 0.5] then 0.5 + Exp(2): mean = 0.0625 + 0.5 * (0.5 + 0.5).
        let d = PriceDensity::piecewise_linear_with_tail(&[(0.0, 0.0), (0.5, 0.25)], 2.0).unwrap();
        let mean = 0.5 * 0.125 + 0.5 * (0.25 + 0.5);
        assert!((d.mean() - mean).abs() < 1e-14);
        assert_eq!(d.ess_sup(), f64::INFINITY);
        // q and F invert each other on the tail.
        for t in [0.6, 0.9, 0.999] {
            let x = d.q(t);
            assert!((d.cdf(x) - t).abs() < 1e-12);
        }
        // Φ on the tail against quadrature of q.
        let numeric = crate::numerics::integrate_adaptive(|t| d.q(t), 0.5, 0.95, 1e-13, &[]).unwrap();
        assert!((d.phi(0.95) - d.phi(0.5) - numeric).abs() < 1e-11);
    }
}
