//! Optimal claims `0 <= X <= K` with price `E[φX] = v` for each risk measure.

mod avar;
mod curve;
mod quantile;
mod robust;
mod var;

pub use avar::{solve_avar, y_lambda};
pub use curve::{risk_curve, CurvePoint, CurveReport, CURVE_SLACK};
pub use quantile::{solve_quantile_based, solve_quantile_based_with};
pub use robust::{
    critical_value_robust, critical_value_robust_with, solve_robust_utility, solve_robust_utility_with,
    solve_shifted, solve_shifted_with,
};
pub use var::solve_var;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distribution::PriceDensity;
use crate::error::{invalid, Error, Result};
use crate::risk::{self, LossFunction, Payoff, WeightFunction};

/// The risk measure being minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    Avar { lambda: f64 },
    QuantileBased { weight: WeightFunction },
    RobustUtility { loss: LossFunction, lambda: f64 },
    Shifted { loss: LossFunction, lambda: f64, x0: f64 },
    ValueAtRisk { lambda: f64 },
}

impl Measure {
    /// `ρ(−f(φ))`.
    pub fn risk(&self, p: &Payoff, d: &PriceDensity) -> Result<f64> {
        match self {
            Self::Avar { lambda } => risk::avar_risk(*lambda, p, d),
            Self::QuantileBased { weight } => risk::quantile_risk(weight, p, d),
            Self::RobustUtility { loss, lambda } => risk::robust_risk(loss, *lambda, p, d),
            Self::Shifted { loss, lambda, x0 } => risk::shifted_risk(loss, *lambda, *x0, p, d),
            Self::ValueAtRisk { lambda } => risk::var_risk(*lambda, p, d),
        }
    }

    /// VaR is the only measure here without the convexity axiom.
    pub fn is_convex(&self) -> bool {
        !matches!(self, Self::ValueAtRisk { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Avar { .. } => "avar",
            Self::QuantileBased { .. } => "rho_k",
            Self::RobustUtility { .. } => "robust",
            Self::Shifted { .. } => "shifted",
            Self::ValueAtRisk { .. } => "var",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// A pure Neyman–Pearson indicator (or its capped-inverse analogue with no floor).
    Classical,
    /// A risk-free floor plus a classical part.
    Diversified,
    /// Degenerate budgets and the zero-risk VaR branch.
    Boundary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub flat_objective: bool,
    pub multimodal: bool,
    pub near_minimizers: Vec<(f64, f64)>,
    pub near_minimizer_count: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub measure: Measure,
    pub payoff: Payoff,
    pub risk: f64,
    pub budget_residual: f64,
    pub regime: Regime,
    pub params: BTreeMap<String, f64>,
    pub critical_value: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Coarse grid size per axis for the two-parameter search.
    pub grid_n: usize,
    pub refine_rounds: usize,
    /// Resolution of the outer search over the floor level.
    pub beta_tol: f64,
    /// Floors at or below this count as the classical regime.
    pub classical_beta: f64,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    pub damping: f64,
    pub shift_bracket: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_n: 400,
            refine_rounds: 40,
            beta_tol: 1e-9,
            classical_beta: 1e-9,
            fixed_point_tol: 1e-8,
            fixed_point_max_iter: 200,
            damping: 0.5,
            shift_bracket: risk::SHIFT_BRACKET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub measure: Measure,
    pub density: PriceDensity,
    pub budget: f64,
    pub cap: f64,
    pub settings: SolverSettings,
}

impl ProblemSpec {
    pub fn new(measure: Measure, density: PriceDensity, budget: f64, cap: f64) -> Result<Self> {
        density.validate().into_result()?;
        check_budget(budget, cap)?;
        Ok(Self { measure, density, budget, cap, settings: SolverSettings::default() })
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        check_budget(budget, self.cap)?;
        Ok(Self { budget, ..self.clone() })
    }
}

fn check_budget(v: f64, cap: f64) -> Result<()> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(invalid(format!("cap must be positive, got {cap}")));
    }
    if !(0.0..=cap).contains(&v) {
        return Err(invalid(format!("budget {v} outside [0, {cap}]")));
    }
    Ok(())
}

/// Runs the solver matching `spec.measure`.
pub fn solve(spec: &ProblemSpec) -> Result<Solution> {
    let (d, v, cap) = (&spec.density, spec.budget, spec.cap);
    check_budget(v, cap)?;
    d.require_continuous("solve")?;
    if let Some(sol) = degenerate(&spec.measure, d, v, cap)? {
        return Ok(sol);
    }
    let s = &spec.settings;
    match &spec.measure {
        Measure::Avar { lambda } => scaled(solve_avar(d, *lambda, v / cap)?, d, cap),
        Measure::QuantileBased { weight } => scaled(solve_quantile_based_with(d, weight, v / cap, s)?, d, cap),
        Measure::ValueAtRisk { lambda } => scaled(solve_var(d, *lambda, v / cap)?, d, cap),
        Measure::RobustUtility { loss, lambda } => solve_robust_utility_with(d, loss, *lambda, v, cap, s),
        Measure::Shifted { loss, lambda, x0 } => solve_shifted_with(d, loss, *lambda, v, *x0, cap, s),
    }
}

/// `v ∈ {0, K}` admits only the constant claim.
fn degenerate(measure: &Measure, d: &PriceDensity, v: f64, cap: f64) -> Result<Option<Solution>> {
    if v != 0.0 && v != cap {
        return Ok(None);
    }
    let mut params = BTreeMap::new();
    params.insert("level".to_string(), v);
    finish(measure.clone(), d, Payoff::constant(v), v, Regime::Boundary, params, None, Diagnostics::default())
        .map(Some)
}

/// Evaluates risk and budget residual of a candidate and packs the solution.
#[allow(clippy::too_many_arguments)]
fn finish(
    measure: Measure,
    d: &PriceDensity,
    payoff: Payoff,
    v: f64,
    regime: Regime,
    params: BTreeMap<String, f64>,
    critical_value: Option<f64>,
    diagnostics: Diagnostics,
) -> Result<Solution> {
    let risk = measure.risk(&payoff, d)?;
    let budget_residual = risk::price(&payoff, d)? - v;
    Ok(Solution { measure, payoff, risk, budget_residual, regime, params, critical_value, diagnostics })
}

/// Rescales a unit-cap solution to cap `K` (all measures involved are
/// positively homogeneous).
fn scaled(mut sol: Solution, d: &PriceDensity, cap: f64) -> Result<Solution> {
    if cap == 1.0 {
        return Ok(sol);
    }
    sol.payoff = match sol.payoff {
        Payoff::Constant { level } => Payoff::Constant { level: level * cap },
        Payoff::TwoStep { beta, a, b, cap: c } => Payoff::TwoStep { beta: beta * cap, a, b, cap: c * cap },
        other => return Err(Error::InvalidParameter(format!("cannot rescale payoff {other:?}"))),
    };
    for name in ["beta", "r"] {
        if let Some(b) = sol.params.get_mut(name) {
            *b *= cap;
        }
    }
    sol.critical_value = sol.critical_value.map(|c| c * cap);
    sol.risk = sol.measure.risk(&sol.payoff, d)?;
    sol.budget_residual *= cap;
    Ok(sol)
}

/// Replaces an infinite breakpoint by `f64::MAX` (never reached by `φ`) so
/// that payoffs stay JSON-representable.
fn finite_point(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

fn params<const N: usize>(entries: [(&str, f64); N]) -> BTreeMap<String, f64> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
