use super::{degenerate, finish, finite_point, params, Diagnostics, Measure, Regime, Solution, SolverSettings};
use crate::distribution::PriceDensity;
use crate::error::{invalid, Result};
use crate::numerics::{minimize_2d, SplitDomain};
use crate::risk::{Payoff, WeightFunction};

/// Floors within this distance of 0 or 1 make the claim an indicator.
const PURE_STEP_TOL: f64 = 1e-9;
const CORNER_TIE: f64 = 1e-13;

/// `ρ_k`-minimal claim with cap 1, with default search settings.
pub fn solve_quantile_based(d: &PriceDensity, k: &WeightFunction, v: f64) -> Result<Solution> {
    solve_quantile_based_with(d, k, v, &SolverSettings::default())
}

/// Minimizes `R(x, y) = β(x, y)[Γ(y) − Γ(x)] + 1 − Γ(y)` over
/// `0 <= x <= z_v <= y <= 1`, where `β(x, y)` is the floor on `[q(x), q(y))`
/// that makes the two-step claim meet the budget.
pub fn solve_quantile_based_with(
    d: &PriceDensity,
    k: &WeightFunction,
    v: f64,
    settings: &SolverSettings,
) -> Result<Solution> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("budget {v} outside [0, 1]")));
    }
    d.require_continuous("solve_quantile_based")?;
    let measure = Measure::QuantileBased { weight: k.clone() };
    if let Some(sol) = degenerate(&measure, d, v, 1.0)? {
        return Ok(sol);
    }
    let z = d.z_of_v(v)?;
    let corner = 1.0 - k.gamma(z);
    let beta_of = |x: f64, y: f64| {
        let phi_y = d.phi(y);
        (v - 1.0 + phi_y) / (phi_y - d.phi(x))
    };
    let objective = |x: f64, y: f64| {
        if x >= y {
            return corner;
        }
        beta_of(x, y) * (k.gamma(y) - k.gamma(x)) + 1.0 - k.gamma(y)
    };
    let domain = SplitDomain::new(z)?;
    let m = minimize_2d(objective, &domain, settings.grid_n, settings.refine_rounds);

    // Near the corner β is a ratio of vanishing differences; the corner
    // itself wins any tie with it.
    let at_corner = corner <= m.value + CORNER_TIE * (1.0 + corner.abs());
    let (x, y) = if at_corner { (z, z) } else { (m.x, m.y) };
    let mut p = params([("z", z), ("x_star", x), ("y_star", y)]);
    let beta = if x < y { beta_of(x, y).clamp(0.0, 1.0) } else { 0.0 };
    let (payoff, regime) = if x >= y || beta <= PURE_STEP_TOL || beta >= 1.0 - PURE_STEP_TOL {
        // An indicator: of {φ ≥ q(y)} when the floor vanishes, of {φ ≥ q(x)}
        // when it reaches the cap.
        let level = if x >= y {
            z
        } else if beta <= PURE_STEP_TOL {
            y
        } else {
            x
        };
        let b = finite_point(d.q(level));
        p.extend(params([("beta", 0.0), ("a", b), ("b", b)]));
        (Payoff::indicator(b, 1.0), Regime::Classical)
    } else {
        let (a, b) = (d.q(x), finite_point(d.q(y)));
        p.extend(params([("beta", beta), ("a", a), ("b", b)]));
        (Payoff::TwoStep { beta, a, b, cap: 1.0 }, Regime::Diversified)
    };
    p.insert("objective".into(), m.value);
    let diagnostics = Diagnostics {
        iterations: m.evaluations,
        flat_objective: m.flat,
        near_minimizers: m.near_minimizers.clone(),
        near_minimizer_count: m.near_minimizer_count,
        ..Diagnostics::default()
    };
    let mut sol = finish(measure, d, payoff, v, regime, p, None, diagnostics)?;
    sol.diagnostics.residual = (sol.risk - m.value).abs();
    Ok(sol)
}
