use super::{degenerate, finish, finite_point, params, Diagnostics, Measure, Regime, Solution};
use crate::distribution::PriceDensity;
use crate::error::{invalid, Result};
use crate::numerics::{root_bracketed, Bracket};
use crate::risk::Payoff;

const Y_LAMBDA_TOL: f64 = 1e-14;
const ULP_POLISH: usize = 4;

/// The maximizer `y_λ` of `y ↦ (y + λ − 1)/Φ(y)` over `(0, 1]`.
///
/// When `ess sup φ > 1/λ` it is the interior root of
/// `q(y)(y + λ − 1) = Φ(y)`; otherwise the boundary point 1. Roots within
/// float resolution of 1 are reported as 1.
pub fn y_lambda(d: &PriceDensity, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("y_lambda needs λ in (0, 1), got {lambda}")));
    }
    d.require_continuous("y_lambda")?;
    let top = d.ess_sup();
    if top <= 1.0 / lambda {
        return Ok(1.0);
    }
    let h = |y: f64| d.q(y) * (y + lambda - 1.0) - d.phi(y);
    let mut hi = 1.0;
    if top.is_infinite() {
        hi = 1.0 - 1e-3;
        while h(hi) <= 0.0 {
            hi = 1.0 - (1.0 - hi) * 1e-3;
            if 1.0 - hi < 1e-15 {
                // The root lies closer to 1 than float resolution; so does
                // v_λ to 0.
                return Ok(1.0);
            }
        }
    }
    let y = root_bracketed(h, Bracket::new(1.0 - lambda, hi)?, Y_LAMBDA_TOL)?;
    // Polish to the float neighbour with the smallest residual.
    let (mut best, mut best_res) = (y, h(y).abs());
    let (mut down, mut up) = (y, y);
    for _ in 0..ULP_POLISH {
        down = down.next_down();
        up = up.next_up();
        for t in [down, up] {
            let r = h(t).abs();
            if r < best_res {
                (best, best_res) = (t, r);
            }
        }
    }
    Ok(best)
}

/// Closed-form AVaR-minimal claim with cap 1.
///
/// Below the critical budget `v_λ = 1 − Φ(y_λ)` the optimum is the classical
/// indicator of `{φ ≥ q(z_v)}`; above it, the floor `β*` on `[0, q(y_λ))`
/// plus full cap from `q(y_λ)` on.
pub fn solve_avar(d: &PriceDensity, lambda: f64, v: f64) -> Result<Solution> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid(format!("AVaR level must lie in (0, 1], got {lambda}")));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("budget {v} outside [0, 1]")));
    }
    d.require_continuous("solve_avar")?;
    let measure = Measure::Avar { lambda };
    if let Some(sol) = degenerate(&measure, d, v, 1.0)? {
        return Ok(sol);
    }
    let mut diagnostics = Diagnostics::default();

    if lambda == 1.0 {
        let z = d.z_of_v(v)?;
        let b = d.q(z);
        let p = params([("z", z), ("a", b), ("b", b), ("beta", 0.0)]);
        diagnostics.notes.push("λ = 1: expectation, no critical budget".into());
        let mut sol = finish(measure, d, Payoff::indicator(b, 1.0), v, Regime::Classical, p, None, diagnostics)?;
        sol.diagnostics.residual = (sol.risk - (1.0 - z)).abs();
        return Ok(sol);
    }

    let y = y_lambda(d, lambda)?;
    let phi_y = d.phi(y);
    let v_lambda = 1.0 - phi_y;
    let c_lambda = (y + lambda - 1.0) / phi_y;
    let mut p = params([("y_lambda", y), ("v_lambda", v_lambda), ("c_lambda", c_lambda)]);

    let (payoff, regime, formula) = if v <= v_lambda {
        let z = d.z_of_v(v)?;
        let b = d.q(z);
        p.extend(params([("z", z), ("beta", 0.0), ("a", b), ("b", b)]));
        (Payoff::indicator(b, 1.0), Regime::Classical, (1.0 - z) / lambda)
    } else {
        let beta = (v - 1.0 + phi_y) / phi_y;
        let b = finite_point(d.q(y));
        p.extend(params([("beta", beta), ("a", 0.0), ("b", b)]));
        (
            Payoff::TwoStep { beta, a: 0.0, b, cap: 1.0 },
            Regime::Diversified,
            1.0 - c_lambda * (1.0 - v) / lambda,
        )
    };
    p.insert("risk_formula".into(), formula);
    let mut sol = finish(measure, d, payoff, v, regime, p, Some(v_lambda), diagnostics)?;
    sol.diagnostics.residual = (sol.risk - formula).abs();
    Ok(sol)
}
