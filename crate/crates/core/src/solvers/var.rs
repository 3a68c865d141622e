use super::{degenerate, finish, params, Diagnostics, Measure, Regime, Solution};
use crate::distribution::PriceDensity;
use crate::error::{invalid, Result};
use crate::risk::Payoff;

/// VaR-minimal claim with cap 1.
///
/// With `q = q_φ(1−λ)`: if `z_v > 1−λ` the indicator of `{φ ≥ q(z_v)}` pays
/// out only on a set of probability below `λ` and has zero risk. Otherwise
/// the cheapest claim is `r` below `q` and 1 above, with `r` fixed by the budget.
pub fn solve_var(d: &PriceDensity, lambda: f64, v: f64) -> Result<Solution> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("VaR level must lie in (0, 1), got {lambda}")));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("budget {v} outside [0, 1]")));
    }
    d.require_continuous("solve_var")?;
    let measure = Measure::ValueAtRisk { lambda };
    if let Some(sol) = degenerate(&measure, d, v, 1.0)? {
        return Ok(sol);
    }
    let s = 1.0 - lambda;
    let q = d.q(s);
    let upper = d.phi(1.0) - d.phi(s);
    let z = d.z_of_v(v)?;
    let critical = Some(upper);
    if z > s {
        let b = d.q(z);
        let p = params([("z", z), ("quantile", q), ("r", 0.0), ("b", b)]);
        return finish(measure, d, Payoff::indicator(b, 1.0), v, Regime::Boundary, p, critical, Diagnostics::default());
    }
    let r = (v - upper) / (1.0 - upper);
    let p = params([("z", z), ("quantile", q), ("r", r), ("b", q)]);
    let payoff = Payoff::TwoStep { beta: r, a: 0.0, b: q, cap: 1.0 };
    finish(measure, d, payoff, v, Regime::Diversified, p, critical, Diagnostics::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni() -> PriceDensity {
        PriceDensity::uniform(0.0, 2.0).unwrap()
    }

    #[test]
    fn zero_risk_branch() {
        let s = solve_var(&uni(), 0.25, 0.3).unwrap();
        assert_eq!(s.risk, 0.0);
        assert_eq!(s.regime, Regime::Boundary);
        assert!((s.param("b").unwrap() - 2.0 * 0.7f64.sqrt()).abs() < 1e-11);
        assert!(s.budget_residual.abs() < 1e-12);
    }

    #[test]
    fn budget_branch() {
        let s = solve_var(&uni(), 0.25, 0.6).unwrap();
        let r = (0.6 - 0.4375) / 0.5625;
        assert!((s.risk - r).abs() < 1e-15);
        assert!((s.critical_value.unwrap() - 0.4375).abs() < 1e-15);
        assert!(s.budget_residual.abs() < 1e-15);
    }

    #[test]
    fn full_budget() {
        let s = solve_var(&uni(), 0.25, 1.0).unwrap();
        assert_eq!(s.payoff, Payoff::constant(1.0));
        assert_eq!(s.risk, 1.0);
    }
}
