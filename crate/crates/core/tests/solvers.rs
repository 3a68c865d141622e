use riskclaim::oracle::{verify, VERIFY_TOL};
use riskclaim::risk;
use riskclaim::solvers::{risk_curve, solve_var};
use riskclaim::{solve, Error, LossFunction, Measure, Payoff, PriceDensity, ProblemSpec, Regime, Solution, WeightFunction};

fn uni() -> PriceDensity {
    PriceDensity::uniform(0.0, 2.0).unwrap()
}

fn tail() -> PriceDensity {
    PriceDensity::piecewise_linear_with_tail(&[(0.0, 0.0), (0.5, 0.5)], 0.8).unwrap()
}

fn spec(measure: Measure, d: PriceDensity, v: f64, cap: f64) -> ProblemSpec {
    ProblemSpec::new(measure, d, v, cap).unwrap()
}

fn roundtrip(sol: &Solution, d: &PriceDensity, v: f64) {
    let text = serde_json::to_string(sol).unwrap();
    let back: Solution = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, sol);
    let risk = back.measure.risk(&back.payoff, d).unwrap();
    assert!((risk - sol.risk).abs() <= 1e-12, "{} vs {}", risk, sol.risk);
    let price = risk::price(&back.payoff, d).unwrap();
    assert!((price - v - sol.budget_residual).abs() <= 1e-12);
}

#[test]
fn avar_diversified_end_to_end() {
    let s = solve(&spec(Measure::Avar { lambda: 0.75 }, uni(), 0.9, 1.0)).unwrap();
    assert_eq!(s.regime, Regime::Diversified);
    assert!((s.param("beta").unwrap() - 0.6).abs() < 1e-12);
    assert!((s.risk - 13.0 / 15.0).abs() < 1e-12);
    roundtrip(&s, &uni(), 0.9);
}

#[test]
fn avar_scales_with_cap() {
    let unit = solve(&spec(Measure::Avar { lambda: 0.75 }, uni(), 0.45, 1.0)).unwrap();
    let double = solve(&spec(Measure::Avar { lambda: 0.75 }, uni(), 0.9, 2.0)).unwrap();
    assert!((double.risk - 2.0 * unit.risk).abs() < 1e-12);
    assert!(double.budget_residual.abs() < 1e-11);
}

#[test]
fn degenerate_budgets_are_constant() {
    for v in [0.0, 1.0] {
        let s = solve(&spec(Measure::Avar { lambda: 0.75 }, uni(), v, 1.0)).unwrap();
        assert_eq!(s.payoff, Payoff::constant(v));
        assert_eq!(s.risk, v);
        assert_eq!(s.regime, Regime::Boundary);
    }
}

#[test]
fn two_level_example_roundtrips() {
    let k = WeightFunction::two_level(0.6, 0.5).unwrap();
    let s = solve(&spec(Measure::QuantileBased { weight: k }, uni(), 0.7, 1.0)).unwrap();
    assert!(s.param("x_star").unwrap() > 0.01);
    roundtrip(&s, &uni(), 0.7);
}

#[test]
fn robust_on_unbounded_density_has_critical_split() {
    let loss = LossFunction::exponential(1.0).unwrap();
    let m = Measure::RobustUtility { loss: loss.clone(), lambda: 0.5 };
    let low = solve(&spec(m.clone(), tail(), 0.2, 1.0)).unwrap();
    let high = solve(&spec(m, tail(), 0.8, 1.0)).unwrap();
    assert_eq!(low.regime, Regime::Classical);
    assert_eq!(high.regime, Regime::Diversified);
    let beta = high.param("beta").unwrap();
    assert!(beta > 0.0 && beta < 0.8);
    assert!(low.param("c").unwrap() < high.param("c").unwrap());
    roundtrip(&high, &tail(), 0.8);
}

#[test]
fn shifted_solution_is_self_consistent() {
    let loss = LossFunction::exponential(1.0).unwrap();
    let m = Measure::Shifted { loss: loss.clone(), lambda: 0.5, x0: 1.0 };
    let s = solve(&spec(m, tail(), 0.3, 1.0)).unwrap();
    let r = risk::shifted_risk(&loss, 0.5, 1.0, &s.payoff, &tail()).unwrap();
    assert!((r - s.param("R").unwrap()).abs() < 1e-7);
    assert!(s.diagnostics.residual <= 1e-8);
}

#[test]
fn var_branches() {
    let s = solve_var(&uni(), 0.25, 0.3).unwrap();
    assert_eq!(s.risk, 0.0);
    let s = solve(&spec(Measure::ValueAtRisk { lambda: 0.25 }, uni(), 0.6, 1.0)).unwrap();
    assert!((s.risk - (0.6 - 0.4375) / 0.5625).abs() < 1e-12);
}

#[test]
fn discrete_density_is_rejected_by_solvers() {
    let atoms = PriceDensity::empirical(&[(0.5, 0.5), (1.5, 0.5)]).unwrap();
    let r = solve(&spec(Measure::Avar { lambda: 0.5 }, atoms, 0.5, 1.0));
    assert!(matches!(r, Err(Error::UnsupportedDensity(_))));
}

#[test]
fn verification_examples() {
    let r = verify(&spec(Measure::Avar { lambda: 0.75 }, uni(), 0.9, 1.0), 2000, VERIFY_TOL).unwrap();
    assert!(r.pass && r.gap <= 2e-3);
    let k = WeightFunction::linear(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
    let r = verify(&spec(Measure::QuantileBased { weight: k }, uni(), 0.7, 1.0), 500, VERIFY_TOL).unwrap();
    assert!(r.pass);
    assert!((r.solver_risk - 0.7).abs() < 1e-9 && (r.oracle_risk - 0.7).abs() < 1e-9);
    // Two atoms: the classical claim pays 2/3 on the upper atom, risk 4/9
    // against 0.3905 in the continuum.
    let r = verify(&spec(Measure::Avar { lambda: 0.75 }, uni(), 0.5, 1.0), 2, 1e-6).unwrap();
    assert!(!r.pass);
    assert!((r.oracle_risk - 4.0 / 9.0).abs() < 1e-12);
    let var = spec(Measure::ValueAtRisk { lambda: 0.25 }, uni(), 0.5, 1.0);
    assert!(verify(&var, 100, VERIFY_TOL).is_err());
}

#[test]
fn avar_curve_flips_regime_at_critical_budget() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let c = risk_curve(&spec(Measure::Avar { lambda: 0.75 }, uni(), 0.5, 1.0), &grid).unwrap();
    assert_eq!(c.failed, 0);
    assert!(c.strictly_increasing && c.convex == Some(true));
    for p in &c.points {
        let s = p.solution.as_ref().unwrap();
        let expected = if p.v == 0.0 || p.v == 1.0 {
            Regime::Boundary
        } else if p.v <= 0.75 {
            Regime::Classical
        } else {
            Regime::Diversified
        };
        assert_eq!(s.regime, expected, "v = {}", p.v);
    }
}

#[test]
fn var_curve_skips_convexity() {
    let grid = [0.1, 0.5, 0.9];
    let c = risk_curve(&spec(Measure::ValueAtRisk { lambda: 0.25 }, uni(), 0.5, 1.0), &grid).unwrap();
    assert_eq!(c.convex, None);
    assert!(c.monotone);
}

#[test]
fn curve_rejects_unsorted_grid() {
    let s = spec(Measure::Avar { lambda: 0.75 }, uni(), 0.5, 1.0);
    assert!(risk_curve(&s, &[0.5, 0.2]).is_err());
    assert!(risk_curve(&s, &[0.5, 1.5]).is_err());
}
