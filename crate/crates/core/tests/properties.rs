use proptest::prelude::*;
use riskclaim::oracle::{discretize, oracle_avar_dual, DiscreteInstance};
use riskclaim::risk::{self, hardy_littlewood_bounds, QuantileTable};
use riskclaim::solvers::{solve_avar, solve_robust_utility};
use riskclaim::{LossFunction, Payoff, PriceDensity, WeightFunction};

/// Piecewise-linear quantile density with mean 1 built from positive increments.
fn density() -> impl Strategy<Value = PriceDensity> {
    (0.0..0.5f64, prop::collection::vec((0.05..1.0f64, 0.05..2.0f64), 1..5)).prop_map(|(q0, steps)| {
        let total: f64 = steps.iter().map(|s| s.0).sum();
        let mut knots = vec![(0.0, q0)];
        let (mut t, mut q) = (0.0, q0);
        for (dt, dq) in steps {
            t += dt / total;
            q += dq;
            knots.push((t.min(1.0), q));
        }
        knots.last_mut().unwrap().0 = 1.0;
        let mean: f64 = knots.windows(2).map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1)).sum();
        let scaled: Vec<(f64, f64)> = knots.iter().map(|(t, q)| (*t, q / mean)).collect();
        PriceDensity::piecewise_linear(&scaled).unwrap()
    })
}

/// Nondecreasing step payoff in `[0, 1]` with breakpoints in `(0, 3)`.
fn step_payoff() -> impl Strategy<Value = Payoff> {
    prop::collection::vec((0.01..3.0f64, 0.0..1.0f64), 1..5).prop_map(|mut pts| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
        let breakpoints: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mut levels: Vec<f64> = pts.iter().map(|p| p.1).collect();
        levels.insert(0, 0.0);
        levels.sort_by(f64::total_cmp);
        Payoff::step_vector(breakpoints, levels).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_is_normalized_and_z_inverts_phi(d in density(), v in 0.01..0.99f64) {
        prop_assert!((d.mean() - 1.0).abs() < 1e-12);
        prop_assert!((d.capital_integral(1.0).unwrap() - 1.0).abs() < 1e-12);
        let z = d.z_of_v(v).unwrap();
        prop_assert!((d.capital_integral(z).unwrap() - (1.0 - v)).abs() < 1e-11);
    }

    #[test]
    fn quantile_and_cdf_are_consistent(d in density(), t in 0.01..0.99f64) {
        let x = d.quantile(t).unwrap();
        prop_assert!(d.cdf(x) >= t - 1e-12);
        prop_assert!(d.cdf_left(x) <= t + 1e-12);
    }

    #[test]
    fn discretization_keeps_mean(d in density(), n in 2usize..300) {
        let mean: f64 = discretize(&d, n).unwrap().iter().map(|a| a.prob * a.value).sum();
        prop_assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn avar_bounds_and_translation(d in density(), p in step_payoff(), lambda in 0.05..1.0f64, shift in 0.0..2.0f64) {
        let e = risk::expectation(&p, &d).unwrap();
        let a = risk::avar_risk(lambda, &p, &d).unwrap();
        let (lo, hi) = p.range();
        prop_assert!(a >= e - 1e-12 && a <= hi + 1e-12 && a >= lo - 1e-12);
        let moved = risk::avar_risk(lambda, &p.shifted_by(shift), &d).unwrap();
        prop_assert!((moved - a - shift).abs() < 1e-10);
    }

    #[test]
    fn avar_is_monotone_in_level(d in density(), p in step_payoff(), l1 in 0.05..1.0f64, l2 in 0.05..1.0f64) {
        let (small, large) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let a_small = risk::avar_risk(small, &p, &d).unwrap();
        let a_large = risk::avar_risk(large, &p, &d).unwrap();
        prop_assert!(a_small >= a_large - 1e-12);
    }

    #[test]
    fn quantile_risk_with_avar_weight_is_avar(d in density(), p in step_payoff(), lambda in 0.05..1.0f64) {
        let k = WeightFunction::avar(lambda).unwrap();
        let via_weight = risk::quantile_risk(&k, &p, &d).unwrap();
        let direct = risk::avar_risk(lambda, &p, &d).unwrap();
        prop_assert!((via_weight - direct).abs() < 1e-10);
    }

    #[test]
    fn two_level_risk_dominates_expectation(d in density(), p in step_payoff(), xi in 0.1..0.9f64, low in 0.0..1.0f64) {
        let k = WeightFunction::two_level(xi, low).unwrap();
        let r = risk::quantile_risk(&k, &p, &d).unwrap();
        prop_assert!(r >= risk::expectation(&p, &d).unwrap() - 1e-12);
    }

    #[test]
    fn robust_risk_dominates_loss_of_mean(d in density(), p in step_payoff(), lambda in 0.05..1.0f64, a in 0.2..3.0f64) {
        let loss = LossFunction::exponential(a).unwrap();
        let r = risk::robust_risk(&loss, lambda, &p, &d).unwrap();
        prop_assert!(r >= loss.value(risk::expectation(&p, &d).unwrap()) - 1e-12);
    }

    #[test]
    fn price_attains_comonotone_bound(d in density(), p in step_payoff()) {
        // X = f(φ) with f nondecreasing is comonotone with φ, so E[φX] is
        // the Hardy–Littlewood upper bound.
        let n = 400;
        let atoms = discretize(&d, n).unwrap();
        let phi: Vec<(f64, f64)> = atoms.iter().map(|a| (a.value, a.prob)).collect();
        let mut claim: Vec<(f64, f64)> = atoms.iter().map(|a| (p.value(a.value), a.prob)).collect();
        claim.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (lo, hi) = hardy_littlewood_bounds(
            &QuantileTable::from_atoms(&phi).unwrap(),
            &QuantileTable::from_atoms(&claim).unwrap(),
        );
        let priced: f64 = atoms.iter().map(|a| a.prob * a.value * p.value(a.value)).sum();
        prop_assert!((priced - hi).abs() < 1e-10);
        prop_assert!(lo <= priced + 1e-12);
    }

    #[test]
    fn avar_dual_matches_primal_on_atoms(d in density(), p in step_payoff(), lambda in 0.05..1.0f64) {
        let inst = DiscreteInstance::from_density(&d, 50, 0.5, 1.0).unwrap();
        let levels: Vec<f64> = inst.atoms().iter().map(|a| p.value(a.value)).collect();
        let dual = oracle_avar_dual(&inst, lambda, &levels).unwrap();
        let primal = risk::avar_risk(lambda, &inst.step_payoff(&levels), &PriceDensity::empirical(
            &inst.atoms().iter().map(|a| (a.value, a.prob)).collect::<Vec<_>>(),
        ).unwrap()).unwrap();
        prop_assert!((dual - primal).abs() < 1e-10, "dual {} primal {}", dual, primal);
    }

    #[test]
    fn avar_solution_binds_budget(d in density(), lambda in 0.1..0.95f64, v in 0.01..0.99f64) {
        let s = solve_avar(&d, lambda, v).unwrap();
        prop_assert!(s.budget_residual.abs() < 1e-9);
        prop_assert!((risk::price(&s.payoff, &d).unwrap() - v).abs() < 1e-9);
        prop_assert!(s.risk >= risk::expectation(&s.payoff, &d).unwrap() - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn robust_solution_binds_budget_and_beats_constant(d in density(), lambda in 0.2..1.0f64, v in 0.05..0.95f64) {
        let loss = LossFunction::power(2.0).unwrap();
        let s = solve_robust_utility(&d, &loss, lambda, v, 1.0).unwrap();
        prop_assert!(s.budget_residual.abs() < 1e-8);
        // The constant claim v is feasible, so it bounds the optimum.
        prop_assert!(s.risk <= loss.value(v) + 1e-9);
        prop_assert!(s.risk >= loss.value(risk::expectation(&s.payoff, &d).unwrap()) - 1e-12);
    }
}
