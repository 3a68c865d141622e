//! Robust-utility (`ρ_λ`) and translation-invariant (`ρ̂_λ`) problems.
//!
//! The optimal claim is a floor `β` below `q = q_φ(1−λ)` and
//! `β ∨ I(cφ) ∧ K` above it. For fixed `β` the multiplier `c` is pinned by the
//! budget; `β` itself minimizes the tail loss `L(β) = ∫_{1−λ}^1 ℓ(f_β(q(t))) dt`.

use super::{degenerate, finish, params, Diagnostics, Measure, Regime, Solution, SolverSettings};
use crate::distribution::PriceDensity;
use crate::error::{invalid, Error, Result};
use crate::numerics::{minimize_1d, root_bracketed_report, Bracket};
use crate::risk::{self, level_integral, LevelWeight, LossFunction, Payoff};

const BUDGET_TOL: f64 = 1e-13;
/// Doublings of `ln c` tried when bracketing the budget multiplier.
const MAX_EXPANSIONS: usize = 6;
const DENSE_STEP: f64 = 1e-3;
const CRITICAL_BETA: f64 = 1e-7;
const CRITICAL_WIDTH: f64 = 1e-5;

struct Tail<'a> {
    d: &'a PriceDensity,
    loss: &'a LossFunction,
    lambda: f64,
    v: f64,
    cap: f64,
    /// `E[φ; φ < q]`
    lower: f64,
    /// `E[φ; φ ≥ q]`
    upper: f64,
}

/// Tail claim for a given floor.
enum Inner {
    /// `f ≡ β`: the floor absorbs the whole budget.
    Flat,
    /// `f = β` below `q`, `K` above.
    Full,
    Interior { c: f64, payoff: Payoff, residual: f64, iterations: usize },
}

impl<'a> Tail<'a> {
    fn new(d: &'a PriceDensity, loss: &'a LossFunction, lambda: f64, v: f64, cap: f64) -> Self {
        let s = 1.0 - lambda;
        let lower = d.phi(s);
        Self { d, loss, lambda, v, cap, lower, upper: d.phi(1.0) - lower }
    }

    fn beta_min(&self) -> f64 {
        if self.lower <= 0.0 {
            0.0
        } else {
            ((self.v - self.cap * self.upper) / self.lower).max(0.0)
        }
    }

    fn payoff(&self, beta: f64, c: f64) -> Payoff {
        Payoff::CappedInverse {
            beta,
            c,
            y: self.loss.derivative(beta) / c,
            cap: self.cap,
            loss: self.loss.clone(),
        }
    }

    fn tail_price(&self, p: &Payoff) -> Result<f64> {
        level_integral(self.d, p, 1.0 - self.lambda, 1.0, LevelWeight::Price, |x| x)
    }

    fn inner(&self, beta: f64) -> Result<Inner> {
        let target = self.v - beta * self.lower;
        if target <= beta * self.upper * (1.0 + 1e-15) {
            return Ok(Inner::Flat);
        }
        if target >= self.cap * self.upper * (1.0 - 1e-15) {
            return Ok(Inner::Full);
        }
        let excess = |u: f64| match self.tail_price(&self.payoff(beta, u.exp())) {
            Ok(p) => p - target,
            Err(_) => f64::NAN,
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut step = 2.0;
        let mut expansions = 0;
        while excess(lo) > 0.0 {
            hi = lo;
            lo -= step;
            step *= 2.0;
            expansions += 1;
            if expansions > MAX_EXPANSIONS {
                return Ok(Inner::Flat);
            }
        }
        step = 2.0;
        expansions = 0;
        while excess(hi) < 0.0 {
            lo = hi;
            hi += step;
            step *= 2.0;
            expansions += 1;
            if expansions > MAX_EXPANSIONS {
                return Ok(Inner::Full);
            }
        }
        let r = root_bracketed_report(excess, Bracket::new(lo, hi)?, BUDGET_TOL, 200)?;
        let c = r.root.exp();
        Ok(Inner::Interior { c, payoff: self.payoff(beta, c), residual: r.residual, iterations: r.iterations })
    }

    /// `L(β)`; the two degenerate tails have closed forms.
    fn tail_loss(&self, beta: f64) -> Result<f64> {
        match self.inner(beta)? {
            Inner::Flat => Ok(self.lambda * self.loss.value(beta)),
            Inner::Full => Ok(self.lambda * self.loss.value(self.cap)),
            Inner::Interior { payoff, .. } => {
                level_integral(self.d, &payoff, 1.0 - self.lambda, 1.0, LevelWeight::Unit, |x| self.loss.value(x))
            }
        }
    }
}

/// True when `φ ≤ 1/λ` almost surely.
fn constant_is_optimal(d: &PriceDensity, lambda: f64) -> bool {
    d.ess_sup() * lambda <= 1.0 + 1e-12
}

fn check_inputs(d: &PriceDensity, lambda: f64, v: f64, cap: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid(format!("level λ must lie in (0, 1], got {lambda}")));
    }
    if !(cap.is_finite() && cap > 0.0) {
        return Err(invalid(format!("cap must be positive, got {cap}")));
    }
    if !(0.0..=cap).contains(&v) {
        return Err(invalid(format!("budget {v} outside [0, {cap}]")));
    }
    d.require_continuous("robust solver")
}

pub fn solve_robust_utility(d: &PriceDensity, loss: &LossFunction, lambda: f64, v: f64, cap: f64) -> Result<Solution> {
    solve_robust_utility_with(d, loss, lambda, v, cap, &SolverSettings::default())
}

/// `ρ_λ`-minimal claim: outer search over the floor `β ∈ [β_min, v]`, inner
/// budget root for `c`.
pub fn solve_robust_utility_with(
    d: &PriceDensity,
    loss: &LossFunction,
    lambda: f64,
    v: f64,
    cap: f64,
    settings: &SolverSettings,
) -> Result<Solution> {
    check_inputs(d, lambda, v, cap)?;
    let measure = Measure::RobustUtility { loss: loss.clone(), lambda };
    if let Some(sol) = degenerate(&measure, d, v, cap)? {
        return Ok(sol);
    }
    if constant_is_optimal(d, lambda) {
        // The pricing measure itself lies in the λ-scenario set, so by Jensen
        // ρ_λ(−X) ≥ ℓ(E[φX]) = ℓ(v) for every feasible X.
        let mut diagnostics = Diagnostics::default();
        diagnostics.notes.push(format!("ess sup φ <= 1/λ: the constant claim {v} is optimal"));
        let p = params([("beta", v), ("quantile", d.q(1.0 - lambda)), ("tail_loss", lambda * loss.value(v))]);
        return finish(measure, d, Payoff::constant(v), v, Regime::Diversified, p, None, diagnostics);
    }
    let tail = Tail::new(d, loss, lambda, v, cap);
    let beta_min = tail.beta_min();
    if beta_min >= v {
        return Err(Error::Infeasible(format!("budget {v} cannot be met below cap {cap}")));
    }

    let objective = |beta: f64| tail.tail_loss(beta).unwrap_or(f64::INFINITY);
    let mut best = if lambda == 1.0 {
        // Without a quantile split the floor only constrains; β = 0 is optimal.
        crate::numerics::Min1d { x: 0.0, value: objective(0.0), multimodal: false, evaluations: 1 }
    } else {
        minimize_1d(objective, beta_min, v, settings.beta_tol)
    };
    let mut diagnostics = Diagnostics { iterations: best.evaluations, ..Diagnostics::default() };
    if best.multimodal {
        // Fall back to a dense scan, then refine around its best cell.
        diagnostics.multimodal = true;
        let n = ((v - beta_min) / DENSE_STEP).ceil().max(1.0) as usize;
        let grid = crate::numerics::linspace(beta_min, v, n + 1);
        let (mut bx, mut bv) = (grid[0], objective(grid[0]));
        for &b in &grid[1..] {
            let val = objective(b);
            if val < bv {
                (bx, bv) = (b, val);
            }
        }
        let refined = minimize_1d(objective, (bx - DENSE_STEP).max(beta_min), (bx + DENSE_STEP).min(v), settings.beta_tol);
        diagnostics.iterations += n + 1 + refined.evaluations;
        diagnostics.notes.push("tail loss not unimodal in the floor level; dense scan used".into());
        if refined.value < best.value {
            best = refined;
        }
    }

    let beta = best.x;
    let mut p = params([("beta", beta), ("quantile", d.q(1.0 - lambda)), ("tail_loss", best.value)]);
    let payoff = match tail.inner(beta)? {
        Inner::Interior { c, payoff, residual, iterations } => {
            p.insert("c".into(), c);
            p.insert("y".into(), loss.derivative(beta) / c);
            diagnostics.residual = residual;
            diagnostics.iterations += iterations;
            payoff
        }
        Inner::Flat => {
            diagnostics.notes.push("floor absorbs the whole budget".into());
            Payoff::constant(v)
        }
        Inner::Full => {
            return Err(Error::NonConvergence {
                context: "floor search ended with a saturated tail".into(),
                iterations: diagnostics.iterations,
                residual: best.value,
            })
        }
    };
    let regime = if beta <= settings.classical_beta { Regime::Classical } else { Regime::Diversified };
    finish(measure, d, payoff, v, regime, p, None, diagnostics)
}

pub fn critical_value_robust(d: &PriceDensity, loss: &LossFunction, lambda: f64, cap: f64) -> Result<f64> {
    critical_value_robust_with(d, loss, lambda, cap, &SolverSettings::default())
}

/// Budget above which the `ρ_λ`-optimal claim carries a positive floor,
/// by bisection on `v ∈ (0, K·E[φ; φ ≥ q])`.
pub fn critical_value_robust_with(
    d: &PriceDensity,
    loss: &LossFunction,
    lambda: f64,
    cap: f64,
    settings: &SolverSettings,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("critical value needs λ in (0, 1), got {lambda}")));
    }
    check_inputs(d, lambda, 0.0, cap)?;
    if constant_is_optimal(d, lambda) {
        return Ok(0.0);
    }
    let bound = cap * (d.phi(1.0) - d.phi(1.0 - lambda));
    let (mut lo, mut hi) = (0.0, bound);
    while hi - lo > CRITICAL_WIDTH {
        let mid = 0.5 * (lo + hi);
        let sol = solve_robust_utility_with(d, loss, lambda, mid, cap, settings)?;
        if sol.param("beta").unwrap_or(0.0) > CRITICAL_BETA {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    if v >= bound {
        return Err(Error::NonConvergence {
            context: "critical value reached the tail-capacity bound".into(),
            iterations: 0,
            residual: bound - v,
        });
    }
    Ok(v)
}

pub fn solve_shifted(
    d: &PriceDensity,
    loss: &LossFunction,
    lambda: f64,
    v: f64,
    x0: f64,
    cap: f64,
) -> Result<Solution> {
    solve_shifted_with(d, loss, lambda, v, x0, cap, &SolverSettings::default())
}

/// `ρ̂_λ`-minimal claim by damped fixed-point iteration on the risk level
/// `R`: solve the `ρ_λ` problem for the loss `ℓ(· − R)`, re-evaluate `ρ̂_λ`
/// of the result, relax towards it.
pub fn solve_shifted_with(
    d: &PriceDensity,
    loss: &LossFunction,
    lambda: f64,
    v: f64,
    x0: f64,
    cap: f64,
    settings: &SolverSettings,
) -> Result<Solution> {
    check_inputs(d, lambda, v, cap)?;
    if !loss.defined_on_reals() {
        return Err(invalid("translation-invariant risk needs a loss defined on all reals"));
    }
    if !loss.is_interior_value(x0) {
        return Err(invalid(format!("x0 = {x0} is not interior to the range of the loss")));
    }
    let measure = Measure::Shifted { loss: loss.clone(), lambda, x0 };
    if let Some(sol) = degenerate(&measure, d, v, cap)? {
        return Ok(sol);
    }
    let evaluate = |p: &Payoff| risk::shifted_risk_with_bracket(loss, lambda, x0, p, d, settings.shift_bracket);

    let start = Payoff::indicator(d.q(d.z_of_v(v / cap)?), cap);
    let mut level = evaluate(&start)?;
    let mut residual = f64::INFINITY;
    for iter in 1..=settings.fixed_point_max_iter {
        let inner = solve_robust_utility_with(d, &loss.shifted(level), lambda, v, cap, settings)?;
        let next = evaluate(&inner.payoff)?;
        residual = (next - level).abs();
        if residual <= settings.fixed_point_tol {
            let get = |k: &str| inner.param(k).unwrap_or(f64::NAN);
            let p = params([("alpha", get("beta")), ("gamma", get("c")), ("z", get("y")), ("R", next)]);
            let diagnostics = Diagnostics { iterations: iter, residual, ..inner.diagnostics };
            let mut sol = finish(measure, d, inner.payoff, v, inner.regime, p, None, diagnostics)?;
            sol.params.retain(|_, x| !x.is_nan());
            return Ok(sol);
        }
        level += settings.damping * (next - level);
    }
    Err(Error::NonConvergence {
        context: "shifted-risk fixed point".into(),
        iterations: settings.fixed_point_max_iter,
        residual,
    })
}
