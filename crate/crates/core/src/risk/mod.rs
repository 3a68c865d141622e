//! Law-invariant risk measures evaluated on payoffs `X = f(φ)`.
//!
//! Every evaluator works in level space: for nondecreasing `f` the quantile
//! function of `f(φ)` is `f ∘ q_φ` almost everywhere.

mod integrate;
pub mod loss;
pub mod payoff;
pub mod rearrangement;
pub mod weight;

pub use loss::LossFunction;
pub use payoff::Payoff;
pub use rearrangement::{hardy_littlewood_bounds, QuantileTable};
pub use weight::{WeightFunction, WeightPiece};

pub(crate) use integrate::{level_integral, LevelWeight};

use crate::distribution::PriceDensity;
use crate::error::{invalid, Error, Result};
use crate::numerics::{root_bracketed, Bracket};

/// Default half-width added around the payoff range when bracketing the
/// translation-invariant risk.
pub const SHIFT_BRACKET: f64 = 50.0;
const SHIFT_TOL: f64 = 1e-13;

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("level λ must lie in (0, 1], got {lambda}")))
    }
}

/// `E[φ f(φ)]`.
pub fn price(p: &Payoff, d: &PriceDensity) -> Result<f64> {
    level_integral(d, p, 0.0, 1.0, LevelWeight::Price, |x| x)
}

/// `E[f(φ)]`.
pub fn expectation(p: &Payoff, d: &PriceDensity) -> Result<f64> {
    level_integral(d, p, 0.0, 1.0, LevelWeight::Unit, |x| x)
}

/// `AVaR_λ(−X) = (1/λ) ∫_{1−λ}^1 q_X(t) dt`.
pub fn avar_risk(lambda: f64, p: &Payoff, d: &PriceDensity) -> Result<f64> {
    check_lambda(lambda)?;
    if let Payoff::Constant { level } = p {
        return Ok(*level);
    }
    Ok(level_integral(d, p, 1.0 - lambda, 1.0, LevelWeight::Unit, |x| x)? / lambda)
}

/// `ρ_k(−X) = ∫₀¹ k(t) q_X(t) dt = E[g_k(φ) f(φ)]`.
pub fn quantile_risk(k: &WeightFunction, p: &Payoff, d: &PriceDensity) -> Result<f64> {
    if let Payoff::Constant { level } = p {
        return Ok(*level);
    }
    level_integral(d, p, 0.0, 1.0, LevelWeight::Weight(k), |x| x)
}

/// `ρ_λ(−X) = (1/λ) E[ℓ(f(φ)); φ ≥ q_φ(1−λ)]`.
pub fn robust_risk(loss: &LossFunction, lambda: f64, p: &Payoff, d: &PriceDensity) -> Result<f64> {
    check_lambda(lambda)?;
    d.require_continuous("robust_risk")?;
    robust_tail(loss, lambda, p, d)
}

pub(crate) fn robust_tail(loss: &LossFunction, lambda: f64, p: &Payoff, d: &PriceDensity) -> Result<f64> {
    if let Payoff::Constant { level } = p {
        return Ok(loss.value(*level));
    }
    Ok(level_integral(d, p, 1.0 - lambda, 1.0, LevelWeight::Unit, |x| loss.value(x))? / lambda)
}

/// `ρ̂_λ(−X)`: the `m` with `(1/λ) E[ℓ(f(φ) − m); φ ≥ q_φ(1−λ)] = x₀`.
pub fn shifted_risk(loss: &LossFunction, lambda: f64, x0: f64, p: &Payoff, d: &PriceDensity) -> Result<f64> {
    shifted_risk_with_bracket(loss, lambda, x0, p, d, SHIFT_BRACKET)
}

pub fn shifted_risk_with_bracket(
    loss: &LossFunction,
    lambda: f64,
    x0: f64,
    p: &Payoff,
    d: &PriceDensity,
    bound: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    d.require_continuous("shifted_risk")?;
    if !loss.defined_on_reals() {
        return Err(invalid("translation-invariant risk needs a loss defined on all reals"));
    }
    if !loss.is_interior_value(x0) {
        return Err(invalid(format!("x0 = {x0} is not interior to the range of the loss")));
    }
    if let Payoff::Constant { level } = p {
        return Ok(level - loss.inverse(x0));
    }
    let (lo, hi) = p.range();
    let excess = |m: f64| -> f64 {
        match robust_tail(&loss.shifted(m), lambda, p, d) {
            Ok(v) => v - x0,
            Err(_) => f64::NAN,
        }
    };
    root_bracketed(excess, Bracket::new(lo - bound, hi + bound)?, SHIFT_TOL)
}

/// `VaR_λ(−X) = inf{m : P[X > m] ≤ λ}`, the lower `(1−λ)`-quantile of `X`.
pub fn var_risk(lambda: f64, p: &Payoff, d: &PriceDensity) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("VaR level must lie in (0, 1), got {lambda}")));
    }
    let s = 1.0 - lambda;
    if d.quantile_flat_left_of(s) {
        Ok(p.value(d.quantile_left(s)))
    } else {
        Ok(p.left_limit(d.q(s)))
    }
}

/// `g_k(x)` for the given density; see [`WeightFunction::g_k_value`].
pub fn g_k_value(d: &PriceDensity, k: &WeightFunction, x: f64) -> f64 {
    k.g_k_value(d, x)
}

/// `λ·max(x, q_φ(y_λ))`, the Huber–Strassen derivative of the priced measure
/// against the AVaR capacity.
pub fn huber_strassen_pi(d: &PriceDensity, lambda: f64, x: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) || d.ess_sup() <= 1.0 / lambda {
        return Err(Error::InvalidParameter(format!(
            "Huber–Strassen density needs ess sup φ > 1/λ (λ = {lambda})"
        )));
    }
    let y = crate::solvers::y_lambda(d, lambda)?;
    Ok(lambda * x.max(d.q(y)))
}
