//! Integrals over quantile levels of functions of `f(q(t))`.
//!
//! The level interval is split at every knot of the quantile function, every
//! piece start of the weight, and the levels where the payoff changes form.
//! On each cell where the payoff is flat the integral is the exact weight mass
//! times a constant; elsewhere adaptive Simpson is used.

use super::payoff::Payoff;
use super::weight::WeightFunction;
use crate::distribution::PriceDensity;
use crate::error::Result;
use crate::numerics::integrate_adaptive;

/// Absolute tolerance for quadrature on smooth cells.
pub const QUAD_TOL: f64 = 1e-12;
/// Upper truncation level for smooth cells reaching an unbounded quantile.
const TAIL_TRUNCATION: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, Copy)]
pub(crate) enum LevelWeight<'a> {
    /// `dt`
    Unit,
    /// `q(t) dt`
    Price,
    /// `k(t) dt`
    Weight(&'a WeightFunction),
}

impl LevelWeight<'_> {
    fn mass(&self, d: &PriceDensity, t0: f64, t1: f64) -> f64 {
        match self {
            Self::Unit => t1 - t0,
            Self::Price => d.phi(t1) - d.phi(t0),
            Self::Weight(k) => k.gamma(t1) - k.gamma(t0),
        }
    }

    fn density(&self, d: &PriceDensity, t: f64) -> f64 {
        match self {
            Self::Unit => 1.0,
            Self::Price => d.q(t),
            Self::Weight(k) => k.value(t),
        }
    }
}

/// `∫_lo^hi w(t) h(f(q(t))) dt`.
pub(crate) fn level_integral<H: Fn(f64) -> f64>(
    d: &PriceDensity,
    payoff: &Payoff,
    lo: f64,
    hi: f64,
    weight: LevelWeight<'_>,
    h: H,
) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts = vec![lo, hi];
    cuts.extend(d.level_breakpoints());
    if let LevelWeight::Weight(k) = weight {
        cuts.extend(k.breakpoints());
    }
    for x in payoff.kinks() {
        cuts.push(d.cdf_left(x));
        cuts.push(d.cdf(x));
    }
    cuts.retain(|t| *t >= lo && *t <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let unbounded = d.ess_sup().is_infinite();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        let xm = d.q(0.5 * (t0 + t1));
        if payoff.flat_at(xm) {
            total += h(payoff.value(xm)) * weight.mass(d, t0, t1);
        } else {
            let top = if unbounded && t1 >= 1.0 { TAIL_TRUNCATION.max(t0) } else { t1 };
            let g = |t: f64| weight.density(d, t) * h(payoff.value(d.q(t)));
            // Absolute tolerance for O(1) integrands, relative beyond that.
            let size = [t0, 0.5 * (t0 + top), top].iter().map(|&t| g(t).abs()).fold(0.0, f64::max);
            let tol = QUAD_TOL * (size * (top - t0)).max(1.0);
            total += integrate_adaptive(g, t0, top, tol, &[])?;
        }
    }
    Ok(total)
}
