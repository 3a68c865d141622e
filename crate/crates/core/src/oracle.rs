//! Brute-force reference solvers on discretized densities.
//!
//! Nothing here calls the closed-form or variational solvers; verification
//! compares the two only after both have run.

use serde::Serialize;

use crate::distribution::{Atom, PriceDensity};
use crate::error::{invalid, Error, Result};
use crate::numerics::{root_bracketed_report, Bracket};
use crate::risk::{LossFunction, Payoff, WeightFunction};
use crate::solvers::{solve, Measure, ProblemSpec};

/// Default solver-versus-oracle risk tolerance.
pub const VERIFY_TOL: f64 = 2e-3;
const BUDGET_TOL: f64 = 1e-13;

/// `n` equal-probability atoms at the cell-conditional means
/// `φ_i = n·(Φ(i/n) − Φ((i−1)/n))`, which keeps `E[φ]` exact. Atoms with equal
/// values (flat stretches of the quantile) are merged.
pub fn discretize(d: &PriceDensity, n: usize) -> Result<Vec<Atom>> {
    if n < 2 {
        return Err(invalid(format!("discretization needs n >= 2, got {n}")));
    }
    let p = 1.0 / n as f64;
    let mut atoms: Vec<Atom> = Vec::with_capacity(n);
    let mut prev = 0.0;
    for i in 1..=n {
        let cur = d.phi(i as f64 / n as f64);
        let value = (cur - prev) * n as f64;
        prev = cur;
        match atoms.last_mut() {
            Some(last) if last.value >= value => last.prob += p,
            _ => atoms.push(Atom { value, prob: p }),
        }
    }
    Ok(atoms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    atoms: Vec<Atom>,
    budget: f64,
    cap: f64,
    /// Cumulative probabilities: atom `i` covers levels `[cum[i], cum[i+1])`.
    cum: Vec<f64>,
}

impl DiscreteInstance {
    pub fn new(atoms: Vec<Atom>, budget: f64, cap: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("instance has no atoms"));
        }
        if atoms.iter().any(|a| !(a.value > 0.0 && a.prob > 0.0)) {
            return Err(invalid("atoms must have positive value and probability"));
        }
        if atoms.windows(2).any(|w| w[1].value <= w[0].value) {
            return Err(invalid("atoms must be strictly ascending"));
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        let mean: f64 = atoms.iter().map(|a| a.prob * a.value).sum();
        if (total - 1.0).abs() > 1e-12 || (mean - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDensity(format!("atoms have mass {total} and mean {mean}")));
        }
        if !(cap > 0.0 && (0.0..=cap).contains(&budget)) {
            return Err(invalid(format!("budget {budget} outside [0, {cap}]")));
        }
        let mut cum = vec![0.0];
        let mut acc = 0.0;
        for a in &atoms {
            acc += a.prob;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self { atoms, budget, cap, cum })
    }

    pub fn from_density(d: &PriceDensity, n: usize, budget: f64, cap: f64) -> Result<Self> {
        Self::new(discretize(d, n)?, budget, cap)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `Σ p_i φ_i x_i`.
    pub fn price(&self, levels: &[f64]) -> f64 {
        self.atoms.iter().zip(levels).map(|(a, x)| a.prob * a.value * x).sum()
    }

    /// Mass of `k` over each atom's quantile cell.
    pub fn cell_weights(&self, k: &WeightFunction) -> Vec<f64> {
        self.cum.windows(2).map(|c| k.gamma(c[1]) - k.gamma(c[0])).collect()
    }

    /// `(1/λ)·|cell_i ∩ [1−λ, 1)|` for each atom.
    pub fn tail_weights(&self, lambda: f64) -> Vec<f64> {
        let s = 1.0 - lambda;
        self.cum.windows(2).map(|c| (c[1] - c[0].max(s)).max(0.0) / lambda).collect()
    }

    /// The step payoff taking `levels[i]` at atom `i`.
    pub fn step_payoff(&self, levels: &[f64]) -> Payoff {
        Payoff::StepVector {
            breakpoints: self.atoms[1..].iter().map(|a| a.value).collect(),
            levels: levels.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub risk: f64,
    /// Claim level at each atom.
    pub levels: Vec<f64>,
    pub payoff: Payoff,
    pub budget_residual: f64,
}

/// `ρ_k` of a claim that is nondecreasing across atoms: `Σ x_i ∫_{cell_i} k`.
pub fn discrete_quantile_risk(inst: &DiscreteInstance, k: &WeightFunction, levels: &[f64]) -> Result<f64> {
    if levels.len() != inst.len() {
        return Err(invalid("one level per atom expected"));
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("levels must be nondecreasing across atoms"));
    }
    Ok(inst.cell_weights(k).iter().zip(levels).map(|(w, x)| w * x).sum())
}

/// Exhaustive search over claims `β·1_{J₀} + K·1_{J₁}` with `J₀ = [i, j)` and
/// `J₁ = [j, n)` in atom indices; `β` is fixed by the budget.
pub fn oracle_quantile_based(inst: &DiscreteInstance, k: &WeightFunction) -> Result<OracleSolution> {
    let n = inst.len();
    let v = inst.budget / inst.cap;
    let mut s = vec![0.0; n + 1];
    let mut g = vec![0.0; n + 1];
    for (i, (a, w)) in inst.atoms.iter().zip(inst.cell_weights(k)).enumerate() {
        s[i + 1] = s[i] + a.prob * a.value;
        g[i + 1] = g[i] + w;
    }
    let mut best: Option<(f64, usize, usize, f64)> = None;
    for i in 0..=n {
        for j in i..=n {
            let (s0, s1) = (s[j] - s[i], s[n] - s[j]);
            let beta = if s0 > 0.0 {
                (v - s1) / s0
            } else if (s1 - v).abs() <= BUDGET_TOL {
                0.0
            } else {
                continue;
            };
            if !(-1e-12..=1.0 + 1e-12).contains(&beta) {
                continue;
            }
            let beta = beta.clamp(0.0, 1.0);
            let risk = beta * (g[j] - g[i]) + g[n] - g[j];
            if best.is_none_or(|b| risk < b.0) {
                best = Some((risk, i, j, beta));
            }
        }
    }
    let (risk, i, j, beta) = best.ok_or_else(|| Error::Infeasible(format!("no two-step claim has price {v}")))?;
    let levels: Vec<f64> = (0..n)
        .map(|m| inst.cap * if m >= j { 1.0 } else if m >= i { beta } else { 0.0 })
        .collect();
    Ok(OracleSolution {
        risk: risk * inst.cap,
        budget_residual: inst.price(&levels) - inst.budget,
        payoff: inst.step_payoff(&levels),
        levels,
    })
}

/// Minimizes `Σ w_i ℓ(x_i)` over `0 <= x_1 <= … <= x_n <= K` with
/// `Σ p_i φ_i x_i = v`, where `w_i` is the tail weight of atom `i`.
///
/// For a multiplier `μ` the Lagrangian minimizer is found exactly by
/// pool-adjacent-violators: a pooled block `B` sits at `I(μ S_B / W_B)`
/// clamped to `[0, K]`. `μ` is then fixed by the budget.
pub fn oracle_robust(inst: &DiscreteInstance, loss: &LossFunction, lambda: f64) -> Result<OracleSolution> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid(format!("level λ must lie in (0, 1], got {lambda}")));
    }
    let w = inst.tail_weights(lambda);
    let s: Vec<f64> = inst.atoms.iter().map(|a| a.prob * a.value).collect();
    let finish = |levels: Vec<f64>| {
        let risk = w.iter().zip(&levels).map(|(wi, x)| wi * loss.value(*x)).sum();
        OracleSolution {
            risk,
            budget_residual: inst.price(&levels) - inst.budget,
            payoff: inst.step_payoff(&levels),
            levels,
        }
    };
    let v = inst.budget;
    if v == 0.0 || v == inst.cap {
        return Ok(finish(vec![v; inst.len()]));
    }
    let excess = |u: f64| inst.price(&pava_levels(&w, &s, loss, u.exp(), inst.cap)) - v;
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut step = 2.0;
    while excess(lo) > 0.0 {
        hi = lo;
        lo -= step;
        step *= 2.0;
        if lo < -700.0 {
            return Err(Error::NoBracket { lo, hi, f_lo: excess(lo), f_hi: excess(hi) });
        }
    }
    step = 2.0;
    while excess(hi) < 0.0 {
        lo = hi;
        hi += step;
        step *= 2.0;
        if hi > 700.0 {
            return Err(Error::NoBracket { lo, hi, f_lo: excess(lo), f_hi: excess(hi) });
        }
    }
    let r = root_bracketed_report(excess, Bracket::new(lo, hi)?, BUDGET_TOL, 100_000)?;
    Ok(finish(pava_levels(&w, &s, loss, r.root.exp(), inst.cap)))
}

fn pava_levels(w: &[f64], s: &[f64], loss: &LossFunction, mu: f64, cap: f64) -> Vec<f64> {
    struct Block {
        len: usize,
        w: f64,
        s: f64,
        x: f64,
    }
    let level = |w: f64, s: f64| if w > 0.0 { loss.inverse_derivative(mu * s / w) } else { f64::INFINITY };
    let mut blocks: Vec<Block> = Vec::with_capacity(w.len());
    for (wi, si) in w.iter().zip(s) {
        blocks.push(Block { len: 1, w: *wi, s: *si, x: level(*wi, *si) });
        while blocks.len() > 1 && blocks[blocks.len() - 2].x > blocks[blocks.len() - 1].x {
            let b = blocks.pop().unwrap();
            let a = blocks.last_mut().unwrap();
            a.len += b.len;
            a.w += b.w;
            a.s += b.s;
            a.x = level(a.w, a.s);
        }
    }
    blocks
        .iter()
        .flat_map(|b| std::iter::repeat_n(b.x.clamp(0.0, cap), b.len))
        .collect()
}

/// `AVaR_λ` of the claim `x` as the worst expectation over densities bounded
/// by `1/λ`: mass `λ` is poured onto the largest levels first.
pub fn oracle_avar_dual(inst: &DiscreteInstance, lambda: f64, x: &[f64]) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid(format!("level λ must lie in (0, 1], got {lambda}")));
    }
    if x.len() != inst.len() {
        return Err(invalid("one level per atom expected"));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| x[*b].total_cmp(&x[*a]));
    let mut left = lambda;
    let mut total = 0.0;
    for i in order {
        if left <= 0.0 {
            break;
        }
        let take = inst.atoms[i].prob.min(left);
        total += take * x[i];
        left -= take;
    }
    Ok(total / lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub solver_risk: f64,
    pub oracle_risk: f64,
    pub gap: f64,
    pub n_atoms: usize,
    /// Sup-distance between the solver payoff and the oracle levels on the atoms.
    pub payoff_distance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Solves `spec` and the matching oracle on `n` atoms and compares risks.
pub fn verify(spec: &ProblemSpec, n: usize, tolerance: f64) -> Result<VerificationReport> {
    let inst = DiscreteInstance::from_density(&spec.density, n, spec.budget, spec.cap)?;
    let oracle = match &spec.measure {
        Measure::Avar { lambda } => oracle_quantile_based(&inst, &WeightFunction::avar(*lambda)?)?,
        Measure::QuantileBased { weight } => oracle_quantile_based(&inst, weight)?,
        Measure::RobustUtility { loss, lambda } => oracle_robust(&inst, loss, *lambda)?,
        m => {
            return Err(invalid(format!(
                "verification supports avar, rho_k and robust measures, not {}",
                m.name()
            )))
        }
    };
    let sol = solve(spec)?;
    let payoff_distance = inst
        .atoms
        .iter()
        .zip(&oracle.levels)
        .map(|(a, x)| (sol.payoff.value(a.value) - x).abs())
        .fold(0.0, f64::max);
    let gap = (sol.risk - oracle.risk).abs();
    Ok(VerificationReport {
        solver_risk: sol.risk,
        oracle_risk: oracle.risk,
        gap,
        n_atoms: inst.len(),
        payoff_distance,
        tolerance,
        pass: gap <= tolerance,
    })
}
