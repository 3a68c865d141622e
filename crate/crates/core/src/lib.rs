//! Risk-minimal contingent claims under a budget constraint.
//!
//! Given a price density `φ` with `E[φ] = 1`, a cap `K` and a budget `v`, the
//! solvers find the claim `0 <= X <= K` with `E[φX] = v` that minimizes one of
//! several law-invariant risk measures: average value at risk, quantile-based
//! (spectral) measures, robust expected loss, its translation-invariant
//! variant, and value at risk. The [`oracle`] module solves discretized
//! versions of the same problems by brute force for cross-checking.

pub mod distribution;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod risk;
pub mod solvers;

pub use distribution::{Atom, DensityModel, PriceDensity};
pub use error::{Error, Result};
pub use risk::{LossFunction, Payoff, WeightFunction};
pub use solvers::{solve, Measure, ProblemSpec, Regime, Solution, SolverSettings};
