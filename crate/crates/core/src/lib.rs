//! Quantitative convergence-rate bounds for stochastically monotone Markov
//! chains.
//!
//! The library is organised around one pipeline:
//!
//! 1. [`poset`] — partial orders on finite ground sets and on the real line,
//!    with up-set machinery.
//! 2. [`finite`] — exact engine on finite posets: distributions, kernels,
//!    stochastic dominance, the partial-dominance coefficient, the
//!    order-Kolmogorov distance, and order-maximal Markov couplings built
//!    from exact max-flow solves.
//! 3. [`drift`] — geometric drift certificates `QV <= lambda*V + beta`, the
//!    derived contraction rate and small set, and the initial-mass
//!    functional.
//! 4. [`bounds`] — the coupling constant over the small set, the
//!    small-set-visit tail bound, and the main two-term convergence bound
//!    with per-horizon optimisation.
//! 5. [`srs`] — stochastic recursive sequences `X_{t+1} = F(X_t, W_{t+1})`
//!    on the real line, with seedable shock samplers, monotonicity testing,
//!    and Monte Carlo lower bounds for the coupling constant.
//! 6. [`empirics`] — exact and Monte Carlo verifiers: coupled-chain
//!    simulation, coupling-time tails, visit-count tails, the pointwise
//!    supermartingale check, and distance-vs-bound comparison tables.
//!
//! [`report`] holds the serialisable output types, and [`validate`] bundles
//! the randomised invariant suites used by the CLI self-test.

pub mod bounds;
pub mod drift;
pub mod empirics;
mod error;
pub mod finite;
mod flow;
pub mod poset;
pub mod report;
pub mod srs;
pub mod validate;

pub use error::{Error, Result};

/// Tolerance for probability-vector construction (entries sum to one).
pub const DIST_TOL: f64 = 1e-12;
/// Tolerance for solver-level equality assertions (duality, oracles).
pub const SOLVER_TOL: f64 = 1e-9;
/// Tolerance for Markov-coupling marginal checks.
pub const MARGINAL_TOL: f64 = 1e-10;
