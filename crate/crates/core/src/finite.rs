//! Exact engine on finite posets: distributions, kernels, stochastic
//! dominance, the partial-dominance coefficient, the order-Kolmogorov
//! distance, and order-maximal Markov couplings.
//!
//! Everything here is exact up to input rounding: optimal transport values
//! come from integer max-flow on scaled capacities, and up-set optimisation
//! switches from exhaustive enumeration to a min-cut closure solve when the
//! ground set is too large to enumerate.

use std::io::Write;

use rayon::prelude::*;

use crate::flow::{self, FlowNetwork, INF_CAP};
use crate::poset::{FinitePoset, MAX_ENUM_STATES};
use crate::{Error, Result, DIST_TOL};

/// A probability vector indexed by the states of a poset.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    p: Vec<f64>,
}

impl FiniteDist {
    /// Validate nonnegativity and normalisation (within [`DIST_TOL`]).
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        for (i, &w) in p.iter().enumerate() {
            if w < -DIST_TOL || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is {w}, expected a nonnegative weight"
                )));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > DIST_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1 within {DIST_TOL}"
            )));
        }
        let p = p.into_iter().map(|w| w.max(0.0)).collect();
        Ok(FiniteDist { p })
    }

    /// Point mass at state `i` over `n` states.
    pub fn point_mass(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        FiniteDist { p }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        FiniteDist {
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn prob(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// Expectation of a tabulated function.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.p.len() {
            return Err(Error::DimensionMismatch {
                expected: self.p.len(),
                got: values.len(),
            });
        }
        Ok(self.p.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Mass assigned to a bitmask subset.
    pub fn mass_on_mask(&self, set: u64) -> f64 {
        self.p
            .iter()
            .enumerate()
            .filter(|(i, _)| set >> i & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    /// Total variation distance `(1/2) * sum |mu_i - nu_i|`.
    pub fn total_variation(&self, other: &FiniteDist) -> Result<f64> {
        if other.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(0.5
            * self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Inverse-CDF sample of a state index.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &w) in self.p.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.p.len() - 1
    }
}

/// A row-stochastic transition matrix: row `i` is the next-state
/// distribution out of state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    n: usize,
    rows: Vec<FiniteDist>,
}

impl FiniteKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("kernel has no rows".into()));
        }
        let mut out = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            out.push(FiniteDist::new(row).map_err(|e| {
                Error::InvalidDistribution(format!("kernel row {i}: {e}"))
            })?);
        }
        Ok(FiniteKernel { n, rows: out })
    }

    pub fn from_rows(rows: Vec<FiniteDist>) -> Result<Self> {
        let n = rows.len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        Ok(FiniteKernel { n, rows })
    }

    /// The identity kernel (each state maps to itself).
    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| FiniteDist::point_mass(n, i)).collect();
        FiniteKernel { n, rows }
    }

    /// Kernel with every row equal to `nu`.
    pub fn constant(n: usize, nu: FiniteDist) -> Result<Self> {
        if nu.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: nu.len(),
            });
        }
        Ok(FiniteKernel {
            n,
            rows: vec![nu; n],
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, i: usize) -> &FiniteDist {
        &self.rows[i]
    }

    /// One step of the left Markov operator `mu -> mu Q`.
    pub fn apply_left(&self, mu: &FiniteDist) -> Result<FiniteDist> {
        if mu.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: mu.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            let w = mu.prob(i);
            if w == 0.0 {
                continue;
            }
            for (v, q) in out.iter_mut().zip(row.probs()) {
                *v += w * q;
            }
        }
        // guard against drift over long iterations
        let sum: f64 = out.iter().sum();
        for v in &mut out {
            *v /= sum;
        }
        FiniteDist::new(out)
    }

    /// One step of the right Markov operator `f -> Qf` on a tabulated
    /// function.
    pub fn apply_right(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        self.rows.iter().map(|row| row.expectation(f)).collect()
    }
}

/// `mu Q^t` by repeated vector-matrix products.
pub fn iterate_distribution(mu: &FiniteDist, q: &FiniteKernel, t: usize) -> Result<FiniteDist> {
    let mut cur = mu.clone();
    if cur.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            got: cur.len(),
        });
    }
    for _ in 0..t {
        cur = q.apply_left(&cur)?;
    }
    Ok(cur)
}

fn check_dims(mu: &FiniteDist, nu: &FiniteDist, poset: &FinitePoset) -> Result<()> {
    if mu.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            got: mu.len(),
        });
    }
    if nu.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            got: nu.len(),
        });
    }
    Ok(())
}

/// Maximum over up-sets `U` of `mu(U) - nu(U)`, with the attaining up-set.
///
/// Exhaustive for small ground sets, a single max-weight closure (min-cut)
/// solve otherwise. The value is always `>= 0` because the empty set is an
/// up-set.
pub fn up_set_deficit(
    mu: &FiniteDist,
    nu: &FiniteDist,
    poset: &FinitePoset,
) -> Result<(f64, Vec<bool>)> {
    check_dims(mu, nu, poset)?;
    if poset.len() <= MAX_ENUM_STATES {
        Ok(deficit_by_enumeration(mu, nu, poset))
    } else {
        Ok(deficit_by_min_cut(mu, nu, poset))
    }
}

fn deficit_by_enumeration(
    mu: &FiniteDist,
    nu: &FiniteDist,
    poset: &FinitePoset,
) -> (f64, Vec<bool>) {
    let mut best = 0.0;
    let mut best_mask = 0u64;
    for set in poset.enumerate_up_sets().expect("guarded by caller") {
        let gap = mu.mass_on_mask(set) - nu.mass_on_mask(set);
        if gap > best {
            best = gap;
            best_mask = set;
        }
    }
    let members = (0..poset.len()).map(|i| best_mask >> i & 1 == 1).collect();
    (best, members)
}

fn deficit_by_min_cut(mu: &FiniteDist, nu: &FiniteDist, poset: &FinitePoset) -> (f64, Vec<bool>) {
    let weights: Vec<i64> = mu
        .probs()
        .iter()
        .zip(nu.probs())
        .map(|(a, b)| ((a - b) * flow::FLOW_SCALE).round() as i64)
        .collect();
    let (value, members) = flow::max_weight_up_set(&weights, poset);
    ((value.max(0)) as f64 / flow::FLOW_SCALE, members)
}

/// One-sided dominance gap `max(0, max_U mu(U) - nu(U))`. By linear-program
/// duality this equals `1 - partial_dominance(mu, nu)`; the identity is
/// exercised in tests rather than assumed anywhere.
pub fn strassen_gap(mu: &FiniteDist, nu: &FiniteDist, poset: &FinitePoset) -> Result<f64> {
    Ok(up_set_deficit(mu, nu, poset)?.0.max(0.0))
}

/// Stochastic dominance `mu ⪯_s nu`: `mu(U) <= nu(U)` for every up-set `U`
/// (equivalent to testing every bounded increasing function, since those are
/// mixtures of up-set indicators on a finite poset).
pub fn stochastically_dominates(
    mu: &FiniteDist,
    nu: &FiniteDist,
    poset: &FinitePoset,
) -> Result<bool> {
    Ok(up_set_deficit(mu, nu, poset)?.0 <= DIST_TOL)
}

/// Order-Kolmogorov distance: `max_U |mu(U) - nu(U)|` over up-sets `U`.
///
/// Under the identity order this is total variation distance; under a total
/// order on the real line it is the classical CDF sup-distance.
pub fn kolmogorov_distance(mu: &FiniteDist, nu: &FiniteDist, poset: &FinitePoset) -> Result<f64> {
    let fwd = up_set_deficit(mu, nu, poset)?.0;
    let bwd = up_set_deficit(nu, mu, poset)?.0;
    Ok(fwd.max(bwd).clamp(0.0, 1.0))
}

/// Transportation network for couplings of `(mu, nu)` carrying mass only
/// across the order graph. Returns the max-flow value scaled back to
/// probability units, plus the per-arc plan when requested.
struct TransportSolve {
    alpha: f64,
    /// plan[u][v]: coupled mass on the graph pair (u, v); zero off-graph
    plan: Option<Vec<Vec<f64>>>,
}

fn solve_transport(
    mu: &FiniteDist,
    nu: &FiniteDist,
    poset: &FinitePoset,
    want_plan: bool,
) -> TransportSolve {
    let n = poset.len();
    let source = 2 * n;
    let sink = 2 * n + 1;
    let mut net = FlowNetwork::new(2 * n + 2);
    for i in 0..n {
        net.add_edge(source, i, flow::scale_prob(mu.prob(i)));
        net.add_edge(n + i, sink, flow::scale_prob(nu.prob(i)));
    }
    let mut arcs = Vec::new();
    for (u, v) in poset.related_pairs() {
        let e = net.add_edge(u, n + v, INF_CAP);
        arcs.push((u, v, e));
    }
    let total = net.max_flow(source, sink);
    let alpha = flow::unscale(total).clamp(0.0, 1.0);
    let plan = want_plan.then(|| {
        let mut plan = vec![vec![0.0; n]; n];
        for (u, v, e) in arcs {
            plan[u][v] = flow::unscale(net.flow(e));
        }
        plan
    });
    TransportSolve { alpha, plan }
}

/// The partial stochastic dominance coefficient: the largest probability
/// mass any coupling of `(mu, nu)` can place on the order graph
/// `{(u, v) : u ⪯ v}` (first coordinate on the lower side).
///
/// Solved exactly as a max-flow on integer-scaled capacities.
pub fn partial_dominance(mu: &FiniteDist, nu: &FiniteDist, poset: &FinitePoset) -> Result<f64> {
    check_dims(mu, nu, poset)?;
    Ok(solve_transport(mu, nu, poset, false).alpha)
}

/// An optimal coupling of `(mu, nu)` attaining [`partial_dominance`] on the
/// order graph. Mass the flow cannot match is completed off-graph by the
/// independent product of the residual marginals.
pub fn optimal_coupling(
    mu: &FiniteDist,
    nu: &FiniteDist,
    poset: &FinitePoset,
) -> Result<(f64, Vec<Vec<f64>>)> {
    check_dims(mu, nu, poset)?;
    let n = poset.len();
    let solve = solve_transport(mu, nu, poset, true);
    let mut plan = solve.plan.expect("plan requested");
    let mut row_resid = vec![0.0; n];
    let mut col_resid = vec![0.0; n];
    for u in 0..n {
        let matched: f64 = plan[u].iter().sum();
        row_resid[u] = (mu.prob(u) - matched).max(0.0);
    }
    for v in 0..n {
        let matched: f64 = (0..n).map(|u| plan[u][v]).sum();
        col_resid[v] = (nu.prob(v) - matched).max(0.0);
    }
    let r: f64 = row_resid.iter().sum();
    let s: f64 = col_resid.iter().sum();
    let z = 0.5 * (r + s);
    if z > 1e-15 {
        for u in 0..n {
            if row_resid[u] == 0.0 {
                continue;
            }
            for v in 0..n {
                plan[u][v] += row_resid[u] * col_resid[v] / z;
            }
        }
    }
    Ok((solve.alpha, plan))
}

/// Outcome of the increasing-kernel check.
#[derive(Debug, Clone)]
pub enum IncreasingCheck {
    Increasing,
    /// `lo ⪯ hi` but `Q_lo` is not dominated by `Q_hi`; the witness up-set
    /// receives `deficit` more mass under `Q_lo` than under `Q_hi`.
    Violation {
        lo: usize,
        hi: usize,
        witness_up_set: Vec<bool>,
        deficit: f64,
    },
}

impl IncreasingCheck {
    pub fn is_increasing(&self) -> bool {
        matches!(self, IncreasingCheck::Increasing)
    }
}

/// A kernel is increasing when `i ⪯ j` implies `Q_i ⪯_s Q_j`; equivalently
/// it maps bounded increasing functions to bounded increasing functions.
pub fn check_increasing(q: &FiniteKernel, poset: &FinitePoset) -> Result<IncreasingCheck> {
    if q.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            got: q.len(),
        });
    }
    let mut worst: Option<(f64, usize, usize, Vec<bool>)> = None;
    for (i, j) in poset.related_pairs() {
        if i == j {
            continue;
        }
        let (deficit, witness) = up_set_deficit(q.row(i), q.row(j), poset)?;
        if deficit > DIST_TOL && worst.as_ref().is_none_or(|(d, ..)| deficit > *d) {
            worst = Some((deficit, i, j, witness));
        }
    }
    Ok(match worst {
        None => IncreasingCheck::Increasing,
        Some((deficit, lo, hi, witness_up_set)) => IncreasingCheck::Violation {
            lo,
            hi,
            witness_up_set,
            deficit,
        },
    })
}

/// A Markov coupling of a kernel with itself: a kernel on ordered state
/// pairs whose row at `(a, b)` couples `Q_a` (first coordinate) with `Q_b`
/// (second coordinate).
///
/// Rows built by [`maximal_coupling`] place the largest possible mass on the
/// order graph `{(u, v) : u ⪯ v}` — the first coordinate is the chain being
/// driven below the second.
#[derive(Debug, Clone)]
pub struct CoupledKernel {
    n: usize,
    /// rows indexed by `a * n + b`, each a distribution over pair indices
    rows: Vec<FiniteDist>,
    /// mass each row places on the order graph at construction
    graph_mass: Vec<f64>,
}

impl CoupledKernel {
    /// Number of underlying states (the pair space has `n^2` states).
    pub fn state_count(&self) -> usize {
        self.n
    }

    pub fn pair_count(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        a * self.n + b
    }

    pub fn row(&self, a: usize, b: usize) -> &FiniteDist {
        &self.rows[self.pair_index(a, b)]
    }

    /// Mass row `(a, b)` places on the order graph of `poset`.
    pub fn mass_on_graph(&self, a: usize, b: usize, poset: &FinitePoset) -> f64 {
        let row = self.row(a, b);
        let n = self.n;
        let mut total = 0.0;
        for u in 0..n {
            for v in 0..n {
                if poset.leq(u, v) {
                    total += row.prob(u * n + v);
                }
            }
        }
        total
    }

    /// Graph mass recorded when the row was built (equals
    /// `partial_dominance(Q_a, Q_b)` for maximal couplings).
    pub fn recorded_graph_mass(&self, a: usize, b: usize) -> f64 {
        self.graph_mass[self.pair_index(a, b)]
    }

    /// First marginal of row `(a, b)` (should reproduce `Q_a`).
    pub fn first_marginal(&self, a: usize, b: usize) -> Vec<f64> {
        let row = self.row(a, b);
        let n = self.n;
        (0..n)
            .map(|u| (0..n).map(|v| row.prob(u * n + v)).sum())
            .collect()
    }

    /// Second marginal of row `(a, b)` (should reproduce `Q_b`).
    pub fn second_marginal(&self, a: usize, b: usize) -> Vec<f64> {
        let row = self.row(a, b);
        let n = self.n;
        (0..n)
            .map(|v| (0..n).map(|u| row.prob(u * n + v)).sum())
            .collect()
    }

    /// Largest deviation of any row marginal from the coupled kernel.
    pub fn max_marginal_error(&self, q: &FiniteKernel) -> Result<f64> {
        if q.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: q.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                let first = self.first_marginal(a, b);
                let second = self.second_marginal(a, b);
                for u in 0..self.n {
                    worst = worst.max((first[u] - q.row(a).prob(u)).abs());
                    worst = worst.max((second[u] - q.row(b).prob(u)).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Sample the next pair index from row `(a, b)`.
    pub fn sample_next(&self, a: usize, b: usize, rng: &mut impl rand::Rng) -> (usize, usize) {
        let idx = self.row(a, b).sample(rng);
        (idx / self.n, idx % self.n)
    }

    /// Write the coupling as CSV rows `pair,target_pair,prob` (nonzero
    /// entries only; pair index is `a * n + b`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pair,target_pair,prob")?;
        for (p, row) in self.rows.iter().enumerate() {
            for (tp, &prob) in row.probs().iter().enumerate() {
                if prob > 0.0 {
                    writeln!(w, "{p},{tp},{prob}")?;
                }
            }
        }
        Ok(())
    }
}

/// Build the order-maximal Markov coupling of `q` with itself: every row
/// `(a, b)` is an optimal transport plan attaining
/// `partial_dominance(Q_a, Q_b)` on the order graph.
///
/// Pairs are solved independently (in parallel) and merged by pair index, so
/// the result is deterministic.
pub fn maximal_coupling(q: &FiniteKernel, poset: &FinitePoset) -> Result<CoupledKernel> {
    if q.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            got: q.len(),
        });
    }
    let n = q.len();
    let solved: Vec<Result<(f64, FiniteDist)>> = (0..n * n)
        .into_par_iter()
        .map(|p| {
            let (a, b) = (p / n, p % n);
            let (alpha, plan) = optimal_coupling(q.row(a), q.row(b), poset)?;
            let mut flat = vec![0.0; n * n];
            for (u, row) in plan.iter().enumerate() {
                for (v, &mass) in row.iter().enumerate() {
                    flat[u * n + v] = mass;
                }
            }
            Ok((alpha, FiniteDist::new(flat)?))
        })
        .collect();
    let mut rows = Vec::with_capacity(n * n);
    let mut graph_mass = Vec::with_capacity(n * n);
    for item in solved {
        let (alpha, row) = item?;
        graph_mass.push(alpha);
        rows.push(row);
    }
    Ok(CoupledKernel {
        n,
        rows,
        graph_mass,
    })
}

/// Finite analogue of the independent-shock lower bound on the coupling
/// constant: the minimum over ordered pairs `(x, x')` in `C x C` of the
/// probability that independent draws `U ~ Q_{x'}`, `V ~ Q_x` satisfy
/// `U ⪯ V`. Always a lower bound for the pairwise [`partial_dominance`].
pub fn independent_coupling_floor(
    q: &FiniteKernel,
    poset: &FinitePoset,
    c: &[usize],
) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptySmallSet);
    }
    let n = poset.len();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.len(),
        });
    }
    let mut best = f64::INFINITY;
    for &x in c {
        for &xp in c {
            let mut mass = 0.0;
            for u in 0..n {
                let pu = q.row(xp).prob(u);
                if pu == 0.0 {
                    continue;
                }
                for v in 0..n {
                    if poset.leq(u, v) {
                        mass += pu * q.row(x).prob(v);
                    }
                }
            }
            best = best.min(mass);
        }
    }
    Ok(best)
}
