//! Randomised instance generators and independent oracles.
//!
//! These power the invariant suites: the transport solver is checked against
//! brute-force vertex enumeration of the coupling polytope, up-set reductions
//! against randomly generated increasing functions, and the whole pipeline
//! against exactly iterated finite chains. The CLI self-test runs a fast
//! subset through [`run_quick_suite`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::finite::{self, FiniteDist, FiniteKernel};
use crate::poset::FinitePoset;

/// Random poset on `n` states: a random DAG oriented along a random
/// permutation, then transitively closed. Construction guarantees the order
/// axioms; the validating constructor re-checks them anyway.
pub fn random_poset(n: usize, rng: &mut ChaCha12Rng) -> FinitePoset {
    let mut perm: Vec<usize> = (0..n).collect();
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let density: f64 = rng.gen_range(0.15..0.6);
    let mut rel = vec![false; n * n];
    for i in 0..n {
        rel[i * n + i] = true;
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen::<f64>() < density {
                rel[perm[a] * n + perm[b]] = true;
            }
        }
    }
    // transitive closure
    for k in 0..n {
        for i in 0..n {
            if rel[i * n + k] {
                for j in 0..n {
                    if rel[k * n + j] {
                        rel[i * n + j] = true;
                    }
                }
            }
        }
    }
    let matrix: Vec<Vec<bool>> = (0..n)
        .map(|i| rel[i * n..(i + 1) * n].to_vec())
        .collect();
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    FinitePoset::new(labels, &matrix).expect("construction preserves the order axioms")
}

/// Random probability vector (normalised exponentials).
pub fn random_dist(n: usize, rng: &mut ChaCha12Rng) -> FiniteDist {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let sum: f64 = raw.iter().sum();
    FiniteDist::new(raw.into_iter().map(|w| w / sum).collect()).expect("normalised")
}

/// Random row-stochastic kernel.
pub fn random_kernel(n: usize, rng: &mut ChaCha12Rng) -> FiniteKernel {
    let rows = (0..n).map(|_| random_dist(n, rng)).collect();
    FiniteKernel::from_rows(rows).expect("square by construction")
}

/// Random monotone self-map of the poset (rejection sampling with a
/// constant-map fallback, which is always monotone).
fn random_monotone_map(poset: &FinitePoset, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let n = poset.len();
    'attempt: for _ in 0..10_000 {
        let f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        for (i, j) in poset.related_pairs() {
            if !poset.leq(f[i], f[j]) {
                continue 'attempt;
            }
        }
        return f;
    }
    vec![rng.gen_range(0..n); n]
}

/// Random increasing kernel for the given poset.
///
/// Tries plain rejection sampling first; when the order is too constrained
/// for rejection to land (a chain already makes the acceptance probability
/// astronomically small), falls back to a mixture of monotone deterministic
/// maps plus a common smoothing component, which is increasing by
/// construction. The result is always re-checked.
pub fn random_increasing_kernel(poset: &FinitePoset, rng: &mut ChaCha12Rng) -> FiniteKernel {
    let n = poset.len();
    for _ in 0..200 {
        let q = random_kernel(n, rng);
        if finite::check_increasing(&q, poset)
            .expect("dims match")
            .is_increasing()
        {
            return q;
        }
    }
    let m = rng.gen_range(2..=4);
    let maps: Vec<Vec<usize>> = (0..m).map(|_| random_monotone_map(poset, rng)).collect();
    let weights = random_dist(m + 1, rng);
    let smoothing = random_dist(n, rng);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            for (k, map) in maps.iter().enumerate() {
                row[map[i]] += weights.prob(k);
            }
            let w = weights.prob(m);
            for (v, r) in row.iter_mut().enumerate() {
                *r += w * smoothing.prob(v);
            }
            row
        })
        .collect();
    let q = FiniteKernel::new(rows).expect("rows are convex mixtures");
    assert!(
        finite::check_increasing(&q, poset)
            .expect("dims match")
            .is_increasing(),
        "monotone-map mixture must be increasing"
    );
    q
}

/// Random increasing function on the poset with values in [0, 1]:
/// independent raw values pushed up through the order.
pub fn random_increasing_function(poset: &FinitePoset, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let n = poset.len();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    (0..n)
        .map(|j| {
            (0..n)
                .filter(|&i| poset.leq(i, j))
                .map(|i| raw[i])
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Brute-force LP oracle for the transport maximum: enumerate all candidate
/// basic solutions of the coupling polytope and take the best feasible one.
/// Exponential in the instance size; intended for `n <= 4`.
///
/// Independent of the max-flow implementation by design — it never touches
/// the flow solver.
pub fn coupling_lp_maximum(mu: &FiniteDist, nu: &FiniteDist, poset: &FinitePoset) -> f64 {
    let n = poset.len();
    assert!(n <= 4, "vertex enumeration oracle is for n <= 4");
    let m = n * n;
    let k = 2 * n - 1; // row-sum constraints plus all but one column-sum
    let mut a = vec![vec![0.0f64; m]; k];
    let mut b = vec![0.0f64; k];
    for u in 0..n {
        for v in 0..n {
            a[u][u * n + v] = 1.0;
        }
        b[u] = mu.prob(u);
    }
    for v in 0..n - 1 {
        for u in 0..n {
            a[n + v][u * n + v] = 1.0;
        }
        b[n + v] = nu.prob(v);
    }

    let mut best = f64::NEG_INFINITY;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        if let Some(x) = solve_square(&a, &b, &combo) {
            if x.iter().all(|&xi| xi >= -1e-9) {
                let val: f64 = combo
                    .iter()
                    .zip(&x)
                    .filter(|(&idx, _)| poset.leq(idx / n, idx % n))
                    .map(|(_, &xi)| xi)
                    .sum();
                best = best.max(val);
            }
        }
        // next k-combination of 0..m in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + m - k {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Solve the square system formed by the chosen columns; `None` when the
/// basis matrix is singular.
fn solve_square(a: &[Vec<f64>], b: &[f64], cols: &[usize]) -> Option<Vec<f64>> {
    let k = cols.len();
    let mut m = vec![vec![0.0f64; k + 1]; k];
    for r in 0..k {
        for (c, &col) in cols.iter().enumerate() {
            m[r][c] = a[r][col];
        }
        m[r][k] = b[r];
    }
    for col in 0..k {
        let (pivot_row, pivot_val) = (col..k)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot_val < 1e-10 {
            return None;
        }
        m.swap(col, pivot_row);
        let p = m[col][col];
        for c in col..=k {
            m[col][c] /= p;
        }
        for r in 0..k {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col];
                for c in col..=k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..k).map(|r| m[r][k]).collect())
}

/// Outcome of one named invariant check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> Self {
        CheckOutcome {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckOutcome {
            name,
            passed: false,
            detail,
        }
    }
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    if worst <= tol {
        CheckOutcome::pass(name, format!("worst deviation {worst:.3e} within {tol:.1e}"))
    } else {
        CheckOutcome::fail(name, format!("worst deviation {worst:.3e} exceeds {tol:.1e}"))
    }
}

/// Fast subset of the invariant suites, used by the CLI self-test.
///
/// `corrupt` names a check whose constants are deliberately perturbed — a
/// negative control proving the harness can fail.
pub fn run_quick_suite(seed: u64, corrupt: Option<&str>) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let bias = |name: &str| -> f64 {
        if corrupt == Some(name) {
            1e-3
        } else {
            0.0
        }
    };

    // duality: partial dominance + one-sided gap = 1
    {
        let name = "coupling-duality";
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..30 {
            let n = rng.gen_range(2..=6);
            let poset = random_poset(n, &mut rng);
            let mu = random_dist(n, &mut rng);
            let nu = random_dist(n, &mut rng);
            let alpha = finite::partial_dominance(&mu, &nu, &poset).unwrap() + bias(name);
            let gap = finite::strassen_gap(&mu, &nu, &poset).unwrap();
            worst = worst.max((alpha + gap - 1.0).abs());
        }
        out.push(check(name, worst, crate::SOLVER_TOL));
    }

    // alpha = 1 exactly when dominated
    {
        let name = "strassen-iff-dominance";
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5151);
        let mut worst: f64 = 0.0;
        for _ in 0..30 {
            let n = rng.gen_range(2..=6);
            let poset = random_poset(n, &mut rng);
            let mu = random_dist(n, &mut rng);
            let nu = random_dist(n, &mut rng);
            let alpha = finite::partial_dominance(&mu, &nu, &poset).unwrap() + bias(name);
            let dominated = finite::stochastically_dominates(&mu, &nu, &poset).unwrap();
            if dominated {
                worst = worst.max((1.0 - alpha).abs());
            } else if alpha >= 1.0 - crate::SOLVER_TOL {
                worst = worst.max(1.0);
            }
        }
        out.push(check(name, worst, crate::SOLVER_TOL));
    }

    // identity order: alpha = 1 - TV and distance = TV
    {
        let name = "identity-order-collapse";
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcd);
        let mut worst: f64 = 0.0;
        for _ in 0..30 {
            let n = rng.gen_range(2..=6);
            let poset = FinitePoset::identity(n);
            let mu = random_dist(n, &mut rng);
            let nu = random_dist(n, &mut rng);
            let tv = mu.total_variation(&nu).unwrap();
            let alpha = finite::partial_dominance(&mu, &nu, &poset).unwrap() + bias(name);
            let dist = finite::kolmogorov_distance(&mu, &nu, &poset).unwrap();
            worst = worst.max((alpha - (1.0 - tv)).abs());
            worst = worst.max((dist - tv).abs());
        }
        out.push(check(name, worst, 1e-12 + 1e-13));
    }

    // metric properties of the order-Kolmogorov distance
    {
        let name = "kolmogorov-metric";
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x77);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let poset = random_poset(n, &mut rng);
            let a = random_dist(n, &mut rng);
            let b = random_dist(n, &mut rng);
            let c = random_dist(n, &mut rng);
            let dab = finite::kolmogorov_distance(&a, &b, &poset).unwrap() + bias(name);
            let dba = finite::kolmogorov_distance(&b, &a, &poset).unwrap();
            let dac = finite::kolmogorov_distance(&a, &c, &poset).unwrap();
            let dcb = finite::kolmogorov_distance(&c, &b, &poset).unwrap();
            let daa = finite::kolmogorov_distance(&a, &a, &poset).unwrap();
            worst = worst.max((dab - dba).abs());
            worst = worst.max(dab - (dac + dcb));
            worst = worst.max(daa);
        }
        out.push(check(name, worst, 1e-12));
    }

    // one full exact theorem-validation seed
    {
        let name = "theorem-exact-one-seed";
        let worst = theorem_validation_worst_slack(seed ^ 0x2222, 6, 2, 12) + bias(name);
        out.push(check(name, worst, crate::SOLVER_TOL));
    }

    out
}

/// Worst violation of the two-term convergence bound on one random
/// increasing instance: `distance - bound`, maximised over initial pairs,
/// horizons and split points. Nonpositive (within solver tolerance) when
/// everything is correct.
pub fn theorem_validation_worst_slack(
    seed: u64,
    n: usize,
    initial_pairs: usize,
    t_max: usize,
) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let poset = random_poset(n, &mut rng);
    let q = random_increasing_kernel(&poset, &mut rng);
    let v: Vec<f64> = (0..n).map(|_| 1.0 + 3.0 * rng.gen::<f64>()).collect();
    let lambda_grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    let d = {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0f64, f64::max);
        lo + rng.gen::<f64>() * (hi - lo)
    };
    let cert = crate::drift::fit_drift(&q, &v, &lambda_grid, d).unwrap();
    let c = cert.small_set();
    let eps = crate::bounds::exact_coupling_constant(&q, &poset, &c).unwrap();
    let gamma = cert.gamma();

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..initial_pairs {
        let mu = random_dist(n, &mut rng);
        let mu2 = random_dist(n, &mut rng);
        let h = crate::drift::initial_mass(&mu, &mu2, &v).unwrap();
        let mut a = mu.clone();
        let mut b = mu2.clone();
        for t in 1..=t_max {
            a = q.apply_left(&a).unwrap();
            b = q.apply_left(&b).unwrap();
            let dist = finite::kolmogorov_distance(&a, &b, &poset).unwrap();
            for j in 1..=t {
                let bound = crate::bounds::convergence_bound(eps, gamma, cert.d(), h, j, t)
                    .unwrap()
                    .value;
                worst = worst.max(dist - bound);
            }
        }
    }
    worst
}
