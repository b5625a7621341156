//! Geometric drift certificates: `QV(x) <= lambda*V(x) + beta` with
//! `V >= 1`, the derived contraction rate `gamma = lambda + 2*beta/d`, the
//! small set `C = {V <= d}`, and the initial-mass functional
//! `H(mu, mu') = (mu(V) + mu'(V)) / 2`.

use serde::{Deserialize, Serialize};

use crate::finite::{FiniteDist, FiniteKernel};
use crate::{Error, Result};

/// Slack tolerance for declaring the drift inequality verified.
pub const DRIFT_TOL: f64 = 1e-12;

/// A drift certificate over a finite state space with tabulated `V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftCertificate {
    v: Vec<f64>,
    lambda: f64,
    beta: f64,
    d: f64,
    verified: bool,
}

/// Result of checking the drift inequality pointwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    /// `max_x QV(x) - lambda*V(x) - beta`; nonpositive means the inequality
    /// holds everywhere.
    pub max_slack: f64,
    /// State attaining the worst slack.
    pub worst_state: usize,
    pub verified: bool,
}

impl DriftCertificate {
    /// Validate `V >= 1`, `lambda, beta >= 0`, `d >= 1`. The certificate
    /// starts unverified; [`DriftCertificate::verify`] flips the flag after
    /// an exact pointwise check against a kernel.
    pub fn new(v: Vec<f64>, lambda: f64, beta: f64, d: f64) -> Result<Self> {
        if let Some((i, &bad)) = v
            .iter()
            .enumerate()
            .find(|(_, &x)| !(x >= 1.0) || !x.is_finite())
        {
            return Err(Error::InvalidCertificate(format!(
                "V must map into [1, inf); V({i}) = {bad}"
            )));
        }
        if v.is_empty() {
            return Err(Error::InvalidCertificate("V is empty".into()));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidCertificate(format!(
                "lambda must be a nonnegative real, got {lambda}"
            )));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidCertificate(format!(
                "beta must be a nonnegative real, got {beta}"
            )));
        }
        if !(d >= 1.0) || !d.is_finite() {
            return Err(Error::InvalidCertificate(format!("d must be >= 1, got {d}")));
        }
        Ok(DriftCertificate {
            v,
            lambda,
            beta,
            d,
            verified: false,
        })
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `gamma = lambda + 2*beta/d`, the per-step rate the visit-tail bound
    /// contracts at.
    pub fn gamma(&self) -> f64 {
        self.lambda + 2.0 * self.beta / self.d
    }

    /// The small set `C = {x : V(x) <= d}` as an index subset.
    pub fn small_set(&self) -> Vec<usize> {
        small_set_indices(&self.v, self.d)
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    /// Same certificate with a different `d` (the small-set radius is a free
    /// tuning parameter; the drift inequality does not involve it).
    pub fn with_d(&self, d: f64) -> Result<Self> {
        let mut cert = DriftCertificate::new(self.v.clone(), self.lambda, self.beta, d)?;
        cert.verified = self.verified;
        Ok(cert)
    }

    /// Exact pointwise check of `QV <= lambda*V + beta`; marks the
    /// certificate verified on success.
    pub fn verify(&mut self, q: &FiniteKernel) -> Result<DriftReport> {
        let report = verify_drift(q, self)?;
        self.verified = report.verified;
        Ok(report)
    }
}

/// Exact drift verification: computes `QV` by matrix-vector product and
/// reports the worst slack `QV(x) - lambda*V(x) - beta` over states.
pub fn verify_drift(q: &FiniteKernel, cert: &DriftCertificate) -> Result<DriftReport> {
    let qv = q.apply_right(cert.v())?;
    let mut max_slack = f64::NEG_INFINITY;
    let mut worst_state = 0;
    for (i, (&qvi, &vi)) in qv.iter().zip(cert.v()).enumerate() {
        let slack = qvi - cert.lambda * vi - cert.beta;
        if slack > max_slack {
            max_slack = slack;
            worst_state = i;
        }
    }
    Ok(DriftReport {
        max_slack,
        worst_state,
        verified: max_slack <= DRIFT_TOL,
    })
}

/// Fit drift constants for a given `V` and small-set radius `d`: for each
/// grid value of `lambda`, the tightest `beta` is
/// `max_x (QV(x) - lambda*V(x))` (clamped at zero), and the certificate
/// minimising `gamma = lambda + 2*beta/d` wins. Ties break toward the
/// smaller `lambda`. The result is verified by construction.
pub fn fit_drift(
    q: &FiniteKernel,
    v: &[f64],
    lambda_grid: &[f64],
    d: f64,
) -> Result<DriftCertificate> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    for &l in lambda_grid {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::InvalidArgument(format!(
                "lambda grid values must lie in [0, 1], got {l}"
            )));
        }
    }
    let qv = q.apply_right(v)?;
    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64, f64)> = None; // (gamma, lambda, beta)
    for &lambda in &grid {
        let beta = qv
            .iter()
            .zip(v)
            .map(|(&qvi, &vi)| qvi - lambda * vi)
            .fold(0.0f64, f64::max);
        let gamma = lambda + 2.0 * beta / d;
        if best.is_none_or(|(g, ..)| gamma < g) {
            best = Some((gamma, lambda, beta));
        }
    }
    let (_, lambda, beta) = best.expect("nonempty grid");
    let mut cert = DriftCertificate::new(v.to_vec(), lambda, beta, d)?;
    let report = cert.verify(q)?;
    debug_assert!(report.verified, "fitted certificates verify by construction");
    Ok(cert)
}

/// Initial-mass functional `H(mu, mu') = (mu(V) + mu'(V)) / 2`, exact in the
/// finite case.
pub fn initial_mass(mu: &FiniteDist, mu2: &FiniteDist, v: &[f64]) -> Result<f64> {
    Ok(0.5 * (mu.expectation(v)? + mu2.expectation(v)?))
}

/// Finite small set `{i : v[i] <= d}`.
///
/// May be empty (e.g. `d < min V`); callers that need a nonempty set treat
/// that case separately — the bound pipeline flags it as a warning while the
/// coupling constant treats it as a hard error.
pub fn small_set_indices(v: &[f64], d: f64) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &vi)| vi <= d)
        .map(|(i, _)| i)
        .collect()
}

/// Scalar Lyapunov functions for real-line models.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum RealV {
    /// `V(x) = slope * x + intercept` with `slope >= 0`, `intercept >= 1`.
    Affine { slope: f64, intercept: f64 },
}

impl RealV {
    pub fn shifted_identity() -> Self {
        RealV::Affine {
            slope: 1.0,
            intercept: 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            RealV::Affine { slope, intercept } => slope * x + intercept,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RealV::Affine { slope, intercept } => {
                if (*slope, *intercept) == (1.0, 1.0) {
                    "V(x) = x + 1".to_string()
                } else {
                    format!("V(x) = {slope} * x + {intercept}")
                }
            }
        }
    }

    /// Solve `{x in [lo, hi] : V(x) <= d}` for an increasing affine `V`.
    /// `None` when the sublevel set is empty; an unbounded domain uses
    /// `hi = f64::INFINITY`.
    pub fn small_set(&self, d: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
        match self {
            RealV::Affine { slope, intercept } => {
                if *slope == 0.0 {
                    return (*intercept <= d).then_some((lo, hi));
                }
                let cut = (d - intercept) / slope;
                (cut >= lo).then(|| (lo, cut.min(hi)))
            }
        }
    }
}

/// Analytic drift data for a real-line model: `QV <= lambda*V + beta`
/// entered from a closed form (or fitted numerically when no closed form
/// exists). `d` stays free, exactly as in the finite case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealDrift {
    pub v: RealV,
    pub lambda: f64,
    pub beta: f64,
}

impl RealDrift {
    pub fn gamma(&self, d: f64) -> f64 {
        self.lambda + 2.0 * self.beta / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{maximal_coupling, FiniteKernel};
    use crate::validate;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Half-plus-Bernoulli dynamics projected onto the grid
    /// {0, 1/2, 1, 3/2, 2} with mean-preserving interpolation.
    fn half_bernoulli_grid_kernel() -> FiniteKernel {
        FiniteKernel::new(vec![
            vec![0.5, 0.0, 0.5, 0.0, 0.0],
            vec![0.25, 0.25, 0.25, 0.25, 0.0],
            vec![0.0, 0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.25, 0.25, 0.25, 0.25],
            vec![0.0, 0.0, 0.5, 0.0, 0.5],
        ])
        .unwrap()
    }

    fn grid_v() -> Vec<f64> {
        vec![1.0, 1.5, 2.0, 2.5, 3.0]
    }

    #[test]
    fn identity_kernel_verifies_with_unit_lambda() {
        let q = FiniteKernel::identity(3);
        let mut cert = DriftCertificate::new(vec![1.0, 2.0, 5.0], 1.0, 0.0, 2.0).unwrap();
        let report = cert.verify(&q).unwrap();
        assert!(report.verified);
        assert_abs_diff_eq!(report.max_slack, 0.0, epsilon = 1e-15);
        assert!(cert.verified());
    }

    #[test]
    fn half_bernoulli_grid_certificate_is_exact() {
        let q = half_bernoulli_grid_kernel();
        let v = grid_v();
        // QV(x) = x/2 + 3/2 = 0.5 * (x + 1) + 1 exactly
        let qv = q.apply_right(&v).unwrap();
        for (i, x) in [0.0, 0.5, 1.0, 1.5, 2.0].iter().enumerate() {
            assert_abs_diff_eq!(qv[i], x / 2.0 + 1.5, epsilon = 1e-15);
        }
        let mut cert = DriftCertificate::new(v, 0.5, 1.0, 2.0).unwrap();
        let report = cert.verify(&q).unwrap();
        assert!(report.verified);
        assert_abs_diff_eq!(report.max_slack, 0.0, epsilon = 1e-15);
        // C = {V <= 2} = {0, 1/2, 1}
        assert_eq!(cert.small_set(), vec![0, 1, 2]);
    }

    #[test]
    fn slack_choice_always_verifies() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let q = validate::random_kernel(4, &mut rng);
        let v = vec![1.0, 3.0, 2.0, 7.0];
        let qv = q.apply_right(&v).unwrap();
        let beta = qv.iter().cloned().fold(0.0f64, f64::max);
        let mut cert = DriftCertificate::new(v, 0.0, beta, 1.5).unwrap();
        assert!(cert.verify(&q).unwrap().verified);
    }

    #[test]
    fn certificate_rejects_v_below_one() {
        let err = DriftCertificate::new(vec![1.0, 0.5], 0.5, 1.0, 1.0);
        assert!(matches!(err, Err(Error::InvalidCertificate(_))));
    }

    #[test]
    fn unverified_certificate_reports_worst_state() {
        let q = half_bernoulli_grid_kernel();
        // understate beta: QV(2) = 2.5 > 0.5 * 3 + 0.9
        let cert = DriftCertificate::new(grid_v(), 0.5, 0.9, 2.0).unwrap();
        let report = verify_drift(&q, &cert).unwrap();
        assert!(!report.verified);
        assert!(report.max_slack > 0.05);
        assert_eq!(report.worst_state, 0); // slack is x-independent here: 0.1 everywhere
    }

    #[test]
    fn fit_constant_kernel_gives_mean_beta_at_zero_lambda() {
        let nu = crate::finite::FiniteDist::new(vec![0.25, 0.75]).unwrap();
        let q = FiniteKernel::constant(2, nu.clone()).unwrap();
        let v = vec![1.0, 3.0];
        let cert = fit_drift(&q, &v, &[0.0], 5.0).unwrap();
        assert_abs_diff_eq!(cert.beta(), nu.expectation(&v).unwrap(), epsilon = 1e-15);
        assert!(cert.verified());
    }

    #[test]
    fn fit_identity_kernel_picks_unit_lambda() {
        let q = FiniteKernel::identity(3);
        let v = vec![1.0, 4.0, 9.0];
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        // gamma(lambda) = lambda + 2 * max((1-lambda) * V) / d; with d large
        // the beta term dominates unless lambda = 1
        let cert = fit_drift(&q, &v, &grid, 100.0).unwrap();
        assert_abs_diff_eq!(cert.lambda(), 1.0);
        assert_abs_diff_eq!(cert.beta(), 0.0);
        assert!(cert.verified());
    }

    #[test]
    fn fitted_certificates_verify_on_random_kernels() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..100 {
            let q = validate::random_kernel(5, &mut rng);
            let v: Vec<f64> = (0..5).map(|_| 1.0 + 4.0 * rng.gen::<f64>()).collect();
            let grid: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
            let d = 1.0 + 3.0 * rng.gen::<f64>();
            let cert = fit_drift(&q, &v, &grid, d).unwrap();
            assert!(cert.verified());
            assert!(verify_drift(&q, &cert).unwrap().verified);
        }
    }

    #[test]
    fn gamma_decreases_and_small_set_grows_in_d() {
        let cert = DriftCertificate::new(vec![1.0, 2.0, 3.0], 0.4, 1.0, 1.0).unwrap();
        let ds = [1.0, 1.5, 2.0, 2.5, 3.0, 5.0];
        let mut last_gamma = f64::INFINITY;
        let mut last_size = 0usize;
        for &d in &ds {
            let c = cert.with_d(d).unwrap();
            assert!(c.gamma() < last_gamma);
            let set = c.small_set();
            assert!(set.len() >= last_size);
            last_gamma = c.gamma();
            last_size = set.len();
        }
    }

    #[test]
    fn coupled_drift_inequality_holds_exactly() {
        // W(a, b) = (V(a) + V(b)) / 2 satisfies the same drift inequality
        // under any Markov coupling
        let mut rng = ChaCha12Rng::seed_from_u64(30);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let poset = validate::random_poset(n, &mut rng);
            let q = validate::random_kernel(n, &mut rng);
            let v: Vec<f64> = (0..n).map(|_| 1.0 + 4.0 * rng.gen::<f64>()).collect();
            let grid: Vec<f64> = (0..6).map(|i| i as f64 / 6.0).collect();
            let cert = fit_drift(&q, &v, &grid, 2.0).unwrap();
            let coupled = maximal_coupling(&q, &poset).unwrap();
            let w: Vec<f64> = (0..n * n)
                .map(|p| 0.5 * (v[p / n] + v[p % n]))
                .collect();
            for a in 0..n {
                for b in 0..n {
                    let qw = coupled.row(a, b).expectation(&w).unwrap();
                    let rhs = cert.lambda() * 0.5 * (v[a] + v[b]) + cert.beta();
                    assert!(qw <= rhs + 1e-9, "coupled drift violated: {qw} > {rhs}");
                }
            }
        }
    }

    #[test]
    fn initial_mass_examples() {
        let v = vec![1.0, 2.0];
        let d0 = crate::finite::FiniteDist::point_mass(2, 0);
        let d1 = crate::finite::FiniteDist::point_mass(2, 1);
        assert_abs_diff_eq!(initial_mass(&d0, &d0, &v).unwrap(), 1.0);
        assert_abs_diff_eq!(initial_mass(&d0, &d1, &v).unwrap(), 1.5);
        let ones = vec![1.0, 1.0];
        assert_abs_diff_eq!(initial_mass(&d0, &d1, &ones).unwrap(), 1.0);
    }

    #[test]
    fn real_small_set_examples() {
        let v = RealV::shifted_identity();
        // V(x) = x + 1, d = 2 on the nonnegative half-line: C = [0, 1]
        assert_eq!(v.small_set(2.0, 0.0, f64::INFINITY), Some((0.0, 1.0)));
        // d below min V: empty
        assert_eq!(v.small_set(0.5, 0.0, f64::INFINITY), None);
        // constant V = 1: full space for any d >= 1
        let flat = RealV::Affine {
            slope: 0.0,
            intercept: 1.0,
        };
        assert_eq!(flat.small_set(1.0, 0.0, 10.0), Some((0.0, 10.0)));
    }

    #[test]
    fn finite_small_set_edge_cases() {
        assert_eq!(small_set_indices(&[1.0, 2.0, 3.0], 2.0), vec![0, 1]);
        assert!(small_set_indices(&[3.0, 4.0], 2.0).is_empty());
        assert_eq!(small_set_indices(&[1.0, 1.0], 7.0), vec![0, 1]);
    }
}
