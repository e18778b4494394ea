//! Dense Perry-type matrix `λI − (λ/2)(ysᵀ + syᵀ)/(yᵀs) + t·ssᵀ/(yᵀs)` and
//! checks of its trace and eigenvalue identities.
//!
//! This is a verification surface only. The solvers never build the matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{contract, Result};
use crate::linalg::{dot, norm};

#[derive(Debug, Clone)]
pub struct PerryMatrix {
    n: usize,
    /// Row-major, n×n.
    data: Vec<f64>,
    lambda: f64,
    t: f64,
    /// `‖s‖²/(sᵀy)`
    pub a: f64,
    /// `‖s‖‖y‖/(sᵀy)`
    pub b: f64,
}

pub fn perry_matrix_build(s: &[f64], y: &[f64], lambda: f64, t: f64) -> Result<PerryMatrix> {
    let n = s.len();
    if n < 2 || y.len() != n {
        return Err(contract(
            "Perry matrix needs equal-length vectors with n >= 2",
        ));
    }
    let sy = dot(s, y);
    if !(sy > 0.0) {
        return Err(contract("Perry matrix needs sᵀy > 0"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { lambda } else { 0.0 };
            data[i * n + j] =
                id - 0.5 * lambda * (y[i] * s[j] + s[i] * y[j]) / sy + t * s[i] * s[j] / sy;
        }
    }
    Ok(PerryMatrix {
        n,
        data,
        lambda,
        t,
        a: dot(s, s) / sy,
        b: norm(s) * norm(y) / sy,
    })
}

impl PerryMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `tr(QᵀQ)`, the squared Frobenius norm.
    pub fn trace_gram(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn predicted_trace(&self) -> f64 {
        self.lambda * (self.n as f64 - 1.0) + self.a * self.t
    }

    pub fn predicted_trace_gram(&self) -> f64 {
        let l2 = self.lambda * self.lambda;
        l2 * (self.n as f64 - 1.5) + 0.5 * l2 * self.b * self.b + self.a * self.a * self.t * self.t
    }

    /// Coefficients `(sum, product)` of the characteristic quadratic of the
    /// two eigenvalues that differ from λ.
    pub fn eta_sum_product(&self) -> (f64, f64) {
        let (l, a, b, t) = (self.lambda, self.a, self.b, self.t);
        (l + a * t, 0.25 * l * l * (1.0 - b * b) + l * a * t)
    }

    /// `(η⁺, η⁻)` from the quadratic coefficients.
    pub fn eta_pair(&self) -> (f64, f64) {
        let (l, a, b, t) = (self.lambda, self.a, self.b, self.t);
        let sum = l + a * t;
        // discriminant written as a sum of squares so it never goes negative
        let disc = (a * t - l).powi(2) + l * l * (b * b - 1.0).max(0.0);
        let root = disc.sqrt();
        ((sum + root) / 2.0, (sum - root) / 2.0)
    }

    /// All eigenvalues from a generic dense symmetric eigensolve, ascending.
    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.data);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// The two dense eigenvalues left after removing the n−2 closest to λ,
    /// as `(larger, smaller)`.
    pub fn dense_eta_pair(&self) -> (f64, f64) {
        let mut ev = self.dense_eigenvalues();
        ev.sort_by(|x, y| (x - self.lambda).abs().total_cmp(&(y - self.lambda).abs()));
        let (p, q) = (ev[self.n - 1], ev[self.n - 2]);
        (p.max(q), p.min(q))
    }
}

/// Spectral condition number `max|η| / min|η|` of the n=2 Perry matrix at
/// scaling `t`, from the closed-form eigenvalues.
pub fn condition_number_2x2(lambda: f64, a: f64, b: f64, t: f64) -> f64 {
    let sum = lambda + a * t;
    let root = ((a * t - lambda).powi(2) + lambda * lambda * (b * b - 1.0).max(0.0)).sqrt();
    let (hi, lo) = ((sum + root) / 2.0, (sum - root) / 2.0);
    let (mx, mn) = (hi.abs().max(lo.abs()), hi.abs().min(lo.abs()));
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

/// Squared gap `(η⁺ − η⁻)²` of the n=2 Perry matrix.
pub fn eigen_spread_sq(lambda: f64, a: f64, b: f64, t: f64) -> f64 {
    (a * t - lambda).powi(2) + lambda * lambda * (b * b - 1.0)
}

/// Linear grid of `points` values over `[0.01·λ/a, 100·λ/a]`.
pub fn tstar_grid(lambda: f64, a: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (0.01 * lambda / a, 100.0 * lambda / a);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

fn grid_argmin(grid: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    grid.iter()
        .copied()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .expect("non-empty grid")
}

/// Worst-case deviations observed over a batch of random Perry instances.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PerryCheckSummary {
    pub instances: usize,
    pub max_trace_rel: f64,
    pub max_trace_gram_rel: f64,
    pub max_eta_sum_rel: f64,
    pub max_eta_product_rel: f64,
    /// Dense eigensolve versus closed-form η±.
    pub max_eta_crosscheck_rel: f64,
    pub cond_instances: usize,
    /// Instances whose grid minimizer of cond(Q) is more than one step from t*.
    pub cond_misses: usize,
    /// Largest distance, in grid steps, from the cond(Q) minimizer to t*.
    pub cond_worst_steps: f64,
    /// Same, for the eigenvalue spread (η⁺ − η⁻)².
    pub spread_misses: usize,
    pub spread_worst_steps: f64,
}

fn rel(x: f64, y: f64, scale: f64) -> f64 {
    (x - y).abs() / y.abs().max(scale).max(f64::MIN_POSITIVE)
}

/// Draws `(s, y)` with `sᵀy ≥ 0.05‖s‖‖y‖` so that `b ≤ 20`.
fn draw_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let s: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut sy = dot(&s, &y);
        if sy < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
            sy = -sy;
        }
        if sy >= 0.05 * norm(&s) * norm(&y) {
            return (s, y);
        }
    }
}

/// Runs the trace, squared-trace, eigen sum/product and dense cross-checks on
/// `instances` random matrices with n drawn from `n_min..=n_max`, plus the
/// t* grid scan on `instances` random 2×2 matrices.
pub fn run_perry_checks(
    seed: u64,
    instances: usize,
    n_min: usize,
    n_max: usize,
    grid_points: usize,
) -> Result<PerryCheckSummary> {
    if n_min < 2 || n_max < n_min || grid_points < 2 {
        return Err(contract(
            "perry checks need 2 <= n_min <= n_max and >= 2 grid points",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PerryCheckSummary::default();
    for _ in 0..instances {
        let n = rng.random_range(n_min..=n_max);
        let (s, y) = draw_pair(&mut rng, n);
        let lambda = rng.random_range(0.1..5.0);
        let t = rng.random_range(0.1..5.0);
        let q = perry_matrix_build(&s, &y, lambda, t)?;

        let tr_scale = lambda * n as f64 + q.a * t;
        out.max_trace_rel = out
            .max_trace_rel
            .max(rel(q.trace(), q.predicted_trace(), tr_scale));
        let gram_scale = lambda * lambda * (n as f64 + q.b * q.b) + (q.a * t).powi(2);
        out.max_trace_gram_rel =
            out.max_trace_gram_rel
                .max(rel(q.trace_gram(), q.predicted_trace_gram(), gram_scale));

        let (sum, prod) = q.eta_sum_product();
        let (dp, dm) = q.dense_eta_pair();
        let sum_scale = lambda + q.a * t;
        let prod_scale = 0.25 * lambda * lambda * (1.0 + q.b * q.b) + lambda * q.a * t;
        out.max_eta_sum_rel = out.max_eta_sum_rel.max(rel(dp + dm, sum, sum_scale));
        out.max_eta_product_rel = out.max_eta_product_rel.max(rel(dp * dm, prod, prod_scale));
        let (ep, em) = q.eta_pair();
        let pair_scale = ep.abs().max(em.abs());
        out.max_eta_crosscheck_rel = out
            .max_eta_crosscheck_rel
            .max(rel(dp, ep, pair_scale))
            .max(rel(dm, em, pair_scale));
        out.instances += 1;
    }

    for _ in 0..instances {
        let (s, y) = draw_pair(&mut rng, 2);
        let lambda = rng.random_range(0.1..5.0);
        let q = perry_matrix_build(&s, &y, lambda, 1.0)?;
        if !(q.b > 1.0) {
            continue;
        }
        let tstar = lambda / q.a;
        let grid = tstar_grid(lambda, q.a, grid_points);
        let step = grid[1] - grid[0];

        let t_cond = grid_argmin(&grid, |t| condition_number_2x2(lambda, q.a, q.b, t));
        let steps = (t_cond - tstar).abs() / step;
        out.cond_worst_steps = out.cond_worst_steps.max(steps);
        if steps > 1.0 {
            out.cond_misses += 1;
        }

        let t_spread = grid_argmin(&grid, |t| eigen_spread_sq(lambda, q.a, q.b, t));
        let steps = (t_spread - tstar).abs() / step;
        out.spread_worst_steps = out.spread_worst_steps.max(steps);
        if steps > 1.0 {
            out.spread_misses += 1;
        }
        out.cond_instances += 1;
    }
    Ok(out)
}
