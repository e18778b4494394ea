//! ℓ₁-regularized least squares as a monotone complementarity equation.
//!
//! `min ½‖Ax − b‖² + τ‖x‖₁` is rewritten with `x = z₁ − z₂`, `z ≥ 0` as
//! `min{z, Qz + c} = 0`, where `Q = [AᵀA, −AᵀA; −AᵀA, AᵀA]` and
//! `c = τ·1 + (−Aᵀb; Aᵀb)`. `Q` is never formed: each evaluation applies
//! `Aᵀ(A(z₁ − z₂))` in `O(mn)`.

use nalgebra::DMatrix;
use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bench::{median, par_map};
use crate::error::{contract, Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::norm_inf;
use crate::solver::{solve, MethodConfig, SolveReport, Status};
use crate::system::MonotoneSystem;

/// Generator and Gaussian transform behind every random instance.
pub const RNG_TAG: &str = "chacha8-ziggurat";

/// Variance of the signal values and of the raw sensing-matrix entries.
pub const ENTRY_VARIANCE: f64 = 1e-3;

/// Stopping tolerance and iteration cap used for recovery.
pub const RECOVERY_EPSILON: f64 = 1e-5;
pub const RECOVERY_MAX_ITER: usize = 5000;

pub const SWEEP_SPARSITY: [f64; 4] = [0.05, 0.10, 0.20, 0.30];
pub const SWEEP_MEASUREMENT: [f64; 3] = [0.25, 0.50, 0.75];
pub const SWEEP_NOISE: [f64; 4] = [0.0, 1e-3, 1e-2, 1e-1];

/// A sparse-recovery instance `b = A x_orig + ν`.
#[derive(Debug, Clone)]
pub struct CsInstance {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub sigma: f64,
    /// Row-major `m × n`, orthonormal rows.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub x_orig: Vec<f64>,
    pub tau_reg: f64,
    pub seed: u64,
    atb: Vec<f64>,
}

/// Draws an instance. `A` starts with i.i.d. `N(0, 1e-3)` entries and its
/// rows are orthonormalized through a QR factorization of `Aᵀ`.
pub fn generate_instance(
    n: usize,
    k: usize,
    m: usize,
    sigma: f64,
    seed: u64,
) -> Result<CsInstance> {
    if n == 0 || m == 0 {
        return Err(contract(
            "signal length and measurement count must be positive",
        ));
    }
    if k > n {
        return Err(contract(format!("k = {k} exceeds n = {n}")));
    }
    if m > n {
        return Err(contract(format!("m = {m} exceeds n = {n}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(contract("noise level must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = ENTRY_VARIANCE.sqrt();
    let gauss = |rng: &mut ChaCha8Rng| sd * rng.sample::<f64, _>(StandardNormal);

    let mut x_orig = vec![0.0; n];
    for pos in index::sample(&mut rng, n, k) {
        let mut v = gauss(&mut rng);
        while v == 0.0 {
            v = gauss(&mut rng);
        }
        x_orig[pos] = v;
    }

    // Column-major n × m buffer of Aᵀ; its thin Q has orthonormal columns.
    let raw: Vec<f64> = (0..n * m).map(|_| gauss(&mut rng)).collect();
    let q = DMatrix::from_vec(n, m, raw).qr().q();
    let mut a = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            a[i * n + j] = q[(j, i)];
        }
    }

    let mut b = mat_vec(&a, m, n, &x_orig);
    if sigma > 0.0 {
        for bi in &mut b {
            *bi += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let atb = mat_t_vec(&a, m, n, &b);
    let tau_reg = 0.01 * norm_inf(&atb);
    Ok(CsInstance {
        n,
        k,
        m,
        sigma,
        a,
        b,
        x_orig,
        tau_reg,
        seed,
        atb,
    })
}

impl CsInstance {
    /// Assembles an instance from explicit data (row-major `A`).
    pub fn from_parts(
        a: Vec<f64>,
        m: usize,
        n: usize,
        b: Vec<f64>,
        tau_reg: f64,
        x_orig: Vec<f64>,
    ) -> Result<Self> {
        if a.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: a.len(),
            });
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: b.len(),
            });
        }
        if x_orig.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x_orig.len(),
            });
        }
        if !(tau_reg > 0.0) {
            return Err(contract("regularization weight must be positive"));
        }
        let atb = mat_t_vec(&a, m, n, &b);
        Ok(Self {
            n,
            k: x_orig.iter().filter(|&&v| v != 0.0).count(),
            m,
            sigma: 0.0,
            a,
            b,
            x_orig,
            tau_reg,
            seed: 0,
            atb,
        })
    }

    pub fn atb(&self) -> &[f64] {
        &self.atb
    }

    /// Largest entry of `|AAᵀ − I|`.
    pub fn row_orthonormality_error(&self) -> f64 {
        let (m, n) = (self.m, self.n);
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in i..m {
                let d: f64 = (0..n).map(|c| self.a[i * n + c] * self.a[j * n + c]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    pub fn operator(&self) -> LcpOperator<'_> {
        LcpOperator::new(self)
    }
}

fn mat_vec(a: &[f64], m: usize, n: usize, x: &[f64]) -> Vec<f64> {
    a.chunks_exact(n)
        .take(m)
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

fn mat_t_vec(a: &[f64], m: usize, n: usize, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (row, &ui) in a.chunks_exact(n).take(m).zip(u) {
        for (o, &aij) in out.iter_mut().zip(row) {
            *o += aij * ui;
        }
    }
    out
}

/// `z ↦ min{z, Qz + c}` on ℝ²ⁿ₊.
pub struct LcpOperator<'a> {
    inst: &'a CsInstance,
    c: Vec<f64>,
    set: FeasibleSet,
}

impl<'a> LcpOperator<'a> {
    pub fn new(inst: &'a CsInstance) -> Self {
        let n = inst.n;
        let mut c = vec![inst.tau_reg; 2 * n];
        for j in 0..n {
            c[j] -= inst.atb[j];
            c[n + j] += inst.atb[j];
        }
        Self {
            inst,
            c,
            set: FeasibleSet::nonnegative(2 * n),
        }
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `z₀ = (max{Aᵀb, 0}; max{−Aᵀb, 0})`.
    pub fn initial_point(&self) -> Vec<f64> {
        let atb = &self.inst.atb;
        atb.iter()
            .map(|&v| v.max(0.0))
            .chain(atb.iter().map(|&v| (-v).max(0.0)))
            .collect()
    }
}

impl MonotoneSystem for LcpOperator<'_> {
    fn dim(&self) -> usize {
        2 * self.inst.n
    }

    fn constraint(&self) -> &FeasibleSet {
        &self.set
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) {
        let (m, n, a) = (self.inst.m, self.inst.n, &self.inst.a);
        let (z1, z2) = z.split_at(n);
        let u: Vec<f64> = a
            .chunks_exact(n)
            .take(m)
            .map(|row| {
                row.iter()
                    .zip(z1.iter().zip(z2))
                    .map(|(aij, (p, q))| aij * (p - q))
                    .sum()
            })
            .collect();
        let (w, rest) = out.split_at_mut(n);
        w.fill(0.0);
        for (row, &ui) in a.chunks_exact(n).zip(&u) {
            for (o, &aij) in w.iter_mut().zip(row) {
                *o += aij * ui;
            }
        }
        for j in 0..n {
            let wj = w[j];
            rest[j] = z[n + j].min(-wj + self.c[n + j]);
            w[j] = z[j].min(wj + self.c[j]);
        }
    }
}

/// Solves the complementarity form and returns `x = z₁ − z₂`.
///
/// The configuration's tolerance and iteration cap are replaced by
/// [`RECOVERY_EPSILON`] and [`RECOVERY_MAX_ITER`].
pub fn recover(inst: &CsInstance, cfg: &MethodConfig) -> Result<(Vec<f64>, SolveReport)> {
    let mut cfg = cfg.clone();
    cfg.epsilon = RECOVERY_EPSILON;
    cfg.max_iter = RECOVERY_MAX_ITER;
    let op = inst.operator();
    let report = solve(&op, &op.initial_point(), &cfg)?;
    let n = inst.n;
    let x = (0..n)
        .map(|j| report.solution[j] - report.solution[n + j])
        .collect();
    Ok((x, report))
}

/// `‖x_orig − x_rec‖ / n` (a norm, not a squared norm).
pub fn mse(x_orig: &[f64], x_rec: &[f64]) -> Result<f64> {
    if x_orig.len() != x_rec.len() {
        return Err(Error::DimensionMismatch {
            expected: x_orig.len(),
            got: x_rec.len(),
        });
    }
    if x_orig.is_empty() {
        return Err(contract("mse of empty vectors"));
    }
    Ok(crate::linalg::dist(x_orig, x_rec) / x_orig.len() as f64)
}

/// Soft-threshold `S_τ(v)`, the closed-form minimizer when `A = I`.
pub fn soft_threshold(v: &[f64], tau: f64) -> Vec<f64> {
    v.iter()
        .map(|&x| x.signum() * (x.abs() - tau).max(0.0))
        .collect()
}

/// One recovery run; one row of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsRecord {
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub sigma: f64,
    pub trial: usize,
    pub status: Status,
    pub it: usize,
    pub fe: usize,
    pub cpu_s: f64,
    pub mse: f64,
}

/// One `(k, m, σ)` point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub sigma: f64,
}

impl CsConfig {
    pub fn from_ratios(n: usize, k_ratio: f64, m_ratio: f64, sigma: f64) -> Self {
        Self {
            n,
            k: (k_ratio * n as f64).round() as usize,
            m: ((m_ratio * n as f64).round() as usize).max(1),
            sigma,
        }
    }
}

/// The 48 sweep configurations at signal length `n`.
pub fn sweep_configs(n: usize) -> Vec<CsConfig> {
    let mut out = Vec::with_capacity(48);
    for &kr in &SWEEP_SPARSITY {
        for &mr in &SWEEP_MEASUREMENT {
            for &s in &SWEEP_NOISE {
                out.push(CsConfig::from_ratios(n, kr, mr, s));
            }
        }
    }
    out
}

/// Seed of trial `trial` of configuration `cfg_idx` under a base seed.
pub fn trial_seed(seed: u64, cfg_idx: usize, trial: usize) -> u64 {
    seed.wrapping_add(((cfg_idx as u64) << 20 | trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs every method on `trials` instances of every configuration. All
/// methods see the same instance for a given `(configuration, trial)`.
pub fn run_trials(
    configs: &[CsConfig],
    methods: &[MethodConfig],
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<CsRecord>> {
    for c in methods {
        c.validate()?;
    }
    let cells: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|ci| (0..trials).map(move |t| (ci, t)))
        .collect();
    let rows = par_map(&cells, workers, |&(ci, trial)| -> Result<Vec<CsRecord>> {
        let c = configs[ci];
        let inst = generate_instance(c.n, c.k, c.m, c.sigma, trial_seed(seed, ci, trial))?;
        methods
            .iter()
            .map(|cfg| {
                let (x, rep) = recover(&inst, cfg)?;
                Ok(CsRecord {
                    method: cfg.method.name().to_string(),
                    n: c.n,
                    k: c.k,
                    m: c.m,
                    sigma: c.sigma,
                    trial,
                    status: rep.status,
                    it: rep.iterations,
                    fe: rep.function_evals,
                    cpu_s: rep.wall_time_s,
                    mse: mse(&inst.x_orig, &x)?,
                })
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Per-method medians over all records (all runs, not just converged ones).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsSummary {
    pub method: String,
    pub runs: usize,
    pub converged: usize,
    pub median_it: Option<f64>,
    pub median_fe: Option<f64>,
    pub median_cpu: Option<f64>,
    pub median_mse: Option<f64>,
}

pub fn summarize(records: &[CsRecord]) -> Vec<CsSummary> {
    let mut methods: Vec<&str> = Vec::new();
    for r in records {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let mine: Vec<&CsRecord> = records.iter().filter(|r| r.method == m).collect();
            let col =
                |f: fn(&CsRecord) -> f64| median(&mine.iter().map(|r| f(r)).collect::<Vec<_>>());
            CsSummary {
                method: m.to_string(),
                runs: mine.len(),
                converged: mine.iter().filter(|r| r.status.is_converged()).count(),
                median_it: col(|r| r.it as f64),
                median_fe: col(|r| r.fe as f64),
                median_cpu: col(|r| r.cpu_s),
                median_mse: col(|r| r.mse),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Method;

    fn identity_instance() -> CsInstance {
        CsInstance::from_parts(
            vec![1.0, 0.0, 0.0, 1.0],
            2,
            2,
            vec![1.0, 0.0],
            0.1,
            vec![1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn identity_lcp_check() {
        let inst = identity_instance();
        let op = inst.operator();
        for (c, e) in op.c().iter().zip([-0.9, 0.1, 1.1, 0.1]) {
            assert!((c - e).abs() < 1e-15);
        }
        let g = op.value(&[0.9, 0.0, 0.0, 0.0]);
        assert!(g.iter().all(|v| v.abs() < 1e-15), "{g:?}");
        let g0 = op.value(&[0.0; 4]);
        let c = op.c();
        assert_eq!(g0, vec![c[0].min(0.0), 0.0, 0.0, 0.0]);
        assert_eq!(op.initial_point(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_instance_recovers_soft_threshold() {
        let inst = identity_instance();
        let target = soft_threshold(&inst.b, inst.tau_reg);
        for m in [Method::Gmopcgm, Method::Gcgpm] {
            let (x, rep) = recover(&inst, &MethodConfig::defaults(m)).unwrap();
            assert!(rep.status.is_converged(), "{m}: {:?}", rep.status);
            for (a, b) in x.iter().zip(&target) {
                assert!((a - b).abs() < 1e-4, "{m}: {x:?}");
            }
        }
    }

    #[test]
    fn generated_instance_invariants() {
        let inst = generate_instance(64, 6, 24, 1e-3, 5).unwrap();
        assert!(inst.row_orthonormality_error() < 1e-10);
        assert_eq!(inst.x_orig.iter().filter(|&&v| v != 0.0).count(), 6);
        let expect_tau = 0.01 * inst.atb().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert_eq!(inst.tau_reg, expect_tau);
    }

    #[test]
    fn noiseless_measurements_are_exact() {
        let inst = generate_instance(40, 4, 10, 0.0, 9).unwrap();
        assert_eq!(inst.b, mat_vec(&inst.a, 10, 40, &inst.x_orig));
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = generate_instance(32, 3, 8, 1e-2, 42).unwrap();
        let b = generate_instance(32, 3, 8, 1e-2, 42).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.b, b.b);
        assert_eq!(a.x_orig, b.x_orig);
        let c = generate_instance(32, 3, 8, 1e-2, 43).unwrap();
        assert_ne!(a.b, c.b);
    }

    #[test]
    fn bad_shapes_are_rejected() {
        assert!(generate_instance(10, 11, 5, 0.0, 1).is_err());
        assert!(generate_instance(10, 2, 11, 0.0, 1).is_err());
    }

    #[test]
    fn operator_is_monotone_on_samples() {
        let inst = generate_instance(30, 3, 12, 1e-3, 3).unwrap();
        let op = inst.operator();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let u: Vec<f64> = (0..60).map(|_| rng.random_range(0.0..0.2)).collect();
            let v: Vec<f64> = (0..60).map(|_| rng.random_range(0.0..0.2)).collect();
            let (gu, gv) = (op.value(&u), op.value(&v));
            let ip: f64 = (0..60).map(|i| (gu[i] - gv[i]) * (u[i] - v[i])).sum();
            assert!(ip >= -1e-10, "{ip}");
        }
    }

    #[test]
    fn zero_signal_recovers_zero() {
        let inst = generate_instance(48, 0, 16, 0.0, 2).unwrap();
        let (x, _) = recover(&inst, &MethodConfig::defaults(Method::Gcgpm)).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        let (u, v) = ([0.3, -1.2, 4.0], [0.1, 0.5, 3.0]);
        let base = mse(&u, &v).unwrap();
        let scaled = mse(&u.map(|x| -3.0 * x), &v.map(|x| -3.0 * x)).unwrap();
        assert!((scaled - 3.0 * base).abs() < 1e-14);
        let shifted = mse(&u.map(|x| x + 7.0), &v.map(|x| x + 7.0)).unwrap();
        assert!((shifted - base).abs() < 1e-14);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sweep_has_48_configurations() {
        let c = sweep_configs(4096);
        assert_eq!(c.len(), 48);
        assert!(c.contains(&CsConfig {
            n: 4096,
            k: 410,
            m: 2048,
            sigma: 1e-2
        }));
    }
}
