//! Box-constrained ℓ₂-regularized logistic regression posed as the monotone
//! equation `∇f(x) = 0` over `[−C, C]ⁿ`, where
//! `f(x) = (1/N) Σ log(1 + exp(−bᵢ aᵢᵀx)) + (μ/2)‖x‖²`.
//!
//! Datasets come in LIBSVM text format, e.g. from
//! <https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary.html>.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::{dot, norm_sq};
use crate::solver::{solve, MethodConfig, SolveReport, Status};
use crate::system::MonotoneSystem;

pub const DEFAULT_MU: f64 = 0.1;
pub const DEFAULT_BOX_C: f64 = 10.0;
pub const TRAIN_EPSILON: f64 = 1e-11;
pub const TRAIN_MAX_ITER: usize = 5000;

/// Features with a population standard deviation below this are zeroed.
pub const MIN_STD: f64 = 1e-12;

/// Sparse samples as read from a LIBSVM file; indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n_features: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    /// `±1`.
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.labels.len()
    }

    pub fn to_dense(&self) -> DenseDataset {
        let n = self.n_features;
        let mut values = vec![0.0; self.samples() * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                values[i * n + j] = v;
            }
        }
        DenseDataset {
            n_features: n,
            values,
            labels: self.labels.clone(),
        }
    }
}

/// Parses LIBSVM text. Labels `0`/`-1` map to −1 and `1`/`+1` to +1. The
/// feature count is the largest index seen unless `n_features` is given.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let err = |message: String| Error::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("non-numeric label '{label_tok}'")))?;
        let label = match label {
            l if l == 1.0 => 1.0,
            l if l == -1.0 || l == 0.0 => -1.0,
            _ => return Err(err(format!("unknown label '{label_tok}'"))),
        };
        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, got '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("non-numeric feature index '{idx}'")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(err(format!("feature index {idx} does not increase")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("non-numeric feature value '{val}'")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite feature value '{val}'")));
            }
            prev = idx;
            row.push((idx - 1, val));
        }
        max_index = max_index.max(prev);
        rows.push(row);
        labels.push(label);
    }
    let n = match n_features {
        Some(n) if n < max_index => {
            return Err(contract(format!(
                "feature index {max_index} exceeds the declared count {n}"
            )))
        }
        Some(n) => n,
        None => max_index,
    };
    Ok(Dataset {
        n_features: n,
        rows,
        labels,
    })
}

/// Dense row-major samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDataset {
    pub n_features: usize,
    pub values: Vec<f64>,
    pub labels: Vec<f64>,
}

impl DenseDataset {
    pub fn new(n_features: usize, values: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if values.len() != n_features * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: n_features * labels.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            n_features,
            values,
            labels,
        })
    }

    pub fn samples(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_features;
        &self.values[i * n..(i + 1) * n]
    }

    /// Zero mean, unit population variance per feature; near-constant
    /// features become zero.
    pub fn standardized(&self) -> Result<Self> {
        let (rows, n) = (self.samples(), self.n_features);
        if rows < 2 {
            return Err(contract("standardization needs at least two samples"));
        }
        let mut out = self.values.clone();
        for j in 0..n {
            let mean = (0..rows).map(|i| self.values[i * n + j]).sum::<f64>() / rows as f64;
            let var = (0..rows)
                .map(|i| (self.values[i * n + j] - mean).powi(2))
                .sum::<f64>()
                / rows as f64;
            let std = var.sqrt();
            for i in 0..rows {
                out[i * n + j] = if std < MIN_STD {
                    0.0
                } else {
                    (self.values[i * n + j] - mean) / std
                };
            }
        }
        Ok(Self {
            n_features: n,
            values: out,
            labels: self.labels.clone(),
        })
    }
}

/// Densifies and standardizes a parsed dataset.
pub fn standardize(ds: &Dataset) -> Result<DenseDataset> {
    ds.to_dense().standardized()
}

/// Gradient map of the regularized logistic loss over `Box(−C, C)`.
#[derive(Debug, Clone)]
pub struct LogRegProblem {
    pub data: DenseDataset,
    pub mu: f64,
    pub box_c: f64,
    set: FeasibleSet,
}

impl LogRegProblem {
    pub fn new(data: DenseDataset, mu: f64, box_c: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(box_c > 0.0 && box_c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "C must be positive, got {box_c}"
            )));
        }
        if data.samples() == 0 || data.n_features == 0 {
            return Err(contract("dataset must have samples and features"));
        }
        let set = FeasibleSet::boxed(data.n_features, -box_c, box_c)?;
        Ok(Self {
            data,
            mu,
            box_c,
            set,
        })
    }

    /// Regularized mean logistic loss.
    pub fn loss(&self, x: &[f64]) -> f64 {
        let rows = self.data.samples();
        let total: f64 = (0..rows)
            .map(|i| softplus(-self.data.labels[i] * dot(self.data.row(i), x)))
            .sum();
        total / rows as f64 + 0.5 * self.mu * norm_sq(x)
    }

    /// Fraction of samples with `sign(aᵢᵀx) = bᵢ`, counting `sign(0)` as +1.
    pub fn accuracy(&self, x: &[f64]) -> f64 {
        let rows = self.data.samples();
        let hits = (0..rows)
            .filter(|&i| {
                let pred = if dot(self.data.row(i), x) >= 0.0 {
                    1.0
                } else {
                    -1.0
                };
                pred == self.data.labels[i]
            })
            .count();
        hits as f64 / rows as f64
    }
}

/// `log(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + eᵐ)` without overflow.
fn inv_one_plus_exp(m: f64) -> f64 {
    if m >= 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

impl MonotoneSystem for LogRegProblem {
    fn dim(&self) -> usize {
        self.data.n_features
    }

    fn constraint(&self) -> &FeasibleSet {
        &self.set
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let rows = self.data.samples();
        let scale = 1.0 / rows as f64;
        out.fill(0.0);
        for i in 0..rows {
            let row = self.data.row(i);
            let b = self.data.labels[i];
            let coef = -b * inv_one_plus_exp(b * dot(row, x)) * scale;
            for (o, &a) in out.iter_mut().zip(row) {
                *o += coef * a;
            }
        }
        for (o, &v) in out.iter_mut().zip(x) {
            *o += self.mu * v;
        }
    }
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub x0: Vec<f64>,
    pub report: SolveReport,
    pub accuracy: f64,
}

/// `x₀ = 4(ξ − ½)` with `ξ` uniform on `[0, 1)ⁿ`.
pub fn initial_point(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| 4.0 * (rng.random::<f64>() - 0.5)).collect()
}

/// Solves `∇f(x) = 0` over the box from a seeded random start. The
/// configuration's tolerance and iteration cap are replaced by
/// [`TRAIN_EPSILON`] and [`TRAIN_MAX_ITER`].
pub fn train(problem: &LogRegProblem, cfg: &MethodConfig, seed: u64) -> Result<TrainOutcome> {
    let mut cfg = cfg.clone();
    cfg.epsilon = TRAIN_EPSILON;
    cfg.max_iter = TRAIN_MAX_ITER;
    let x0 = initial_point(problem.dim(), seed);
    let report = solve(problem, &x0, &cfg)?;
    let accuracy = problem.accuracy(&report.solution);
    Ok(TrainOutcome {
        x0,
        report,
        accuracy,
    })
}

/// One row of the training CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRegRecord {
    pub dataset: String,
    pub method: String,
    pub trial: usize,
    pub status: Status,
    pub it: usize,
    pub fe: usize,
    pub cpu_s: f64,
    pub final_residual: f64,
    pub accuracy: f64,
}

/// Trains every method for `trials` seeded starts; trial `t` uses seed
/// `seed + t` for all methods.
pub fn run_trials(
    problem: &LogRegProblem,
    dataset: &str,
    methods: &[MethodConfig],
    trials: usize,
    seed: u64,
) -> Result<Vec<LogRegRecord>> {
    let mut out = Vec::new();
    for cfg in methods {
        cfg.validate()?;
        for trial in 0..trials {
            let o = train(problem, cfg, seed.wrapping_add(trial as u64))?;
            out.push(LogRegRecord {
                dataset: dataset.to_string(),
                method: cfg.method.name().to_string(),
                trial,
                status: o.report.status,
                it: o.report.iterations,
                fe: o.report.function_evals,
                cpu_s: o.report.wall_time_s,
                final_residual: o.report.final_residual,
                accuracy: o.accuracy,
            });
        }
    }
    Ok(out)
}

/// Gaussian features with labels from a noisy random linear rule; a small
/// reproducible stand-in for real data.
pub fn synthetic_dataset(samples: usize, features: usize, seed: u64) -> DenseDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
    let mut values = Vec::with_capacity(samples * features);
    let mut labels = Vec::with_capacity(samples);
    for _ in 0..samples {
        let row: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
        let noise: f64 = rng.sample(StandardNormal);
        labels.push(if dot(&row, &w) + noise >= 0.0 {
            1.0
        } else {
            -1.0
        });
        values.extend(row);
    }
    DenseDataset {
        n_features: features,
        values,
        labels,
    }
}
