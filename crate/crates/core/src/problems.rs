//! Benchmark suite of constrained monotone equations and the standard
//! starting points.
//!
//! Problems 1–18 are indexed as in the usual benchmark table. Problem 16
//! ("minimal function") is only available on request, through
//! [`make_problem_with`], because its formulation is a documented substitute.
//! Tridiagonal formulas use the boundary convention `x₀ = xₙ₊₁ = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::dot;
use crate::system::MonotoneSystem;

/// Problem ids run by default (everything except 16).
pub const DEFAULT_SUITE: [u32; 17] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 17, 18];

/// Problem whose formulation is a documented substitute.
pub const SUBSTITUTE_ID: u32 = 16;

const TRIDIAGONAL: [u32; 5] = [4, 5, 6, 7, 14];

/// One benchmark mapping at a fixed dimension.
#[derive(Debug, Clone)]
pub struct MonotoneProblem {
    id: u32,
    dim: usize,
    constraint: FeasibleSet,
    known_solution: Option<Vec<f64>>,
    lipschitz_bound: Option<f64>,
}

/// Builds suite problem `id` in dimension `n`; id 16 is refused.
pub fn make_problem(id: u32, n: usize) -> Result<MonotoneProblem> {
    make_problem_with(id, n, false)
}

/// Like [`make_problem`], optionally admitting the problem-16 substitute.
pub fn make_problem_with(id: u32, n: usize, allow_substitute: bool) -> Result<MonotoneProblem> {
    if !(1..=18).contains(&id) {
        return Err(Error::UnknownProblem(id));
    }
    if id == SUBSTITUTE_ID && !allow_substitute {
        return Err(Error::ExplicitlyUnspecified(id));
    }
    if n == 0 {
        return Err(contract("problem dimension must be positive"));
    }
    if TRIDIAGONAL.contains(&id) && n < 3 {
        return Err(contract(format!(
            "problem {id} is tridiagonal and needs n >= 3"
        )));
    }
    let constraint = if id == SUBSTITUTE_ID {
        FeasibleSet::half_line(n, 1.0)?
    } else {
        FeasibleSet::nonnegative(n)
    };
    let known_solution = match id {
        1 | 2 | 3 | 4 | 15 | 18 => Some(vec![0.0; n]),
        9 => Some((1..=n).map(|i| (n as f64 / i as f64).ln()).collect()),
        _ => None,
    };
    let lipschitz_bound = match id {
        1 | 11 | 12 | 15 => Some(3.0),
        10 => Some(2.0),
        14 => Some(4.5),
        _ => None,
    };
    Ok(MonotoneProblem {
        id,
        dim: n,
        constraint,
        known_solution,
        lipschitz_bound,
    })
}

impl MonotoneProblem {
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn known_solution(&self) -> Option<&[f64]> {
        self.known_solution.as_deref()
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz_bound
    }

    pub fn summary(&self) -> &'static str {
        summary(self.id)
    }
}

/// One-line formula of problem `id`.
pub fn summary(id: u32) -> &'static str {
    match id {
        1 => "2x_i - sin x_i",
        2 => "log(x_i + 1) - x_i/n",
        3 => "exp(x_i) - 1",
        4 => "4x_i + (x_{i+1} - 2x_i) - x_{i-1}^2/3",
        5 => "x_i - exp(cos((i/n)(x_{i-1} + x_i + x_{i+1})))",
        6 => "-x_{i-1} + 2x_i + sin x_i - 1",
        7 => "x_i(x_{i-1}^2 + 2x_i^2 + x_{i+1}^2) - 1",
        8 => "(x_i - 1)^2 - 1.01",
        9 => "(i/n) exp(x_i) - 1",
        10 => "x_i - sin|x_i - 1|",
        11 => "2x_i - sin|x_i - 1|",
        12 => "x_i - 2 sin|x_i - 1|",
        13 => "exp(x_i)^2 + 3 sin x_i cos x_i - 1",
        14 => "x_{i-1} + 2.5x_i + x_{i+1} - 1",
        15 => "2x_i - sin|x_i|",
        16 => {
            "minimal function (substitute): (ln x_i + e^x_i - sqrt((ln x_i - e^x_i)^2 + 1e-10))/2"
        }
        17 => "2e-5(x_i - 1) + 4x_i sum x_j^2 - x_i",
        18 => "x_i cos(x_i - 1/n)(sin x_i - 1 - (1 - x_i)^2 - (1/n) sum x_j)",
        _ => "unknown",
    }
}

impl MonotoneSystem for MonotoneProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn constraint(&self) -> &FeasibleSet {
        &self.constraint
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let nf = n as f64;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        let left = |i: usize| if i == 0 { 0.0 } else { x[i - 1] };
        let right = |i: usize| if i + 1 == n { 0.0 } else { x[i + 1] };
        match self.id {
            1 => map(x, out, |v| 2.0 * v - v.sin()),
            2 => map(x, out, |v| v.ln_1p() - v / nf),
            3 => map(x, out, |v| v.exp_m1()),
            4 => {
                for i in 0..n {
                    let l = left(i);
                    out[i] = 4.0 * x[i] + (right(i) - 2.0 * x[i]) - l * l / 3.0;
                }
            }
            5 => {
                for i in 0..n {
                    let t = (i + 1) as f64 / nf;
                    out[i] = x[i] - (t * (left(i) + x[i] + right(i))).cos().exp();
                }
            }
            6 => {
                for i in 0..n {
                    out[i] = -left(i) + 2.0 * x[i] + x[i].sin() - 1.0;
                }
            }
            7 => {
                for i in 0..n {
                    let (l, r) = (left(i), right(i));
                    out[i] = x[i] * (l * l + 2.0 * x[i] * x[i] + r * r) - 1.0;
                }
            }
            8 => map(x, out, |v| (v - 1.0).powi(2) - 1.01),
            9 => {
                for i in 0..n {
                    out[i] = (i + 1) as f64 / nf * x[i].exp() - 1.0;
                }
            }
            10 => map(x, out, |v| v - (v - 1.0).abs().sin()),
            11 => map(x, out, |v| 2.0 * v - (v - 1.0).abs().sin()),
            12 => map(x, out, |v| v - 2.0 * (v - 1.0).abs().sin()),
            13 => map(x, out, |v| {
                let e = v.exp();
                e * e + 3.0 * v.sin() * v.cos() - 1.0
            }),
            14 => {
                for i in 0..n {
                    out[i] = left(i) + 2.5 * x[i] + right(i) - 1.0;
                }
            }
            15 => map(x, out, |v| 2.0 * v - v.abs().sin()),
            16 => map(x, out, |v| {
                let (l, e) = (v.ln(), v.exp());
                0.5 * (l + e - ((l - e).powi(2) + 1e-10).sqrt())
            }),
            17 => {
                let s = dot(x, x);
                map(x, out, |v| 2e-5 * (v - 1.0) + 4.0 * v * s - v);
            }
            18 => {
                let mean = x.iter().sum::<f64>() / nf;
                map(x, out, |v| {
                    v * (v - 1.0 / nf).cos() * (v.sin() - 1.0 - (1.0 - v).powi(2) - mean)
                });
            }
            _ => unreachable!("ids are validated at construction"),
        }
    }
}

#[inline]
fn map(x: &[f64], out: &mut [f64], f: impl Fn(f64) -> f64) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o = f(v);
    }
}

const CONSTANT_STARTS: [f64; 8] = [0.4, 0.5, 0.6, 0.8, 1.0, 1.1, 2.0, 5.0];

/// The ten standard starting points in fixed order: eight constant vectors,
/// then `(1, 1/2, …, 1/n)` and `(1/n, 2/n, …, 1)`.
pub fn starting_points(n: usize) -> Vec<Vec<f64>> {
    (1..=10)
        .map(|id| starting_point(n, id).expect("ids 1..=10 are valid"))
        .collect()
}

/// Starting point `start_id` (1-based) in dimension `n`.
pub fn starting_point(n: usize, start_id: usize) -> Result<Vec<f64>> {
    let nf = n as f64;
    match start_id {
        1..=8 => Ok(vec![CONSTANT_STARTS[start_id - 1]; n]),
        9 => Ok((1..=n).map(|i| 1.0 / i as f64).collect()),
        10 => Ok((1..=n).map(|i| i as f64 / nf).collect()),
        _ => Err(contract(format!(
            "start id must be in 1..=10, got {start_id}"
        ))),
    }
}

/// Smallest `⟨G(x) − G(y), x − y⟩` over `pairs` random feasible pairs drawn
/// from the set intersected with the box `[lo, lo + 5]ⁿ`.
pub fn sampled_monotonicity(problem: &MonotoneProblem, pairs: usize, seed: u64) -> f64 {
    let n = problem.dim;
    let lo = match problem.constraint.kind() {
        crate::geometry::SetKind::HalfLineProduct { lower } => lower,
        _ => 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    for _ in 0..pairs {
        let x: Vec<f64> = (0..n).map(|_| lo + rng.random_range(0.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| lo + rng.random_range(0.0..5.0)).collect();
        problem.eval(&x, &mut gx);
        problem.eval(&y, &mut gy);
        let ip: f64 = (0..n).map(|i| (gx[i] - gy[i]) * (x[i] - y[i])).sum();
        worst = worst.min(ip);
    }
    worst
}
