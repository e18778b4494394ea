//! Derivative-free projection iteration shared by GMOPCGM and GCGPM.
//!
//! Each iteration builds a sufficient-descent direction, backtracks along it
//! until the derivative-free acceptance test holds, and then projects the
//! current iterate onto the separating hyperplane through the trial point
//! (relaxed by γ) followed by the feasible set.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::directions::{
    direction_gcgpm_into, direction_gmop_into, gcgpm_auxiliaries_into, spectral_lambda_gcgpm,
    spectral_lambda_gmop, DirectionStateGmop,
};
use crate::error::{contract, Error, Result};
use crate::geometry::{clamp, FeasibleSet};
use crate::linalg::{add_scaled, all_finite, dot, norm, norm_sq, sub};
use crate::system::MonotoneSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Generalized modified optimal Perry CG with spectral λₖ.
    #[serde(rename = "gmopcgm")]
    Gmopcgm,
    /// Generalized Hager–Zhang/Dai–Liao CG projection with spectral λₖ.
    #[serde(rename = "gcgpm")]
    Gcgpm,
    /// GMOPCGM direction with λ frozen at 1.
    #[serde(rename = "gmop-fixed")]
    FixedLambdaGmop,
    /// GCGPM direction with λ frozen at 2.
    #[serde(rename = "gcg-fixed")]
    FixedLambdaGcg,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Gmopcgm,
        Method::Gcgpm,
        Method::FixedLambdaGmop,
        Method::FixedLambdaGcg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gmopcgm => "gmopcgm",
            Method::Gcgpm => "gcgpm",
            Method::FixedLambdaGmop => "gmop-fixed",
            Method::FixedLambdaGcg => "gcg-fixed",
        }
    }

    fn is_gmop_family(self) -> bool {
        matches!(self, Method::Gmopcgm | Method::FixedLambdaGmop)
    }

    /// The frozen λ of the ablation variants.
    pub fn fixed_lambda(self) -> Option<f64> {
        match self {
            Method::FixedLambdaGmop => Some(1.0),
            Method::FixedLambdaGcg => Some(2.0),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

/// Algorithm selector plus every tunable of the iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodConfig {
    pub method: Method,
    /// Residual tolerance ε.
    pub epsilon: f64,
    /// Backtracking factor ρ.
    pub rho: f64,
    /// Initial trial step (β for GMOPCGM, η for GCGPM).
    pub step0: f64,
    /// Line-search constant ζ.
    pub zeta: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub tau: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Initial projection relaxation γ.
    pub gamma0: f64,
    pub gamma_cap: f64,
    pub gamma_growth: f64,
    /// Threshold c of the lazy λ rule.
    pub lambda_lazy_c: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub adaptive_gamma: bool,
    pub lazy_lambda: bool,
    /// Keep ‖G(xₖ)‖ for every iterate in the report.
    pub record_history: bool,
}

impl MethodConfig {
    /// Tuned parameter set of each method, with both practical enhancements
    /// (adaptive γ, lazy λ) switched on.
    pub fn defaults(method: Method) -> Self {
        if method.is_gmop_family() {
            Self {
                method,
                epsilon: 1e-11,
                rho: 0.8,
                step0: 0.5,
                zeta: 1e-4,
                zeta1: 1.0,
                zeta2: 1.0,
                tau: 1.0,
                alpha_min: 0.1,
                alpha_max: 2.0,
                gamma0: 1.1,
                gamma_cap: 1.8,
                gamma_growth: 1.1,
                lambda_lazy_c: 0.75,
                max_iter: 2000,
                max_backtracks: 60,
                adaptive_gamma: true,
                lazy_lambda: true,
                record_history: false,
            }
        } else {
            Self {
                method,
                epsilon: 1e-11,
                rho: 0.5,
                step0: 0.6,
                zeta: 0.1,
                zeta1: 1.0,
                zeta2: 1.0,
                tau: 0.001,
                alpha_min: 0.55,
                alpha_max: 4.9,
                gamma0: 1.8,
                gamma_cap: 1.7,
                gamma_growth: 1.1,
                lambda_lazy_c: 0.6,
                max_iter: 2000,
                max_backtracks: 60,
                adaptive_gamma: true,
                lazy_lambda: true,
                record_history: false,
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("epsilon", self.epsilon),
            ("step0", self.step0),
            ("zeta", self.zeta),
            ("zeta1", self.zeta1),
            ("alpha_min", self.alpha_min),
            ("lambda_lazy_c", self.lambda_lazy_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0,1), got {}", self.rho));
        }
        if !(self.zeta1 <= self.zeta2 && self.zeta2.is_finite()) {
            return bad(format!(
                "need 0 < zeta1 <= zeta2, got {} and {}",
                self.zeta1, self.zeta2
            ));
        }
        if !(self.alpha_min <= self.alpha_max && self.alpha_max.is_finite()) {
            return bad(format!(
                "need 0 < alpha_min <= alpha_max, got {} and {}",
                self.alpha_min, self.alpha_max
            ));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 2.0) {
            return bad(format!("gamma0 must lie in (0,2), got {}", self.gamma0));
        }
        if !(self.gamma_cap > 0.0 && self.gamma_cap < 2.0) {
            return bad(format!(
                "gamma_cap must lie in (0,2), got {}",
                self.gamma_cap
            ));
        }
        if !(self.gamma_growth >= 1.0 && self.gamma_growth.is_finite()) {
            return bad(format!(
                "gamma_growth must be >= 1, got {}",
                self.gamma_growth
            ));
        }
        if self.method.is_gmop_family() {
            if !(self.tau > 0.0 && self.tau.is_finite()) {
                return bad(format!(
                    "tau must be positive for {}, got {}",
                    self.method, self.tau
                ));
            }
        } else {
            let lambda_floor = self.method.fixed_lambda().unwrap_or(self.alpha_min);
            if !(lambda_floor > (1.0 + self.tau) / 2.0) {
                return bad(format!(
                    "{} requires alpha_min > (1+tau)/2 for sufficient descent, got alpha_min={} and (1+tau)/2={}",
                    self.method,
                    lambda_floor,
                    (1.0 + self.tau) / 2.0
                ));
            }
            if !(0.0..=1.0).contains(&self.tau) {
                return bad(format!(
                    "tau must lie in [0,1] for {}, got {}",
                    self.method, self.tau
                ));
            }
        }
        if let Some(l) = self.method.fixed_lambda() {
            if !(self.alpha_min..=self.alpha_max).contains(&l) {
                return bad(format!(
                    "{} freezes lambda at {l}, outside [alpha_min, alpha_max]",
                    self.method
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    ConvergedAtTrialPoint,
    MaxIterations,
    LineSearchFailure,
    DirectionTooSmall,
    NonFinite,
}

impl Status {
    pub fn is_converged(self) -> bool {
        matches!(self, Status::Converged | Status::ConvergedAtTrialPoint)
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::ConvergedAtTrialPoint => "converged_at_trial_point",
            Status::MaxIterations => "max_iterations",
            Status::LineSearchFailure => "line_search_failure",
            Status::DirectionTooSmall => "direction_too_small",
            Status::NonFinite => "non_finite",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Status::*;
        [
            Converged,
            ConvergedAtTrialPoint,
            MaxIterations,
            LineSearchFailure,
            DirectionTooSmall,
            NonFinite,
        ]
        .into_iter()
        .find(|st| st.name() == s.trim())
        .ok_or_else(|| Error::InvalidConfig(format!("unknown status '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub iterations: usize,
    pub function_evals: usize,
    pub wall_time_s: f64,
    pub final_residual: f64,
    pub solution: Vec<f64>,
    /// Directions replaced by `-λ G` after a breakdown.
    pub restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_history: Option<Vec<f64>>,
}

/// Snapshot handed to the observer once per completed line search.
#[derive(Debug, Clone, Copy)]
pub struct IterationInfo<'a> {
    pub k: usize,
    pub x: &'a [f64],
    pub g: &'a [f64],
    pub g_norm: f64,
    pub p: &'a [f64],
    pub p_norm: f64,
    pub g_dot_p: f64,
    /// λ that built `p` (1 at k = 0, where p = −G).
    pub lambda: f64,
    /// γ used by this iteration's projection.
    pub gamma: f64,
    pub alpha: f64,
    pub z: &'a [f64],
    pub restarted: bool,
    /// `None` when the trial point was returned as the solution.
    pub x_next: Option<&'a [f64]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub z: Vec<f64>,
    pub g_z: Vec<f64>,
    /// Evaluations of G consumed.
    pub trials: usize,
}

/// No step `ρⁱ·step0`, `i ≤ max_backtracks`, passed the acceptance test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineSearchFailed {
    pub trials: usize,
}

/// Backtracking search for the largest `α = ρⁱ·step0` with
/// `G(x+αp)ᵀp ≤ −ζ α ‖p‖² clamp(‖G(x+αp)‖, ζ₁, ζ₂)`.
pub fn line_search<P: MonotoneSystem + ?Sized>(
    problem: &P,
    x: &[f64],
    p: &[f64],
    cfg: &MethodConfig,
) -> std::result::Result<LineSearchStep, LineSearchFailed> {
    let n = x.len();
    let mut z = vec![0.0; n];
    let mut g_z = vec![0.0; n];
    let (alpha, trials) = line_search_into(problem, x, p, cfg, &mut z, &mut g_z)?;
    Ok(LineSearchStep {
        alpha,
        z,
        g_z,
        trials,
    })
}

fn line_search_into<P: MonotoneSystem + ?Sized>(
    problem: &P,
    x: &[f64],
    p: &[f64],
    cfg: &MethodConfig,
    z: &mut [f64],
    g_z: &mut [f64],
) -> std::result::Result<(f64, usize), LineSearchFailed> {
    let pp = norm_sq(p);
    let mut alpha = cfg.step0;
    for i in 0..=cfg.max_backtracks {
        add_scaled(z, x, alpha, p);
        problem.eval(z, g_z);
        let lhs = dot(g_z, p);
        let rhs = -cfg.zeta * alpha * pp * clamp(cfg.zeta1, cfg.zeta2, norm(g_z));
        // a non-finite trial value fails the comparison and triggers backtracking
        if lhs <= rhs {
            return Ok((alpha, i + 1));
        }
        alpha *= cfg.rho;
    }
    Err(LineSearchFailed {
        trials: cfg.max_backtracks + 1,
    })
}

/// `Π(x − γ μ G(z))` with `μ = G(z)ᵀ(x − z)/‖G(z)‖²`.
pub fn hyperplane_step(
    x: &[f64],
    z: &[f64],
    g_z: &[f64],
    gamma: f64,
    set: &FeasibleSet,
) -> Result<Vec<f64>> {
    if let Some(&got) = [x.len(), z.len(), g_z.len()]
        .iter()
        .find(|&&l| l != set.dim())
    {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got,
        });
    }
    let gg = norm_sq(g_z);
    if gg == 0.0 {
        return Err(contract("hyperplane step needs G(z) != 0"));
    }
    let mut out = vec![0.0; x.len()];
    hyperplane_step_into(x, z, g_z, gg, gamma, set, &mut out);
    Ok(out)
}

fn hyperplane_step_into(
    x: &[f64],
    z: &[f64],
    g_z: &[f64],
    gg: f64,
    gamma: f64,
    set: &FeasibleSet,
    out: &mut [f64],
) {
    let mut num = 0.0;
    for i in 0..x.len() {
        num += g_z[i] * (x[i] - z[i]);
    }
    let mu = num / gg;
    add_scaled(out, x, -gamma * mu, g_z);
    set.project_in_place(out);
}

/// Grows γ by `gamma_growth` (capped) after a residual decrease; otherwise
/// keeps it.
pub fn adaptive_gamma(gamma: f64, g_norm_new: f64, g_norm_old: f64, cfg: &MethodConfig) -> f64 {
    if g_norm_new < g_norm_old {
        (cfg.gamma_growth * gamma).min(cfg.gamma_cap)
    } else {
        gamma
    }
}

/// Adopts the candidate λ only while the residual is not dropping fast.
pub fn lazy_lambda(
    current_lambda: f64,
    candidate_lambda: f64,
    g_norm_new: f64,
    g_norm_old: f64,
    c: f64,
) -> f64 {
    if g_norm_new >= c * g_norm_old {
        candidate_lambda
    } else {
        current_lambda
    }
}

/// Runs the method until one of the stopping rules fires.
pub fn solve<P: MonotoneSystem + ?Sized>(
    problem: &P,
    x0: &[f64],
    cfg: &MethodConfig,
) -> Result<SolveReport> {
    solve_observed(problem, x0, cfg, |_| {})
}

/// [`solve`] with a callback invoked after every successful line search.
pub fn solve_observed<P, F>(
    problem: &P,
    x0: &[f64],
    cfg: &MethodConfig,
    mut observe: F,
) -> Result<SolveReport>
where
    P: MonotoneSystem + ?Sized,
    F: FnMut(&IterationInfo<'_>),
{
    cfg.validate()?;
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if !all_finite(x0) {
        return Err(contract("starting point must be finite"));
    }
    let set = *problem.constraint();
    let start = Instant::now();

    let mut x = x0.to_vec();
    set.project_in_place(&mut x);
    let mut g = vec![0.0; n];
    problem.eval(&x, &mut g);
    let mut fe = 1usize;
    let mut g_norm = norm(&g);

    let mut g_prev = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_prev = vec![0.0; n];
    let mut s_prev = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut g_z = vec![0.0; n];
    let mut x_next = vec![0.0; n];
    let mut g_next = vec![0.0; n];
    let mut scratch_a = vec![0.0; n];
    let mut scratch_b = vec![0.0; n];

    let mut lambda = cfg.method.fixed_lambda().unwrap_or(1.0);
    let mut gamma = cfg.gamma0;
    let mut g_prev_norm = g_norm;
    let mut restarts = 0usize;
    let mut history = cfg.record_history.then(|| vec![g_norm]);
    let mut k = 0usize;

    let finish = |status: Status,
                  k: usize,
                  fe: usize,
                  residual: f64,
                  solution: Vec<f64>,
                  restarts: usize,
                  history: Option<Vec<f64>>| SolveReport {
        status,
        iterations: k,
        function_evals: fe,
        wall_time_s: start.elapsed().as_secs_f64(),
        final_residual: residual,
        solution,
        restarts,
        residual_history: history,
    };

    loop {
        if !g_norm.is_finite() {
            return Ok(finish(
                Status::NonFinite,
                k,
                fe,
                g_norm,
                x,
                restarts,
                history,
            ));
        }
        if g_norm < cfg.epsilon {
            return Ok(finish(
                Status::Converged,
                k,
                fe,
                g_norm,
                x,
                restarts,
                history,
            ));
        }
        if k >= cfg.max_iter {
            return Ok(finish(
                Status::MaxIterations,
                k,
                fe,
                g_norm,
                x,
                restarts,
                history,
            ));
        }

        let mut restarted = false;
        let lambda_used;
        if k == 0 {
            for (pi, gi) in p.iter_mut().zip(&g) {
                *pi = -gi;
            }
            lambda_used = 1.0;
        } else {
            let fixed = cfg.method.fixed_lambda();
            let built = if cfg.method.is_gmop_family() {
                // scratch_a holds v = y + τ s
                for i in 0..n {
                    scratch_a[i] = g[i] - g_prev[i] + cfg.tau * s_prev[i];
                }
                let spectral = match fixed {
                    Some(l) => Ok(l),
                    None => spectral_lambda_gmop(&s_prev, &scratch_a, cfg.alpha_min, cfg.alpha_max),
                };
                spectral.and_then(|cand| {
                    lambda = next_lambda(cfg, lambda, cand, g_norm, g_prev_norm);
                    let state = DirectionStateGmop {
                        s_prev: &s_prev,
                        g_prev: &g_prev,
                        p_prev: &p_prev,
                        lambda,
                        tau: cfg.tau,
                    };
                    direction_gmop_into(&g, &state, &mut p)
                })
            } else {
                // scratch_a holds y, scratch_b holds w
                gcgpm_auxiliaries_into(&g, &g_prev, &p_prev, &mut scratch_a, &mut scratch_b)
                    .and_then(|(_, a)| {
                        let cand = match fixed {
                            Some(l) => l,
                            None => spectral_lambda_gcgpm(
                                &scratch_b,
                                &p_prev,
                                cfg.alpha_min,
                                cfg.alpha_max,
                            )?,
                        };
                        lambda = next_lambda(cfg, lambda, cand, g_norm, g_prev_norm);
                        direction_gcgpm_into(&g, &p_prev, &scratch_b, a, lambda, cfg.tau, &mut p)
                    })
            };
            if built.is_err() {
                restarted = true;
                restarts += 1;
                for (pi, gi) in p.iter_mut().zip(&g) {
                    *pi = -lambda * gi;
                }
            }
            lambda_used = lambda;
        }

        let p_norm = norm(&p);
        if !p_norm.is_finite() || !all_finite(&p) {
            return Ok(finish(
                Status::NonFinite,
                k,
                fe,
                g_norm,
                x,
                restarts,
                history,
            ));
        }
        if p_norm < 0.1 * cfg.epsilon {
            return Ok(finish(
                Status::DirectionTooSmall,
                k,
                fe,
                g_norm,
                x,
                restarts,
                history,
            ));
        }

        let alpha = match line_search_into(problem, &x, &p, cfg, &mut z, &mut g_z) {
            Ok((alpha, trials)) => {
                fe += trials;
                alpha
            }
            Err(LineSearchFailed { trials }) => {
                fe += trials;
                return Ok(finish(
                    Status::LineSearchFailure,
                    k,
                    fe,
                    g_norm,
                    x,
                    restarts,
                    history,
                ));
            }
        };
        let g_z_sq = norm_sq(&g_z);
        let g_z_norm = g_z_sq.sqrt();
        let g_dot_p = dot(&g, &p);

        if g_z_norm <= cfg.epsilon && set.contains(&z) {
            observe(&IterationInfo {
                k,
                x: &x,
                g: &g,
                g_norm,
                p: &p,
                p_norm,
                g_dot_p,
                lambda: lambda_used,
                gamma,
                alpha,
                z: &z,
                restarted,
                x_next: None,
            });
            if let Some(h) = history.as_mut() {
                h.push(g_z_norm);
            }
            return Ok(finish(
                Status::ConvergedAtTrialPoint,
                k + 1,
                fe,
                g_z_norm,
                z,
                restarts,
                history,
            ));
        }

        if g_z_sq > 0.0 {
            hyperplane_step_into(&x, &z, &g_z, g_z_sq, gamma, &set, &mut x_next);
        } else {
            // z is a root outside the set
            x_next.copy_from_slice(&z);
            set.project_in_place(&mut x_next);
        }
        problem.eval(&x_next, &mut g_next);
        fe += 1;
        let g_next_norm = norm(&g_next);

        observe(&IterationInfo {
            k,
            x: &x,
            g: &g,
            g_norm,
            p: &p,
            p_norm,
            g_dot_p,
            lambda: lambda_used,
            gamma,
            alpha,
            z: &z,
            restarted,
            x_next: Some(&x_next),
        });

        sub(&mut s_prev, &z, &x);
        if cfg.adaptive_gamma {
            gamma = adaptive_gamma(gamma, g_next_norm, g_norm, cfg);
        }
        std::mem::swap(&mut p, &mut p_prev);
        std::mem::swap(&mut g_prev, &mut g);
        std::mem::swap(&mut g, &mut g_next);
        std::mem::swap(&mut x, &mut x_next);
        g_prev_norm = g_norm;
        g_norm = g_next_norm;
        if let Some(h) = history.as_mut() {
            h.push(g_norm);
        }
        k += 1;
    }
}

fn next_lambda(
    cfg: &MethodConfig,
    current: f64,
    candidate: f64,
    g_norm: f64,
    g_prev_norm: f64,
) -> f64 {
    if cfg.lazy_lambda && cfg.method.fixed_lambda().is_none() {
        lazy_lambda(current, candidate, g_norm, g_prev_norm, cfg.lambda_lazy_c)
    } else {
        candidate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Identity {
        set: FeasibleSet,
    }

    impl MonotoneSystem for Identity {
        fn dim(&self) -> usize {
            self.set.dim()
        }
        fn constraint(&self) -> &FeasibleSet {
            &self.set
        }
        fn eval(&self, x: &[f64], out: &mut [f64]) {
            out.copy_from_slice(x);
        }
    }

    fn line_cfg() -> MethodConfig {
        MethodConfig {
            zeta: 0.1,
            step0: 0.5,
            rho: 0.8,
            ..MethodConfig::defaults(Method::Gmopcgm)
        }
    }

    #[test]
    fn table_defaults() {
        let g = MethodConfig::defaults(Method::Gmopcgm);
        assert_eq!(
            (
                g.tau,
                g.rho,
                g.step0,
                g.zeta,
                g.alpha_min,
                g.alpha_max,
                g.gamma0
            ),
            (1.0, 0.8, 0.5, 0.0001, 0.1, 2.0, 1.1)
        );
        assert_eq!(
            (g.zeta1, g.zeta2, g.gamma_cap, g.lambda_lazy_c),
            (1.0, 1.0, 1.8, 0.75)
        );
        let c = MethodConfig::defaults(Method::Gcgpm);
        assert_eq!(
            (
                c.tau,
                c.rho,
                c.step0,
                c.zeta,
                c.alpha_min,
                c.alpha_max,
                c.gamma0
            ),
            (0.001, 0.5, 0.6, 0.1, 0.55, 4.9, 1.8)
        );
        assert_eq!(
            (c.zeta1, c.zeta2, c.gamma_cap, c.lambda_lazy_c),
            (1.0, 1.0, 1.7, 0.6)
        );
        for m in Method::ALL {
            MethodConfig::defaults(m).validate().unwrap();
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn gcgpm_rejects_small_alpha_min() {
        let cfg = MethodConfig {
            tau: 2.0,
            ..MethodConfig::defaults(Method::Gcgpm)
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("alpha_min > (1+tau)/2"), "{msg}");
        let cfg = MethodConfig {
            alpha_min: 0.5,
            ..MethodConfig::defaults(Method::Gcgpm)
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("alpha_min > (1+tau)/2"), "{msg}");
    }

    #[test]
    fn line_search_first_trial_accepted() {
        let sys = Identity {
            set: FeasibleSet::whole_space(1),
        };
        let step = line_search(&sys, &[1.0], &[-1.0], &line_cfg()).unwrap();
        assert_eq!(step.alpha, 0.5);
        assert_eq!(step.trials, 1);
        assert_eq!(step.z, vec![0.5]);
        assert_eq!(step.g_z, vec![0.5]);
    }

    #[test]
    fn line_search_backtracks_then_fails() {
        let sys = Identity {
            set: FeasibleSet::whole_space(1),
        };
        // ascent direction never passes
        let cfg = MethodConfig {
            max_backtracks: 5,
            ..line_cfg()
        };
        assert_eq!(
            line_search(&sys, &[1.0], &[1.0], &cfg),
            Err(LineSearchFailed { trials: 6 })
        );
        // x = 1, p = -3: α = 0.5 and 0.4 overshoot past the root, α = 0.32
        // lands at z = 0.04 with G(z)ᵀp = -0.12 > -0.288, α = 0.256 passes.
        let step = line_search(&sys, &[1.0], &[-3.0], &line_cfg()).unwrap();
        assert_eq!(step.trials, 4);
        assert!((step.alpha - 0.256).abs() < 1e-15);
    }

    #[test]
    fn hyperplane_examples() {
        let free = FeasibleSet::whole_space(1);
        let x = hyperplane_step(&[1.0], &[0.5], &[0.5], 1.1, &free).unwrap();
        assert!((x[0] - 0.45).abs() < 1e-15);

        let free2 = FeasibleSet::whole_space(2);
        let x = hyperplane_step(&[2.0, 3.0], &[2.0, 3.0], &[1.0, 1.0], 1.1, &free2).unwrap();
        assert_eq!(x, vec![2.0, 3.0]);

        // x − γμ G(z) = (−0.2, 0.3) before clamping
        let orthant = FeasibleSet::nonnegative(2);
        let x = hyperplane_step(&[0.8, 0.3], &[0.8, 0.3], &[1.0, 0.0], 1.0, &orthant).unwrap();
        assert_eq!(x, vec![0.8, 0.3]);
        let x = hyperplane_step(&[0.8, 0.3], &[-0.2, 0.3], &[1.0, 0.0], 1.0, &orthant).unwrap();
        assert_eq!(x, vec![0.0, 0.3]);

        assert!(hyperplane_step(&[1.0], &[0.5], &[0.0], 1.0, &free).is_err());
    }

    #[test]
    fn gamma_rule() {
        let cfg = MethodConfig::defaults(Method::Gmopcgm);
        assert!((adaptive_gamma(1.1, 0.5, 1.0, &cfg) - 1.21).abs() < 1e-15);
        assert_eq!(adaptive_gamma(1.7, 0.5, 1.0, &cfg), 1.8);
        assert_eq!(adaptive_gamma(1.3, 1.0, 1.0, &cfg), 1.3);
        let cfg = MethodConfig::defaults(Method::Gcgpm);
        assert_eq!(adaptive_gamma(1.8, 0.5, 1.0, &cfg), 1.7);
    }

    #[test]
    fn lazy_rule() {
        assert_eq!(lazy_lambda(1.0, 1.5, 1.0, 1.0, 0.75), 1.5);
        assert_eq!(lazy_lambda(1.0, 1.5, 0.1, 1.0, 0.75), 1.0);
        assert_eq!(lazy_lambda(1.0, 1.5, 0.75, 1.0, 0.75), 1.5);
    }

    #[test]
    fn already_solved_start() {
        let sys = Identity {
            set: FeasibleSet::whole_space(3),
        };
        let r = solve(
            &sys,
            &[0.0, 0.0, 0.0],
            &MethodConfig::defaults(Method::Gcgpm),
        )
        .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.function_evals, 1);
    }

    #[test]
    fn solves_identity_for_every_method() {
        let sys = Identity {
            set: FeasibleSet::nonnegative(5),
        };
        for m in Method::ALL {
            let cfg = MethodConfig {
                record_history: true,
                ..MethodConfig::defaults(m)
            };
            let r = solve(&sys, &[1.0, 2.0, 3.0, 4.0, 5.0], &cfg).unwrap();
            assert!(r.status.is_converged(), "{m}: {:?}", r.status);
            assert!(r.final_residual < 1e-11);
            assert!(r.function_evals >= r.iterations);
            let h = r.residual_history.unwrap();
            assert_eq!(*h.last().unwrap(), r.final_residual);
        }
    }

    #[test]
    fn wrong_start_dimension() {
        let sys = Identity {
            set: FeasibleSet::whole_space(2),
        };
        assert!(solve(&sys, &[1.0], &MethodConfig::defaults(Method::Gmopcgm)).is_err());
    }

    #[test]
    fn status_names_round_trip() {
        for s in [
            Status::Converged,
            Status::ConvergedAtTrialPoint,
            Status::MaxIterations,
            Status::LineSearchFailure,
            Status::DirectionTooSmall,
            Status::NonFinite,
        ] {
            assert_eq!(s.name().parse::<Status>().unwrap(), s);
        }
    }
}
