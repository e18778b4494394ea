//! Search directions of the two spectral conjugate-gradient projection
//! methods and their spectral scaling parameters.
//!
//! Both directions are assembled from a handful of inner products and never
//! form an n×n matrix. A denominator that is numerically zero is reported as a
//! [`Breakdown`]; the solver answers it with a scaled steepest-descent restart.

use crate::error::{contract, Result};
use crate::geometry::clamp;
use crate::linalg::{dot, norm_sq};

/// Relative size below which an inner product counts as zero.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// A denominator in the direction formulas vanished or had the wrong sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Breakdown {
    /// The curvature product feeding λₖ is not safely positive.
    Spectral,
    /// A conjugacy denominator (pᵀv, yᵀp, wᵀp, or ‖s‖) is numerically zero.
    Denominator,
}

// `d` is the inner product of two vectors whose squared norms are `uu`, `vv`.
#[inline]
fn negligible(d: f64, uu: f64, vv: f64) -> bool {
    !d.is_finite() || d.abs() <= BREAKDOWN_TOL * (uu * vv).sqrt() || d == 0.0
}

#[inline]
fn not_positive(d: f64, uu: f64, vv: f64) -> bool {
    negligible(d, uu, vv) || d < 0.0
}

/// Spectral parameter of GMOPCGM:
/// `clamp(max{‖s‖²/(sᵀv), (sᵀv)/‖v‖²})` onto `[alpha_min, alpha_max]`.
pub fn spectral_lambda_gmop(
    s: &[f64],
    v: &[f64],
    alpha_min: f64,
    alpha_max: f64,
) -> std::result::Result<f64, Breakdown> {
    let ss = norm_sq(s);
    let vv = norm_sq(v);
    let sv = dot(s, v);
    if not_positive(sv, ss, vv) {
        return Err(Breakdown::Spectral);
    }
    Ok(clamp(alpha_min, alpha_max, (ss / sv).max(sv / vv)))
}

/// Scaling that equalizes the two non-trivial Perry eigenvalues:
/// `λ·(sᵀv)/‖s‖²`.
pub fn optimal_tstar(s: &[f64], v: &[f64], lambda: f64) -> Result<f64> {
    let ss = norm_sq(s);
    if ss == 0.0 {
        return Err(contract("optimal t* needs a nonzero step s"));
    }
    Ok(lambda * dot(s, v) / ss)
}

/// Inputs carried from the previous GMOPCGM iteration.
#[derive(Debug, Clone, Copy)]
pub struct DirectionStateGmop<'a> {
    /// `z_{k-1} - x_{k-1}`
    pub s_prev: &'a [f64],
    pub g_prev: &'a [f64],
    pub p_prev: &'a [f64],
    /// λₖ, already clamped into `[alpha_min, alpha_max]`.
    pub lambda: f64,
    pub tau: f64,
}

/// GMOPCGM direction for k ≥ 1: `p = -M·g + θ·p_prev`.
///
/// With `v = g - g_prev + τ s`, `t* = λ sᵀv/‖s‖²`,
/// `θ = (v - t* s)ᵀg / p_prevᵀv` and `M = λ + θ gᵀp_prev/‖g‖²`.
/// The result satisfies `gᵀp = -λ‖g‖²` exactly in exact arithmetic.
pub fn direction_gmop(
    g: &[f64],
    state: &DirectionStateGmop<'_>,
) -> std::result::Result<Vec<f64>, Breakdown> {
    let mut out = vec![0.0; g.len()];
    direction_gmop_into(g, state, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`direction_gmop`]; `out` is left untouched on
/// breakdown.
pub fn direction_gmop_into(
    g: &[f64],
    state: &DirectionStateGmop<'_>,
    out: &mut [f64],
) -> std::result::Result<(), Breakdown> {
    let DirectionStateGmop {
        s_prev: s,
        g_prev,
        p_prev: p,
        lambda,
        tau,
    } = *state;

    // One fused pass; v is never stored.
    let (mut ss, mut sv, mut pv, mut pp, mut vv, mut vg, mut sg, mut gp, mut gg) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..g.len() {
        let vi = g[i] - g_prev[i] + tau * s[i];
        ss += s[i] * s[i];
        sv += s[i] * vi;
        pv += p[i] * vi;
        pp += p[i] * p[i];
        vv += vi * vi;
        vg += vi * g[i];
        sg += s[i] * g[i];
        gp += g[i] * p[i];
        gg += g[i] * g[i];
    }
    if ss == 0.0 || gg == 0.0 || negligible(pv, pp, vv) {
        return Err(Breakdown::Denominator);
    }
    let tstar = lambda * sv / ss;
    let theta = (vg - tstar * sg) / pv;
    let m = lambda + theta * gp / gg;
    if !theta.is_finite() || !m.is_finite() {
        return Err(Breakdown::Denominator);
    }
    for ((o, gi), pi) in out.iter_mut().zip(g).zip(p) {
        *o = -m * gi + theta * pi;
    }
    Ok(())
}

/// Auxiliary quantities of the GCGPM direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GcgAuxiliaries {
    /// `g - g_prev`
    pub y: Vec<f64>,
    /// `1 + max{0, -gᵀp_prev / yᵀp_prev}`, always ≥ 1.
    pub r: f64,
    /// `y + r·p_prev`
    pub w: Vec<f64>,
    /// `gᵀp_prev / wᵀp_prev`
    pub a: f64,
}

pub fn gcgpm_auxiliaries(
    g: &[f64],
    g_prev: &[f64],
    p_prev: &[f64],
) -> std::result::Result<GcgAuxiliaries, Breakdown> {
    let n = g.len();
    let mut y = vec![0.0; n];
    let mut w = vec![0.0; n];
    let (r, a) = gcgpm_auxiliaries_into(g, g_prev, p_prev, &mut y, &mut w)?;
    Ok(GcgAuxiliaries { y, r, w, a })
}

/// Writes `y` and `w` into the given buffers and returns `(r, a)`.
pub fn gcgpm_auxiliaries_into(
    g: &[f64],
    g_prev: &[f64],
    p_prev: &[f64],
    y: &mut [f64],
    w: &mut [f64],
) -> std::result::Result<(f64, f64), Breakdown> {
    let (mut yp, mut yy, mut pp, mut gp) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..g.len() {
        let yi = g[i] - g_prev[i];
        y[i] = yi;
        yp += yi * p_prev[i];
        yy += yi * yi;
        pp += p_prev[i] * p_prev[i];
        gp += g[i] * p_prev[i];
    }
    // r only needs the ratio when it can be positive.
    let r = if gp < 0.0 || yp < 0.0 {
        if negligible(yp, yy, pp) {
            return Err(Breakdown::Denominator);
        }
        1.0 + (-gp / yp).max(0.0)
    } else {
        1.0
    };
    let mut ww = 0.0;
    for i in 0..g.len() {
        w[i] = y[i] + r * p_prev[i];
        ww += w[i] * w[i];
    }
    let wp = yp + r * pp;
    if negligible(wp, ww, pp) {
        return Err(Breakdown::Denominator);
    }
    Ok((r, gp / wp))
}

/// Spectral parameter of GCGPM:
/// `clamp(max{‖w‖²/(pᵀw), (pᵀw)/‖p‖²})` onto `[alpha_min, alpha_max]`.
pub fn spectral_lambda_gcgpm(
    w: &[f64],
    p_prev: &[f64],
    alpha_min: f64,
    alpha_max: f64,
) -> std::result::Result<f64, Breakdown> {
    let ww = norm_sq(w);
    let pp = norm_sq(p_prev);
    let pw = dot(p_prev, w);
    if not_positive(pw, ww, pp) {
        return Err(Breakdown::Spectral);
    }
    Ok(clamp(alpha_min, alpha_max, (ww / pw).max(pw / pp)))
}

/// Inputs carried from the previous GCGPM iteration.
#[derive(Debug, Clone, Copy)]
pub struct DirectionStateGcg<'a> {
    pub g_prev: &'a [f64],
    pub p_prev: &'a [f64],
    /// Three-term weight, in `[0, 1]`.
    pub tau: f64,
}

/// GCGPM direction for k ≥ 1: `p = -λ g + θ p_prev + τ a w`, with
/// `θ = gᵀw/pᵀw - λ (‖w‖²/pᵀw)(gᵀp_prev/pᵀw)`.
pub fn direction_gcgpm(
    g: &[f64],
    state: &DirectionStateGcg<'_>,
    lambda_k: f64,
) -> std::result::Result<Vec<f64>, Breakdown> {
    let aux = gcgpm_auxiliaries(g, state.g_prev, state.p_prev)?;
    let mut out = vec![0.0; g.len()];
    direction_gcgpm_into(
        g,
        state.p_prev,
        &aux.w,
        aux.a,
        lambda_k,
        state.tau,
        &mut out,
    )?;
    Ok(out)
}

/// Assembles the GCGPM direction from precomputed `w` and `a`.
pub fn direction_gcgpm_into(
    g: &[f64],
    p_prev: &[f64],
    w: &[f64],
    a: f64,
    lambda_k: f64,
    tau: f64,
    out: &mut [f64],
) -> std::result::Result<(), Breakdown> {
    let (mut pw, mut ww, mut gw, mut gp, mut pp) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..g.len() {
        pw += p_prev[i] * w[i];
        ww += w[i] * w[i];
        gw += g[i] * w[i];
        gp += g[i] * p_prev[i];
        pp += p_prev[i] * p_prev[i];
    }
    if negligible(pw, pp, ww) {
        return Err(Breakdown::Denominator);
    }
    let theta = gw / pw - lambda_k * (ww / pw) * (gp / pw);
    if !theta.is_finite() {
        return Err(Breakdown::Denominator);
    }
    let ta = tau * a;
    for i in 0..g.len() {
        out[i] = -lambda_k * g[i] + theta * p_prev[i] + ta * w[i];
    }
    Ok(())
}

/// Constant `c` in the GCGPM sufficient-descent bound `gᵀp ≤ -c‖g‖²`.
pub fn gcgpm_descent_constant(alpha_min: f64, tau: f64) -> f64 {
    alpha_min * (1.0 - (1.0 + tau).powi(2) / (4.0 * alpha_min * alpha_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Direct transcription of the formulas with explicit vectors; shares no
    // code with the fused kernels above.
    fn oracle_gmop(g: &[f64], s: &[f64], gp: &[f64], p: &[f64], lambda: f64, tau: f64) -> Vec<f64> {
        let n = g.len();
        let v: Vec<f64> = (0..n).map(|i| g[i] - gp[i] + tau * s[i]).collect();
        let d = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let t = lambda * d(s, &v) / d(s, s);
        let vt: Vec<f64> = (0..n).map(|i| v[i] - t * s[i]).collect();
        let theta = d(&vt, g) / d(p, &v);
        let m = lambda + theta * d(g, p) / d(g, g);
        (0..n).map(|i| -m * g[i] + theta * p[i]).collect()
    }

    #[test]
    fn spectral_gmop_examples() {
        assert_eq!(
            spectral_lambda_gmop(&[1.0, 0.0], &[2.0, 0.0], 0.1, 2.0),
            Ok(0.5)
        );
        assert_eq!(
            spectral_lambda_gmop(&[1.0, 0.0], &[1.0, 0.0], 0.1, 2.0),
            Ok(1.0)
        );
        assert_eq!(
            spectral_lambda_gmop(&[10.0, 0.0], &[1.0, 0.0], 0.1, 2.0),
            Ok(2.0)
        );
        assert_eq!(
            spectral_lambda_gmop(&[1.0, 0.0], &[0.0, 1.0], 0.1, 2.0),
            Err(Breakdown::Spectral)
        );
        assert_eq!(
            spectral_lambda_gmop(&[1.0, 0.0], &[-1.0, 0.0], 0.1, 2.0),
            Err(Breakdown::Spectral)
        );
    }

    #[test]
    fn tstar_examples() {
        assert_eq!(optimal_tstar(&[1.0, 0.0], &[1.0, 0.0], 1.0).unwrap(), 1.0);
        assert_eq!(optimal_tstar(&[1.0, 0.0], &[3.0, 0.0], 2.0).unwrap(), 6.0);
        assert_eq!(optimal_tstar(&[1.0, 1.0], &[1.0, -1.0], 1.0).unwrap(), 0.0);
        assert!(optimal_tstar(&[0.0, 0.0], &[1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn gmop_hand_example() {
        // y = 0 so v = τ s = (1, 0); λ = 1, t* = 1, θ = 0, M = 1.
        let g = [0.0, 1.0];
        let state = DirectionStateGmop {
            s_prev: &[1.0, 0.0],
            g_prev: &[0.0, 1.0],
            p_prev: &[1.0, 0.0],
            lambda: 1.0,
            tau: 1.0,
        };
        let p = direction_gmop(&g, &state).unwrap();
        assert_eq!(p, vec![0.0, -1.0]);
        assert_eq!(dot(&g, &p), -1.0);
    }

    #[test]
    fn gmop_breakdown_when_p_orthogonal_to_v() {
        let state = DirectionStateGmop {
            s_prev: &[1.0, 0.0],
            g_prev: &[0.0, 1.0],
            p_prev: &[0.0, 1.0],
            lambda: 1.0,
            tau: 1.0,
        };
        assert_eq!(
            direction_gmop(&[0.0, 1.0], &state),
            Err(Breakdown::Denominator)
        );
    }

    #[test]
    fn gmop_descent_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..1000 {
            let n = rng.random_range(2..=50);
            let mut r = || -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let (g, s, gp, p) = (r(), r(), r(), r());
            let lambda = rng.random_range(0.1..2.0);
            let state = DirectionStateGmop {
                s_prev: &s,
                g_prev: &gp,
                p_prev: &p,
                lambda,
                tau: 1.0,
            };
            let Ok(dir) = direction_gmop(&g, &state) else {
                continue;
            };
            let gg = norm_sq(&g);
            let lhs = dot(&g, &dir);
            assert!(
                (lhs + lambda * gg).abs() <= 1e-8 * lambda * gg,
                "gᵀp={lhs}, -λ‖g‖²={}",
                -lambda * gg
            );
            let reference = oracle_gmop(&g, &s, &gp, &p, lambda, 1.0);
            for (a, b) in dir.iter().zip(&reference) {
                assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
            checked += 1;
        }
        assert!(checked > 990);
    }

    #[test]
    fn gcg_auxiliary_examples() {
        let aux = gcgpm_auxiliaries(&[1.0, 0.0], &[1.0, -1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(aux.y, vec![0.0, 1.0]);
        assert_eq!(aux.r, 1.0);
        assert_eq!(aux.w, vec![0.0, 2.0]);
        assert_eq!(aux.a, 0.0);

        let aux = gcgpm_auxiliaries(&[0.0, -1.0], &[0.0, -2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(aux.y, vec![0.0, 1.0]);
        assert_eq!(aux.r, 2.0);
        assert_eq!(aux.w, vec![0.0, 3.0]);
        assert!((aux.a + 1.0 / 3.0).abs() < 1e-15);

        // gᵀp ≥ 0 and yᵀp > 0 keeps r at exactly one
        let aux = gcgpm_auxiliaries(&[0.5, 2.0], &[0.1, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(aux.r, 1.0);
    }

    #[test]
    fn spectral_gcg_examples() {
        assert_eq!(
            spectral_lambda_gcgpm(&[0.0, 2.0], &[0.0, 1.0], 0.55, 4.9),
            Ok(2.0)
        );
        assert_eq!(
            spectral_lambda_gcgpm(&[1.0, 0.0], &[1.0, 0.0], 0.55, 4.9),
            Ok(1.0)
        );
        assert_eq!(
            spectral_lambda_gcgpm(&[0.0, 10.0], &[0.0, 1.0], 0.55, 4.9),
            Ok(4.9)
        );
        assert_eq!(
            spectral_lambda_gcgpm(&[1.0, 0.0], &[0.0, 1.0], 0.55, 4.9),
            Err(Breakdown::Spectral)
        );
    }

    #[test]
    fn gcg_hand_example() {
        let g = [1.0, 0.0];
        let state = DirectionStateGcg {
            g_prev: &[1.0, -1.0],
            p_prev: &[0.0, 1.0],
            tau: 0.001,
        };
        let p = direction_gcgpm(&g, &state, 2.0).unwrap();
        assert_eq!(p, vec![-2.0, 0.0]);
        assert_eq!(dot(&g, &p), -2.0);
    }

    #[test]
    fn gcg_sufficient_descent_random() {
        let (amin, amax, tau) = (0.55, 4.9, 0.001);
        let c = gcgpm_descent_constant(amin, tau);
        assert!((c - 0.55 * (1.0 - 1.001f64.powi(2) / 1.21)).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..1000 {
            let n = rng.random_range(2..=50);
            let mut r = || -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let (g, gp, p) = (r(), r(), r());
            let Ok(aux) = gcgpm_auxiliaries(&g, &gp, &p) else {
                continue;
            };
            let Ok(lambda) = spectral_lambda_gcgpm(&aux.w, &p, amin, amax) else {
                continue;
            };
            let state = DirectionStateGcg {
                g_prev: &gp,
                p_prev: &p,
                tau,
            };
            let dir = direction_gcgpm(&g, &state, lambda).unwrap();
            let gg = norm_sq(&g);
            assert!(dot(&g, &dir) <= -c * gg + 1e-8 * gg.max(1.0));
            checked += 1;
        }
        assert!(checked > 500, "only {checked} instances were well posed");
    }
}
