//! Dense vector kernels shared by the solvers. Plain slices, no allocation.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `out = x + alpha * p`
#[inline]
pub fn add_scaled(out: &mut [f64], x: &[f64], alpha: f64, p: &[f64]) {
    for ((o, xi), pi) in out.iter_mut().zip(x).zip(p) {
        *o = xi + alpha * pi;
    }
}

/// `y += alpha * x`
#[inline]
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out = a - b`
#[inline]
pub fn sub(out: &mut [f64], a: &[f64], b: &[f64]) {
    for ((o, ai), bi) in out.iter_mut().zip(a).zip(b) {
        *o = ai - bi;
    }
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels() {
        let a = [1.0, 2.0, 2.0];
        let b = [0.0, 1.0, -1.0];
        assert_eq!(dot(&a, &b), 0.0);
        assert_eq!(norm(&a), 3.0);
        let mut out = [0.0; 3];
        add_scaled(&mut out, &a, 2.0, &b);
        assert_eq!(out, [1.0, 4.0, 0.0]);
        sub(&mut out, &a, &b);
        assert_eq!(out, [1.0, 1.0, 3.0]);
        axpy(&mut out, -1.0, &a);
        assert_eq!(out, [0.0, -1.0, 1.0]);
        assert_eq!(norm_inf(&[-4.0, 3.0]), 4.0);
        assert!(!all_finite(&[1.0, f64::NAN]));
    }
}
