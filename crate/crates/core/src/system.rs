use crate::geometry::FeasibleSet;

/// A mapping `G: ℝⁿ → ℝⁿ` together with the convex set on which a root is
/// sought.
///
/// Implementations must be free of interior mutability so one instance can be
/// shared by concurrent solves.
pub trait MonotoneSystem: Sync {
    fn dim(&self) -> usize;

    fn constraint(&self) -> &FeasibleSet;

    /// Writes `G(x)` into `out`. Both slices have length [`dim`](Self::dim).
    fn eval(&self, x: &[f64], out: &mut [f64]);

    /// Allocating convenience wrapper around [`eval`](Self::eval).
    fn value(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(x, &mut out);
        out
    }
}

/// Pairs a mapping with a different feasible set of the same dimension.
pub struct Constrained<'a, P: ?Sized> {
    inner: &'a P,
    set: FeasibleSet,
}

impl<'a, P: MonotoneSystem + ?Sized> Constrained<'a, P> {
    pub fn new(inner: &'a P, set: FeasibleSet) -> crate::Result<Self> {
        if set.dim() != inner.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: inner.dim(),
                got: set.dim(),
            });
        }
        Ok(Self { inner, set })
    }
}

impl<P: MonotoneSystem + ?Sized> MonotoneSystem for Constrained<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn constraint(&self) -> &FeasibleSet {
        &self.set
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.inner.eval(x, out)
    }
}
