//! Closed convex feasible sets and their exact Euclidean projections.
//!
//! Every set supported here is a product of identical intervals, so the
//! projection is componentwise clamping.

use std::fmt;
use std::str::FromStr;

use crate::error::{contract, Error, Result};

/// Shape of a feasible set, independent of its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetKind {
    WholeSpace,
    NonnegativeOrthant,
    /// `[lower, upper]` applied to every coordinate.
    Box {
        lower: f64,
        upper: f64,
    },
    /// `[lower, ∞)` applied to every coordinate.
    HalfLineProduct {
        lower: f64,
    },
}

impl SetKind {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            SetKind::WholeSpace => (f64::NEG_INFINITY, f64::INFINITY),
            SetKind::NonnegativeOrthant => (0.0, f64::INFINITY),
            SetKind::Box { lower, upper } => (lower, upper),
            SetKind::HalfLineProduct { lower } => (lower, f64::INFINITY),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SetKind::Box { lower, upper } if !(lower <= upper) => Err(contract(format!(
                "box requires lower <= upper, got [{lower}, {upper}]"
            ))),
            SetKind::Box { lower, upper } if lower.is_nan() || upper.is_nan() => {
                Err(contract("box bounds must not be NaN"))
            }
            SetKind::HalfLineProduct { lower } if !lower.is_finite() => {
                Err(contract("half-line lower bound must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Parses the CLI constraint syntax `free | nonneg | box:LO:HI | halfline:LO`.
impl FromStr for SetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unrecognized constraint '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let kind = match parts.as_slice() {
            ["free"] => SetKind::WholeSpace,
            ["nonneg"] => SetKind::NonnegativeOrthant,
            ["box", lo, hi] => SetKind::Box {
                lower: num(lo)?,
                upper: num(hi)?,
            },
            ["halfline", lo] => SetKind::HalfLineProduct { lower: num(lo)? },
            _ => return Err(bad()),
        };
        kind.validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(kind)
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKind::WholeSpace => write!(f, "free"),
            SetKind::NonnegativeOrthant => write!(f, "nonneg"),
            SetKind::Box { lower, upper } => write!(f, "box:{lower}:{upper}"),
            SetKind::HalfLineProduct { lower } => write!(f, "halfline:{lower}"),
        }
    }
}

/// A closed convex subset of ℝⁿ with an exact projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleSet {
    kind: SetKind,
    dim: usize,
}

impl FeasibleSet {
    pub fn new(kind: SetKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(contract("feasible set dimension must be positive"));
        }
        kind.validate()?;
        Ok(Self { kind, dim })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self::new(SetKind::WholeSpace, dim).expect("positive dimension")
    }

    pub fn nonnegative(dim: usize) -> Self {
        Self::new(SetKind::NonnegativeOrthant, dim).expect("positive dimension")
    }

    pub fn boxed(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(SetKind::Box { lower, upper }, dim)
    }

    pub fn half_line(dim: usize, lower: f64) -> Result<Self> {
        Self::new(SetKind::HalfLineProduct { lower }, dim)
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same shape in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.kind, dim)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Euclidean projection of `x` onto the set.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut out = x.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// Projects `x` in place. The caller guarantees `x.len() == self.dim()`.
    pub fn project_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        if let SetKind::WholeSpace = self.kind {
            return;
        }
        let (lo, hi) = self.kind.bounds();
        for v in x.iter_mut() {
            *v = clamp(lo, hi, *v);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let (lo, hi) = self.kind.bounds();
        x.iter().all(|&v| v >= lo && v <= hi)
    }
}

impl fmt::Display for FeasibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={})", self.kind, self.dim)
    }
}

/// `max{a, min{x, b}}` with the precondition `a <= b` checked.
pub fn clamp_interval(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(contract(format!(
            "clamp interval requires a <= b, got [{a}, {b}]"
        )));
    }
    Ok(clamp(a, b, x))
}

#[inline]
pub(crate) fn clamp(a: f64, b: f64, x: f64) -> f64 {
    a.max(x.min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, dot, norm_sq, sub};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projection_examples() {
        let orthant = FeasibleSet::nonnegative(2);
        assert_eq!(orthant.project(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);

        let bx = FeasibleSet::boxed(3, -10.0, 10.0).unwrap();
        assert_eq!(
            bx.project(&[11.0, -12.0, 3.0]).unwrap(),
            vec![10.0, -10.0, 3.0]
        );

        let free = FeasibleSet::whole_space(2);
        assert_eq!(free.project(&[5.0, -3.0]).unwrap(), vec![5.0, -3.0]);

        let half = FeasibleSet::half_line(2, 1.0).unwrap();
        assert_eq!(half.project(&[0.5, 7.0]).unwrap(), vec![1.0, 7.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = FeasibleSet::nonnegative(3);
        assert!(matches!(
            s.project(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn inverted_box_is_rejected() {
        assert!(FeasibleSet::boxed(2, 1.0, -1.0).is_err());
        assert!("box:1:-1".parse::<SetKind>().is_err());
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_interval(0.1, 2.0, 5.0).unwrap(), 2.0);
        assert_eq!(clamp_interval(0.1, 2.0, 0.05).unwrap(), 0.1);
        assert_eq!(clamp_interval(0.55, 4.9, 2.0).unwrap(), 2.0);
        assert!(clamp_interval(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn constraint_syntax() {
        assert_eq!("free".parse::<SetKind>().unwrap(), SetKind::WholeSpace);
        assert_eq!(
            "nonneg".parse::<SetKind>().unwrap(),
            SetKind::NonnegativeOrthant
        );
        assert_eq!(
            "box:-10:10".parse::<SetKind>().unwrap(),
            SetKind::Box {
                lower: -10.0,
                upper: 10.0
            }
        );
        assert_eq!(
            "halfline:1".parse::<SetKind>().unwrap(),
            SetKind::HalfLineProduct { lower: 1.0 }
        );
        assert!("ball:1".parse::<SetKind>().is_err());
        let k: SetKind = "box:-2.5:3".parse().unwrap();
        assert_eq!(k.to_string().parse::<SetKind>().unwrap(), k);
    }

    fn all_kinds() -> Vec<SetKind> {
        vec![
            SetKind::WholeSpace,
            SetKind::NonnegativeOrthant,
            SetKind::Box {
                lower: -1.5,
                upper: 2.0,
            },
            SetKind::HalfLineProduct { lower: 1.0 },
        ]
    }

    fn random_feasible(rng: &mut ChaCha8Rng, set: &FeasibleSet) -> Vec<f64> {
        let raw: Vec<f64> = (0..set.dim())
            .map(|_| rng.random_range(-5.0..5.0))
            .collect();
        set.project(&raw).unwrap()
    }

    #[test]
    fn idempotent_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in all_kinds() {
            let set = FeasibleSet::new(kind, 7).unwrap();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..7).map(|_| rng.random_range(-20.0..20.0)).collect();
                let p = set.project(&x).unwrap();
                assert!(set.contains(&p));
                assert_eq!(set.project(&p).unwrap(), p);
            }
        }
    }

    proptest! {
        #[test]
        fn projection_properties(
            kind_idx in 0usize..4,
            x in prop::collection::vec(-50.0f64..50.0, 6),
            y in prop::collection::vec(-50.0f64..50.0, 6),
            seed in any::<u64>(),
        ) {
            let set = FeasibleSet::new(all_kinds()[kind_idx], 6).unwrap();
            let px = set.project(&x).unwrap();
            let py = set.project(&y).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let feas = random_feasible(&mut rng, &set);

            // (a) variational inequality
            let mut r = vec![0.0; 6];
            let mut q = vec![0.0; 6];
            sub(&mut r, &x, &px);
            sub(&mut q, &feas, &px);
            prop_assert!(dot(&r, &q) <= 1e-12);

            // (b) non-expansive
            prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-12);

            // (c) strengthened non-expansiveness against feasible points
            let lhs = dist(&px, &feas).powi(2);
            let rhs = dist(&x, &feas).powi(2) - norm_sq(&r);
            prop_assert!(lhs <= rhs + 1e-10);
        }
    }
}
