//! Value-coupling transforms `g` together with their first two derivatives.
//!
//! A value parent `b` shifts the mean of its child by `alpha * g(x_b)`. The
//! prediction step needs `g`, the parent update needs `g'` and `g''`, all
//! evaluated at the parent's previous posterior mean.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{HgfError, Result};
use crate::scalar::Scalar;

pub const LINEAR: &str = "linear";
pub const RELU: &str = "relu";

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A twice-differentiable coupling function with explicit derivatives.
#[derive(Clone)]
pub struct Transform<T> {
    id: String,
    g: ScalarFn<T>,
    g1: ScalarFn<T>,
    g2: ScalarFn<T>,
    kinks: Vec<T>,
}

impl<T: Scalar> Transform<T> {
    pub fn new(
        id: impl Into<String>,
        g: impl Fn(T) -> T + Send + Sync + 'static,
        g1: impl Fn(T) -> T + Send + Sync + 'static,
        g2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            g: Arc::new(g),
            g1: Arc::new(g1),
            g2: Arc::new(g2),
            kinks: Vec::new(),
        }
    }

    /// Declares points where `g` is not smooth; derivative checks refuse them.
    pub fn with_kinks(mut self, kinks: impl IntoIterator<Item = T>) -> Self {
        self.kinks.extend(kinks);
        self
    }

    pub fn linear() -> Self {
        Self::new(LINEAR, |x| x, |_| T::one(), |_| T::zero())
    }

    /// `max(0, x)`. The first derivative is the strict indicator `[x > 0]`,
    /// so `g'(0) = 0`; the Dirac second derivative is taken as zero.
    pub fn relu() -> Self {
        Self::new(
            RELU,
            |x: T| if x > T::zero() { x } else { T::zero() },
            |x: T| if x > T::zero() { T::one() } else { T::zero() },
            |_| T::zero(),
        )
        .with_kinks([T::zero()])
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kinks(&self) -> &[T] {
        &self.kinks
    }

    #[inline]
    pub fn g(&self, x: T) -> T {
        (self.g)(x)
    }

    #[inline]
    pub fn g1(&self, x: T) -> T {
        (self.g1)(x)
    }

    #[inline]
    pub fn g2(&self, x: T) -> T {
        (self.g2)(x)
    }

    pub fn is_linear(&self) -> bool {
        self.id == LINEAR
    }
}

impl<T> fmt::Debug for Transform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform").field("id", &self.id).finish()
    }
}

/// Looks up one of the built-in transforms by id.
pub fn builtin<T: Scalar>(id: &str) -> Result<Transform<T>> {
    match id {
        LINEAR => Ok(Transform::linear()),
        RELU => Ok(Transform::relu()),
        other => Err(HgfError::UnknownTransform(other.to_string())),
    }
}

/// Transforms addressable by id from a network config.
#[derive(Clone, Debug)]
pub struct TransformRegistry<T> {
    entries: BTreeMap<String, Transform<T>>,
}

impl<T: Scalar> Default for TransformRegistry<T> {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for t in [Transform::linear(), Transform::relu()] {
            entries.insert(t.id().to_string(), t);
        }
        Self { entries }
    }
}

impl<T: Scalar> TransformRegistry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, transform: Transform<T>) -> Result<()> {
        if self.entries.contains_key(transform.id()) {
            return Err(HgfError::DuplicateTransform(transform.id().to_string()));
        }
        self.entries.insert(transform.id().to_string(), transform);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<Transform<T>> {
        self.entries
            .get(id)
            .cloned()
            .ok_or_else(|| HgfError::UnknownTransform(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Largest deviation of the declared derivatives from central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeError<T> {
    pub first: T,
    pub second: T,
}

/// Compares `g1` and `g2` against central first and second differences of `g`
/// with step `h` at each point.
///
/// The step is snapped so that `x + h` and `x - h` are both exactly
/// representable; otherwise rounding of the abscissae alone leaves errors of
/// order `eps / h^2` in the second difference.
pub fn check_derivatives<T: Scalar>(
    t: &Transform<T>,
    points: &[T],
    h: T,
) -> Result<DerivativeError<T>> {
    if !(h.is_finite() && h > T::zero()) {
        return Err(HgfError::InvalidStep(h.as_f64()));
    }
    let mut worst = DerivativeError {
        first: T::zero(),
        second: T::zero(),
    };
    for &x in points {
        if let Some(&locus) = t.kinks().iter().find(|&&k| (x - k).abs() <= h) {
            return Err(HgfError::NonSmoothPoint {
                transform: t.id().to_string(),
                point: x.as_f64(),
                locus: locus.as_f64(),
            });
        }
        let step = (x.abs() + h) - x.abs();
        let (lo, mid, hi) = (t.g(x - step), t.g(x), t.g(x + step));
        let (d1, d2) = (t.g1(x), t.g2(x));
        for v in [lo, mid, hi, d1, d2] {
            if !v.is_finite() {
                return Err(HgfError::NonFiniteTransform {
                    transform: t.id().to_string(),
                    point: x.as_f64(),
                });
            }
        }
        let two = T::lit(2.0);
        let fd1 = (hi - lo) / (two * step);
        let fd2 = (hi - two * mid + lo) / (step * step);
        worst.first = worst.first.max((fd1 - d1).abs());
        worst.second = worst.second.max((fd2 - d2).abs());
    }
    Ok(worst)
}
