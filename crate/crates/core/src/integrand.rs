//! Scalar integrands: a point evaluator plus the metadata the gauge
//! integrator needs (jump locations, exempt points, value at `+inf`).

use std::fmt;
use std::sync::Arc;

use crate::domain::MeasurableSet;
use crate::scalar::Real;

type Eval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A real function on the (compactified) line.
///
/// `exempt` lists points where the evaluator must not be called; the
/// integrator treats the function as `0` there, which changes nothing up to
/// a null set. `breakpoints` are locations of jumps or kinks that cells
/// should not straddle.
#[derive(Clone)]
pub struct Integrand<T: Real = f64> {
    eval: Eval<T>,
    breakpoints: Vec<T>,
    exempt: Vec<T>,
    at_infinity: Option<T>,
}

impl<T: Real> fmt::Debug for Integrand<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("breakpoints", &self.breakpoints)
            .field("exempt", &self.exempt)
            .field("at_infinity", &self.at_infinity)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Integrand<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f), breakpoints: Vec::new(), exempt: Vec::new(), at_infinity: None }
    }

    pub fn constant(c: T) -> Self {
        Self::new(move |_| c).with_value_at_infinity(c)
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// `1` on `set`, `0` elsewhere, with the set's endpoints as breakpoints.
    pub fn indicator(set: &MeasurableSet<T>) -> Self {
        let s = set.clone();
        let at_inf = if set.contains(T::infinity()) { T::one() } else { T::zero() };
        Self::new(move |t| s.indicator(t))
            .with_breakpoints(endpoints(set))
            .with_value_at_infinity(at_inf)
    }

    pub fn with_breakpoints(mut self, pts: impl IntoIterator<Item = T>) -> Self {
        self.breakpoints.extend(pts.into_iter().filter(|x| x.is_finite()));
        sort_dedup(&mut self.breakpoints);
        self
    }

    pub fn with_exempt(mut self, pts: impl IntoIterator<Item = T>) -> Self {
        self.exempt.extend(pts.into_iter().filter(|x| x.is_finite()));
        sort_dedup(&mut self.exempt);
        self
    }

    pub fn with_value_at_infinity(mut self, v: T) -> Self {
        self.at_infinity = Some(v);
        self
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn exempt(&self) -> &[T] {
        &self.exempt
    }

    pub fn value_at_infinity(&self) -> Option<T> {
        self.at_infinity
    }

    pub fn is_exempt(&self, t: T) -> bool {
        self.exempt.binary_search_by(|x| x.partial_cmp(&t).unwrap()).is_ok()
    }

    /// Value at `t`; `0` on exempt points, the declared value at `+inf`.
    pub fn eval(&self, t: T) -> T {
        if t == T::infinity() {
            return self.at_infinity.unwrap_or_else(T::nan);
        }
        if self.is_exempt(t) {
            return T::zero();
        }
        (self.eval)(t)
    }

    /// Evaluates without the exempt-point lookup (caller guarantees `t` is not exempt).
    #[inline]
    pub(crate) fn eval_raw(&self, t: T) -> T {
        (self.eval)(t)
    }

    /// Pointwise `a*self + b*other`; metadata is merged.
    pub fn linear_combination(&self, a: T, other: &Integrand<T>, b: T) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let at_inf = match (self.at_infinity, other.at_infinity) {
            (Some(x), Some(y)) => Some(a * x + b * y),
            _ => None,
        };
        let mut out = Self::new(move |t| a * f.eval(t) + b * g.eval(t))
            .with_breakpoints(self.breakpoints.iter().chain(&other.breakpoints).copied())
            .with_exempt(self.exempt.iter().chain(&other.exempt).copied());
        out.at_infinity = at_inf;
        out
    }

    pub fn scaled(&self, a: T) -> Self {
        self.linear_combination(a, &Self::zero(), T::zero())
    }

    /// Pointwise product.
    pub fn product(&self, other: &Integrand<T>) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let at_inf = match (self.at_infinity, other.at_infinity) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        let mut out = Self::new(move |t| f.eval(t) * g.eval(t))
            .with_breakpoints(self.breakpoints.iter().chain(&other.breakpoints).copied())
            .with_exempt(self.exempt.iter().chain(&other.exempt).copied());
        out.at_infinity = at_inf;
        out
    }

    /// Pointwise `|f|`.
    pub fn abs(&self) -> Self {
        let f = self.clone();
        let mut out = Self::new(move |t| f.eval(t).abs())
            .with_breakpoints(self.breakpoints.iter().copied())
            .with_exempt(self.exempt.iter().copied());
        out.at_infinity = self.at_infinity.map(T::abs);
        out
    }

    /// `f` restricted to `set` (zero outside).
    pub fn restricted(&self, set: &MeasurableSet<T>) -> Self {
        self.product(&Self::indicator(set))
    }
}

/// `sum_i coef_i * chi_{E_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction<T = f64> {
    pub terms: Vec<(T, MeasurableSet<T>)>,
}

impl<T: Real> SimpleFunction<T> {
    pub fn new(terms: Vec<(T, MeasurableSet<T>)>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, t: T) -> T {
        self.terms.iter().map(|(c, e)| *c * e.indicator(t)).fold(T::zero(), |a, b| a + b)
    }

    pub fn to_integrand(&self) -> Integrand<T> {
        let me = self.clone();
        let at_inf = self.eval(T::infinity());
        Integrand::new(move |t| me.eval(t))
            .with_breakpoints(self.terms.iter().flat_map(|(_, e)| endpoints(e)))
            .with_value_at_infinity(at_inf)
    }
}

pub(crate) fn endpoints<T: Real>(set: &MeasurableSet<T>) -> Vec<T> {
    set.parts().iter().flat_map(|p| [p.lo, p.hi]).filter(|x| x.is_finite()).collect()
}

pub(crate) fn sort_dedup<T: Real>(v: &mut Vec<T>) {
    v.retain(|x| !x.is_nan());
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exempt_points_read_as_zero() {
        let f = Integrand::new(|t: f64| 1.0 / t).with_exempt([0.0]);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(2.0), 0.5);
    }

    #[test]
    fn simple_function_evaluates_terms() {
        let s = SimpleFunction::new(vec![
            (2.0, MeasurableSet::closed(0.0, 0.5).unwrap()),
            (1.0, MeasurableSet::closed(0.25, 1.0).unwrap()),
        ]);
        assert_eq!(s.eval(0.3), 3.0);
        assert_eq!(s.eval(0.75), 1.0);
        let f = s.to_integrand();
        assert_eq!(f.breakpoints(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(f.value_at_infinity(), Some(0.0));
    }

    #[test]
    fn infinity_needs_declared_value() {
        let f = Integrand::new(|t: f64| t);
        assert!(f.eval(f64::INFINITY).is_nan());
        assert_eq!(f.with_value_at_infinity(0.0).eval(f64::INFINITY), 0.0);
    }
}
