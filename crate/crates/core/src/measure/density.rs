//! Densities `rho: T -> R`: exact piecewise polynomials or general closures.

use std::fmt;
use std::sync::Arc;

use super::poly::{PiecewisePoly, Poly};
use super::quadrature;
use crate::error::{Error, Result};
use crate::integrand::sort_dedup;
use crate::scalar::{sgn, Real};

type Eval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Tolerance for the quadrature fallback on closure densities.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Samples per bounded piece when locating sign changes of a closure density.
const SIGN_SAMPLES: usize = 2048;

/// A closure density supported on `[lo, hi]`, smooth between `breakpoints`.
#[derive(Clone)]
pub struct FuncDensity<T: Real = f64> {
    f: Eval<T>,
    pub lo: T,
    pub hi: T,
    pub breakpoints: Vec<T>,
}

impl<T: Real> fmt::Debug for FuncDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FuncDensity")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

/// Density of a scalar measure with respect to Lebesgue measure.
#[derive(Debug, Clone)]
pub enum Density<T: Real = f64> {
    Poly(PiecewisePoly<T>),
    Func(FuncDensity<T>),
}

impl<T: Real> Density<T> {
    pub fn zero() -> Self {
        Density::Poly(PiecewisePoly::zero())
    }

    /// Constant `c` on `[lo, hi]` (either end may be infinite).
    pub fn constant(c: T, lo: T, hi: T) -> Self {
        Density::Poly(PiecewisePoly::single(lo, hi, Poly::constant(c)))
    }

    pub fn poly(lo: T, hi: T, p: Poly<T>) -> Self {
        Density::Poly(PiecewisePoly::single(lo, hi, p))
    }

    pub fn func(lo: T, hi: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Density::Func(FuncDensity { f: Arc::new(f), lo, hi, breakpoints: Vec::new() })
    }

    pub fn with_breakpoints(self, pts: impl IntoIterator<Item = T>) -> Self {
        match self {
            Density::Func(mut fd) => {
                fd.breakpoints.extend(pts);
                sort_dedup(&mut fd.breakpoints);
                Density::Func(fd)
            }
            other => other,
        }
    }

    pub fn eval(&self, t: T) -> T {
        match self {
            Density::Poly(p) => p.eval(t),
            Density::Func(fd) => {
                if t < fd.lo || t > fd.hi {
                    T::zero()
                } else {
                    (fd.f)(t)
                }
            }
        }
    }

    pub fn support(&self) -> Option<(T, T)> {
        match self {
            Density::Poly(p) => p.support(),
            Density::Func(fd) => Some((fd.lo, fd.hi)),
        }
    }

    /// Points where the density may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b = match self {
            Density::Poly(p) => p.breaks().to_vec(),
            Density::Func(fd) => {
                let mut v = fd.breakpoints.clone();
                v.extend([fd.lo, fd.hi]);
                v
            }
        };
        b.retain(|x| x.is_finite());
        sort_dedup(&mut b);
        b
    }

    /// `int_a^b rho`.
    pub fn integral(&self, a: T, b: T) -> T {
        match self {
            Density::Poly(p) => p.integral(a, b),
            Density::Func(fd) => {
                let (lo, hi) = (a.max(fd.lo), b.min(fd.hi));
                if lo >= hi {
                    return T::zero();
                }
                let mut knots = vec![lo];
                knots.extend(fd.breakpoints.iter().copied().filter(|&x| x > lo && x < hi));
                knots.push(hi);
                let f = |t: T| (fd.f)(t);
                let tol = T::lit(QUADRATURE_TOL);
                knots.windows(2).map(|w| quadrature::integrate(&f, w[0], w[1], tol)).fold(T::zero(), |x, y| x + y)
            }
        }
    }

    fn as_func(&self) -> FuncDensity<T> {
        match self {
            Density::Func(fd) => fd.clone(),
            Density::Poly(p) => {
                let q = p.clone();
                let (lo, hi) = p.support().unwrap_or((T::zero(), T::zero()));
                FuncDensity { f: Arc::new(move |t| q.eval(t)), lo, hi, breakpoints: p.breaks().to_vec() }
            }
        }
    }

    pub fn scale(&self, a: T) -> Self {
        match self {
            Density::Poly(p) => Density::Poly(p.map_pieces(|q| q.scale(a))),
            Density::Func(_) => self.zip_with(&Density::zero(), move |x, _| a * x),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Density::Poly(p), Density::Poly(q)) => Density::Poly(p.combine(q, |a, b| a.add(b))),
            _ => self.zip_with(other, |x, y| x + y),
        }
    }

    /// `sum_i c_i rho_i`.
    pub fn linear_combination(terms: &[(T, &Density<T>)]) -> Self {
        terms.iter().fold(Density::zero(), |acc, (c, d)| acc.add(&d.scale(*c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Density::Poly(p), Density::Poly(q)) => Density::Poly(p.combine(q, |a, b| a.mul(b))),
            _ => self.zip_with(other, |x, y| x * y),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        let (a, b) = (self.as_func(), other.as_func());
        let (lo, hi) = match (self.support(), other.support()) {
            (Some((l1, h1)), Some((l2, h2))) => (l1.min(l2), h1.max(h2)),
            (Some(s), None) | (None, Some(s)) => s,
            (None, None) => (T::zero(), T::zero()),
        };
        let mut breakpoints: Vec<T> = a.breakpoints.iter().chain(&b.breakpoints).copied().collect();
        breakpoints.extend([a.lo, a.hi, b.lo, b.hi]);
        breakpoints.retain(|x| x.is_finite());
        sort_dedup(&mut breakpoints);
        let (da, db) = (Density::Func(a), Density::Func(b));
        Density::Func(FuncDensity { f: Arc::new(move |t| op(da.eval(t), db.eval(t))), lo, hi, breakpoints })
    }

    /// Sign changes of the density, exact for polynomials, sampled and bisected otherwise.
    pub fn sign_changes(&self) -> Result<Vec<T>> {
        match self {
            Density::Poly(p) => {
                let s = p.split_at_sign_changes();
                Ok(s.breaks().to_vec())
            }
            Density::Func(fd) => {
                let mut knots = vec![fd.lo];
                knots.extend(fd.breakpoints.iter().copied().filter(|&x| x > fd.lo && x < fd.hi));
                knots.push(fd.hi);
                let mut roots = Vec::new();
                for w in knots.windows(2) {
                    roots.extend(sampled_roots(&*fd.f, w[0], w[1])?);
                }
                Ok(roots)
            }
        }
    }

    /// `|rho|`.
    pub fn abs(&self) -> Result<Self> {
        match self {
            Density::Poly(p) => Ok(Density::Poly(p.abs())),
            Density::Func(fd) => {
                let roots = self.sign_changes()?;
                let f = fd.f.clone();
                let mut out = fd.clone();
                out.f = Arc::new(move |t| f(t).abs());
                out.breakpoints.extend(roots);
                sort_dedup(&mut out.breakpoints);
                Ok(Density::Func(out))
            }
        }
    }

    /// `sign(rho)`.
    pub fn sign(&self) -> Result<Self> {
        match self {
            Density::Poly(p) => Ok(Density::Poly(p.sign())),
            Density::Func(fd) => {
                let roots = self.sign_changes()?;
                let f = fd.f.clone();
                let mut out = fd.clone();
                out.f = Arc::new(move |t| sgn(f(t)));
                out.breakpoints.extend(roots);
                sort_dedup(&mut out.breakpoints);
                Ok(Density::Func(out))
            }
        }
    }
}

fn sampled_roots<T: Real>(f: &(dyn Fn(T) -> T + Send + Sync), a: T, b: T) -> Result<Vec<T>> {
    if !(a.is_finite() && b.is_finite()) {
        // map the unbounded piece onto (0, 1) via t = a + s/(1-s) style substitutions
        let (lo, hi) = (a, b);
        let map = move |s: T| -> T {
            let one = T::one();
            match (lo.is_finite(), hi.is_finite()) {
                (true, false) => lo + s / (one - s),
                (false, true) => hi - (one - s) / s,
                _ => (s - T::lit(0.5)) / (s * (one - s)),
            }
        };
        let g = |s: T| f(map(s));
        return Ok(sampled_roots(&g, T::zero(), T::one())?.into_iter().map(map).collect());
    }
    let n = SIGN_SAMPLES;
    let h = (b - a) / T::from_usize_lossy(n);
    let mut roots = Vec::new();
    let mut prev_x = a + h / T::lit(1024.0);
    let mut prev = f(prev_x);
    for k in 1..=n {
        let x = if k == n { b - h / T::lit(1024.0) } else { a + h * T::from_usize_lossy(k) };
        let v = f(x);
        if !v.is_finite() || !prev.is_finite() {
            return Err(Error::SignChangeResolutionFailure(format!("non-finite density value near {}", x.to_f64_lossy())));
        }
        if sgn(v) * sgn(prev) < T::zero() {
            let (mut l, mut r, sl) = (prev_x, x, sgn(prev));
            for _ in 0..200 {
                let m = l + (r - l) / T::lit(2.0);
                if m <= l || m >= r {
                    break;
                }
                let fm = f(m);
                if !fm.is_finite() {
                    return Err(Error::SignChangeResolutionFailure(format!("non-finite density value near {}", m.to_f64_lossy())));
                }
                if sgn(fm) == sl {
                    l = m;
                } else {
                    r = m;
                }
            }
            roots.push(l + (r - l) / T::lit(2.0));
        }
        if v != T::zero() {
            prev = v;
            prev_x = x;
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_and_func_routes_agree() {
        let p = Density::poly(0.0, 1.0, Poly::new(vec![1.0, -3.0, 2.0]));
        let f = Density::func(0.0, 1.0, |t: f64| 1.0 - 3.0 * t + 2.0 * t * t);
        assert!((p.integral(0.1, 0.9) - f.integral(0.1, 0.9)).abs() < 1e-13);
        let pa = p.abs().unwrap();
        let fa = f.abs().unwrap();
        assert!((pa.integral(0.0, 1.0) - fa.integral(0.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn mixed_operations_fall_back_to_closures() {
        let p = Density::constant(2.0, 0.0, 1.0);
        let f = Density::func(0.0, std::f64::consts::PI, f64::sin);
        let s = p.add(&f);
        assert!((s.integral(0.0, 1.0) - (2.0 + 1.0 - 1f64.cos())).abs() < 1e-12);
        let m = p.mul(&f);
        assert!((m.integral(0.0, 1.0) - 2.0 * (1.0 - 1f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn non_finite_density_fails_sign_resolution() {
        let f = Density::func(-1.0, 1.0, |t: f64| 1.0 / t);
        assert!(matches!(f.abs(), Err(Error::SignChangeResolutionFailure(_))));
    }
}
