//! Dense polynomials and piecewise polynomials with exact antiderivatives.

use crate::scalar::{sgn, Real};

/// Polynomial with ascending coefficients, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T = f64> {
    coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| *c == T::zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `t`.
    pub fn identity() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize_lossy(k))
                .collect(),
        )
    }

    /// Antiderivative vanishing at `0`.
    pub fn antiderivative(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(T::zero());
        c.extend(self.coeffs.iter().enumerate().map(|(k, &a)| a / T::from_usize_lossy(k + 1)));
        Self::new(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_else(T::zero)
                        + other.coeffs.get(k).copied().unwrap_or_else(T::zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, a: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * a).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = c[i + j] + a * b;
            }
        }
        Self::new(c)
    }

    /// Sign of `p(t)` as `t -> +inf` (or `-inf` when `negative`).
    pub fn sign_at_infinity(&self, negative: bool) -> T {
        match self.degree() {
            None => T::zero(),
            Some(d) => {
                let lead = sgn(self.coeffs[d]);
                if negative && d % 2 == 1 {
                    -lead
                } else {
                    lead
                }
            }
        }
    }

    /// `int_a^b p(t) dt`, with infinite limits allowed.
    pub fn integral(&self, a: T, b: T) -> T {
        if a == b || self.is_zero() {
            return T::zero();
        }
        if a > b {
            return -self.integral(b, a);
        }
        if a.is_finite() && b.is_finite() {
            return self.eval_antiderivative(b) - self.eval_antiderivative(a);
        }
        let anti = self.antiderivative();
        // an unbounded range diverges unless the integrand vanishes identically
        let upper = if b.is_finite() { T::zero() } else { anti.sign_at_infinity(false) };
        let lower = if a.is_finite() { T::zero() } else { anti.sign_at_infinity(true) };
        (upper - lower) * T::infinity()
    }

    /// `P(x)` for the antiderivative with `P(0) = 0`, without allocating.
    fn eval_antiderivative(&self, x: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(T::zero(), |acc, (k, &c)| acc * x + c / T::from_usize_lossy(k + 1))
            * x
    }

    /// Distinct real roots in the open interval `(a, b)` where `p` changes sign,
    /// in increasing order. Infinite limits are allowed.
    pub fn sign_changes(&self, a: T, b: T) -> Vec<T> {
        let Some(deg) = self.degree() else { return Vec::new() };
        if deg == 0 || a >= b {
            return Vec::new();
        }
        if deg == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return if r > a && r < b { vec![r] } else { Vec::new() };
        }
        let mut knots = vec![a];
        knots.extend(self.derivative().sign_changes(a, b));
        knots.push(b);
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            if let Some(r) = self.monotone_root(w[0], w[1]) {
                if roots.last().is_none_or(|&l: &T| r > l) {
                    roots.push(r);
                }
            }
        }
        roots
    }

    fn sign_at(&self, t: T) -> T {
        if t == T::infinity() {
            self.sign_at_infinity(false)
        } else if t == T::neg_infinity() {
            self.sign_at_infinity(true)
        } else {
            sgn(self.eval(t))
        }
    }

    // Root in (lo, hi) of a polynomial monotone on that range, if the sign changes strictly inside.
    fn monotone_root(&self, lo: T, hi: T) -> Option<T> {
        let (slo, shi) = (self.sign_at(lo), self.sign_at(hi));
        if self.eval(lo) == T::zero() || self.eval(hi) == T::zero() || slo == shi {
            return None;
        }
        let (mut l, mut h) = (lo, hi);
        let two = T::lit(2.0);
        if !l.is_finite() {
            let mut step = T::one().max(h.abs());
            l = h - step;
            while self.sign_at(l) != slo {
                step = step * two;
                l = h - step;
            }
        }
        if !h.is_finite() {
            let mut step = T::one().max(l.abs());
            h = l + step;
            while self.sign_at(h) != shi {
                step = step * two;
                h = l + step;
            }
        }
        for _ in 0..200 {
            let m = l + (h - l) / two;
            if m <= l || m >= h {
                break;
            }
            let sm = sgn(self.eval(m));
            if self.eval(m) == T::zero() {
                return Some(m);
            }
            if sm == slo {
                l = m;
            } else {
                h = m;
            }
        }
        Some(l + (h - l) / two)
    }
}

/// A function that is polynomial on each cell of `breaks` and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly<T = f64> {
    breaks: Vec<T>,
    pieces: Vec<Poly<T>>,
}

impl<T: Real> PiecewisePoly<T> {
    /// `breaks` must be strictly increasing with `breaks.len() == pieces.len() + 1`.
    pub fn new(breaks: Vec<T>, pieces: Vec<Poly<T>>) -> Self {
        if breaks.is_empty() && pieces.is_empty() {
            return Self::zero();
        }
        assert_eq!(breaks.len(), pieces.len() + 1, "breaks/pieces length mismatch");
        assert!(breaks.windows(2).all(|w| w[0] < w[1]), "breaks must increase");
        Self { breaks, pieces }
    }

    /// A single polynomial on `[lo, hi]`.
    pub fn single(lo: T, hi: T, p: Poly<T>) -> Self {
        Self::new(vec![lo, hi], vec![p])
    }

    pub fn zero() -> Self {
        Self { breaks: Vec::new(), pieces: Vec::new() }
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly<T>] {
        &self.pieces
    }

    pub fn support(&self) -> Option<(T, T)> {
        Some((*self.breaks.first()?, *self.breaks.last()?))
    }

    /// The polynomial in force at `t`, `None` outside the support.
    pub(crate) fn piece_at(&self, t: T) -> Option<&Poly<T>> {
        self.piece_index(t).map(|i| &self.pieces[i])
    }

    fn piece_index(&self, t: T) -> Option<usize> {
        let n = self.pieces.len();
        if n == 0 || t < self.breaks[0] || t > self.breaks[n] {
            return None;
        }
        let i = self.breaks.partition_point(|&b| b <= t);
        Some(i.saturating_sub(1).min(n - 1))
    }

    pub fn eval(&self, t: T) -> T {
        self.piece_index(t).map_or(T::zero(), |i| self.pieces[i].eval(t))
    }

    pub fn integral(&self, a: T, b: T) -> T {
        if a >= b || self.pieces.is_empty() {
            return T::zero();
        }
        let start = self.breaks.partition_point(|&x| x <= a).saturating_sub(1);
        let mut total = T::zero();
        for i in start..self.pieces.len() {
            let (lo, hi) = (self.breaks[i].max(a), self.breaks[i + 1].min(b));
            if lo >= b {
                break;
            }
            if lo < hi {
                total = total + self.pieces[i].integral(lo, hi);
            }
        }
        total
    }

    /// Rewrites onto the given (sorted, superset) breaks; cells outside the support are zero.
    fn refined(&self, breaks: &[T]) -> Vec<Poly<T>> {
        breaks
            .windows(2)
            .map(|w| {
                let mid = mid_of(w[0], w[1]);
                match self.piece_index(mid) {
                    Some(i) if mid >= self.breaks[0] && mid <= *self.breaks.last().unwrap() => self.pieces[i].clone(),
                    _ => Poly::zero(),
                }
            })
            .collect()
    }

    fn merged_breaks(&self, other: &Self) -> Vec<T> {
        let mut b: Vec<T> = self.breaks.iter().chain(&other.breaks).copied().collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    pub fn combine(&self, other: &Self, op: impl Fn(&Poly<T>, &Poly<T>) -> Poly<T>) -> Self {
        let breaks = self.merged_breaks(other);
        if breaks.len() < 2 {
            return Self::zero();
        }
        let (a, b) = (self.refined(&breaks), other.refined(&breaks));
        let pieces = a.iter().zip(&b).map(|(p, q)| op(p, q)).collect();
        Self::new(breaks, pieces)
    }

    pub fn map_pieces(&self, op: impl Fn(&Poly<T>) -> Poly<T>) -> Self {
        Self { breaks: self.breaks.clone(), pieces: self.pieces.iter().map(op).collect() }
    }

    /// Splits every piece at its sign changes.
    pub fn split_at_sign_changes(&self) -> Self {
        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.breaks[i], self.breaks[i + 1]);
            breaks.push(lo);
            pieces.push(p.clone());
            for r in p.sign_changes(lo, hi) {
                breaks.push(r);
                pieces.push(p.clone());
            }
        }
        if let Some(&last) = self.breaks.last() {
            breaks.push(last);
        }
        // root refinement can produce equal neighbours; merge them
        let mut b2 = Vec::with_capacity(breaks.len());
        let mut p2 = Vec::with_capacity(pieces.len());
        for (k, &x) in breaks.iter().enumerate() {
            if b2.last().is_some_and(|&l| x <= l) {
                continue;
            }
            b2.push(x);
            if k < pieces.len() {
                p2.push(pieces[k].clone());
            }
        }
        p2.truncate(b2.len().saturating_sub(1));
        Self::new(b2, p2)
    }

    /// `|p|`, exact: pieces are split at roots and negated where negative.
    pub fn abs(&self) -> Self {
        let s = self.split_at_sign_changes();
        let pieces = s
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| if p.eval(mid_of(s.breaks[i], s.breaks[i + 1])) < T::zero() { p.scale(-T::one()) } else { p.clone() })
            .collect();
        Self::new(s.breaks.clone(), pieces)
    }

    /// `sign(p)` as a piecewise constant.
    pub fn sign(&self) -> Self {
        let s = self.split_at_sign_changes();
        let pieces = s
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| Poly::constant(sgn(p.eval(mid_of(s.breaks[i], s.breaks[i + 1])))))
            .collect();
        Self::new(s.breaks.clone(), pieces)
    }
}

/// A representative interior point of `(a, b)`, valid for infinite ends.
pub(crate) fn mid_of<T: Real>(a: T, b: T) -> T {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a + (b - a) / T::lit(2.0),
        (true, false) => a + T::one().max(a.abs()),
        (false, true) => b - T::one().max(b.abs()),
        (false, false) => T::zero(),
    }
}
