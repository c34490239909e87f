//! Intervals of the extended real line and finite disjoint unions of them.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// An interval with independently open or closed ends.
///
/// Endpoints may be infinite; a closed infinite end means the ideal point
/// itself belongs to the interval (compactified line).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T = f64> {
    pub lo: T,
    pub hi: T,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T, closed_lo: bool, closed_hi: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval {
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        Ok(Self { lo, hi, closed_lo, closed_hi })
    }

    /// `[lo, hi]`
    pub fn closed(lo: T, hi: T) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    /// `(lo, hi)`
    pub fn open(lo: T, hi: T) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    /// `(lo, hi]`
    pub fn left_open(lo: T, hi: T) -> Result<Self> {
        Self::new(lo, hi, false, true)
    }

    /// `[lo, hi)`
    pub fn right_open(lo: T, hi: T) -> Result<Self> {
        Self::new(lo, hi, true, false)
    }

    pub fn point(x: T) -> Self {
        Self { lo: x, hi: x, closed_lo: true, closed_hi: true }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.closed_lo && self.closed_hi))
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi && !self.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, t: T) -> bool {
        let above = t > self.lo || (t == self.lo && self.closed_lo);
        let below = t < self.hi || (t == self.hi && self.closed_hi);
        above && below
    }

    pub fn width(&self) -> T {
        if self.is_empty() {
            T::zero()
        } else {
            self.hi - self.lo
        }
    }

    pub fn midpoint(&self) -> T {
        self.lo + (self.hi - self.lo) / T::lit(2.0)
    }

    /// True when `self` is a subset of `other`.
    pub fn is_subset_of(&self, other: &Interval<T>) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (other.closed_lo || !self.closed_lo));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (other.closed_hi || !self.closed_hi));
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let (lo, closed_lo) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.closed_lo),
            Some(Ordering::Less) => (other.lo, other.closed_lo),
            _ => (self.lo, self.closed_lo && other.closed_lo),
        };
        let (hi, closed_hi) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.closed_hi),
            Some(Ordering::Greater) => (other.hi, other.closed_hi),
            _ => (self.hi, self.closed_hi && other.closed_hi),
        };
        let out = Interval { lo, hi, closed_lo, closed_hi };
        (!out.is_empty()).then_some(out)
    }

    /// Splits at `x` (which must lie strictly inside) into `[lo, x]` and `(x, hi]`,
    /// keeping the outer closedness.
    pub fn bisect_at(&self, x: T) -> (Interval<T>, Interval<T>) {
        (
            Interval { lo: self.lo, hi: x, closed_lo: self.closed_lo, closed_hi: true },
            Interval { lo: x, hi: self.hi, closed_lo: false, closed_hi: self.closed_hi },
        )
    }

    // Whether `self` (ordered first) and `next` overlap or touch so that their union is an interval.
    fn joins(&self, next: &Interval<T>) -> bool {
        self.hi > next.lo || (self.hi == next.lo && (self.closed_hi || next.closed_lo))
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.closed_lo { '[' } else { '(' };
        let r = if self.closed_hi { ']' } else { ')' };
        write!(f, "{l}{},{}{r}", fmt_end(self.lo), fmt_end(self.hi))
    }
}

fn fmt_end<T: Real>(x: T) -> String {
    if x == T::infinity() {
        "+inf".into()
    } else if x == T::neg_infinity() {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// A finite union of pairwise disjoint intervals in canonical form.
///
/// Parts are sorted, nonempty, and no two parts could be merged into one
/// interval, so equal sets have equal representations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurableSet<T = f64> {
    parts: Vec<Interval<T>>,
}

/// Which set operation [`MeasurableSet::apply`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Diff,
}

impl<T: Real> MeasurableSet<T> {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn from_interval(i: Interval<T>) -> Self {
        Self::from_intervals(vec![i])
    }

    /// Canonicalizes an arbitrary list of intervals (overlaps are merged).
    pub fn from_intervals(mut parts: Vec<Interval<T>>) -> Self {
        parts.retain(|p| !p.is_empty());
        parts.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap_or(Ordering::Equal)
                .then_with(|| b.closed_lo.cmp(&a.closed_lo))
        });
        let mut out: Vec<Interval<T>> = Vec::with_capacity(parts.len());
        for p in parts {
            match out.last_mut() {
                Some(last) if last.joins(&p) => {
                    if p.lo == last.lo {
                        last.closed_lo |= p.closed_lo;
                    }
                    if p.hi > last.hi {
                        last.hi = p.hi;
                        last.closed_hi = p.closed_hi;
                    } else if p.hi == last.hi {
                        last.closed_hi |= p.closed_hi;
                    }
                }
                _ => out.push(p),
            }
        }
        Self { parts: out }
    }

    pub fn closed(lo: T, hi: T) -> Result<Self> {
        Ok(Self::from_interval(Interval::closed(lo, hi)?))
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.parts.iter().all(Interval::is_bounded)
    }

    /// Characteristic function.
    pub fn indicator(&self, t: T) -> T {
        if self.contains(t) {
            T::one()
        } else {
            T::zero()
        }
    }

    pub fn contains(&self, t: T) -> bool {
        // parts are sorted, so a binary search narrows the candidate to one part
        let idx = self.parts.partition_point(|p| p.lo < t || (p.lo == t && p.closed_lo));
        (idx > 0 && self.parts[idx - 1].contains(t)) || self.parts.get(idx).is_some_and(|p| p.contains(t))
    }

    /// Sum of part lengths (may be infinite).
    pub fn length(&self) -> T {
        self.parts.iter().map(Interval::width).fold(T::zero(), |a, b| a + b)
    }

    /// Smallest closed interval containing the set, if nonempty.
    pub fn hull(&self) -> Option<Interval<T>> {
        let first = self.parts.first()?;
        let last = self.parts.last()?;
        Some(Interval { lo: first.lo, hi: last.hi, closed_lo: first.closed_lo, closed_hi: last.closed_hi })
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.parts.clone();
        all.extend_from_slice(&other.parts);
        Self::from_intervals(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.parts.len() && j < other.parts.len() {
            let (a, b) = (&self.parts[i], &other.parts[j]);
            if let Some(x) = a.intersect(b) {
                out.push(x);
            }
            // advance whichever part ends first
            let a_first = a.hi < b.hi || (a.hi == b.hi && !a.closed_hi);
            if a_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// Complement within the compactified line `[-inf, +inf]`.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut lo = T::neg_infinity();
        let mut closed_lo = true;
        for p in &self.parts {
            out.push(Interval { lo, hi: p.lo, closed_lo, closed_hi: !p.closed_lo });
            lo = p.hi;
            closed_lo = !p.closed_hi;
        }
        out.push(Interval { lo, hi: T::infinity(), closed_lo, closed_hi: true });
        Self::from_intervals(out)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    pub fn apply(&self, other: &Self, op: SetOp) -> Self {
        match op {
            SetOp::Union => self.union(other),
            SetOp::Intersect => self.intersect(other),
            SetOp::Diff => self.difference(other),
        }
    }

    /// Splits the bounded hull into `2^depth` equal cells and intersects each with the set.
    /// Unbounded parts are kept whole in a trailing cell.
    pub fn dyadic_cells(&self, depth: u32) -> Vec<MeasurableSet<T>> {
        let bounded: Vec<Interval<T>> = self.parts.iter().filter(|p| p.is_bounded()).copied().collect();
        let mut cells = Vec::new();
        if let (Some(first), Some(last)) = (bounded.first(), bounded.last()) {
            let (a, b) = (first.lo, last.hi);
            let n = 1usize << depth;
            let h = (b - a) / T::from_usize_lossy(n);
            let bounded_set = Self { parts: bounded.clone() };
            for k in 0..n {
                let lo = a + h * T::from_usize_lossy(k);
                let hi = if k + 1 == n { b } else { a + h * T::from_usize_lossy(k + 1) };
                let cell = Interval { lo, hi, closed_lo: true, closed_hi: k + 1 == n };
                let piece = bounded_set.intersect(&Self::from_interval(cell));
                if !piece.is_empty() {
                    cells.push(piece);
                }
            }
        }
        let unbounded: Vec<Interval<T>> = self.parts.iter().filter(|p| !p.is_bounded()).copied().collect();
        if !unbounded.is_empty() {
            cells.push(Self::from_intervals(unbounded));
        }
        cells
    }
}

impl<T: Real> From<Interval<T>> for MeasurableSet<T> {
    fn from(i: Interval<T>) -> Self {
        Self::from_interval(i)
    }
}

impl<T: Real> fmt::Display for MeasurableSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join(" u "))
    }
}
