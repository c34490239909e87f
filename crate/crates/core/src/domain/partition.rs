//! Gauges, tagged partitions, delta-fineness and Riemann sums.

use std::fmt;
use std::sync::Arc;

use super::set::{Interval, MeasurableSet};
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::measure::ScalarMeasure;
use crate::scalar::{ordered_sum, Real};

/// Default cap on the number of cells [`refine_to_delta_fine`] may create.
pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;

/// A gauge on `[a, +inf]`: `delta(x) = (x - d(x), x + d(x))` for finite `x`
/// and `delta(+inf) = (b_inf, +inf]`.
#[derive(Clone)]
pub struct Gauge<T: Real = f64> {
    d: Arc<dyn Fn(T) -> T + Send + Sync>,
    pub b_inf: Option<T>,
}

impl<T: Real> fmt::Debug for Gauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gauge").field("b_inf", &self.b_inf).finish_non_exhaustive()
    }
}

impl<T: Real> Gauge<T> {
    pub fn new(d: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { d: Arc::new(d), b_inf: None }
    }

    pub fn constant(h: T) -> Self {
        Self::new(move |_| h)
    }

    pub fn with_b_inf(mut self, b: T) -> Self {
        self.b_inf = Some(b);
        self
    }

    pub fn radius(&self, x: T) -> T {
        (self.d)(x)
    }

    /// Whether `cell` lies inside the gauge neighbourhood of `tag`.
    pub fn admits(&self, cell: &Interval<T>, tag: T) -> bool {
        if tag == T::infinity() {
            return match self.b_inf {
                Some(b) => cell.lo > b || (cell.lo == b && !cell.closed_lo),
                None => false,
            };
        }
        let d = self.radius(tag);
        if !(d > T::zero()) || !cell.hi.is_finite() {
            return false;
        }
        let (l, r) = (tag - d, tag + d);
        let lo_ok = cell.lo > l || (cell.lo == l && !cell.closed_lo);
        let hi_ok = cell.hi < r || (cell.hi == r && !cell.closed_hi);
        lo_ok && hi_ok
    }
}

/// A finite list of `(cell, tag)` pairs with `tag` in `cell` and cells
/// meeting at most in shared endpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaggedPartition<T = f64> {
    items: Vec<(Interval<T>, T)>,
}

impl<T: Real> TaggedPartition<T> {
    pub fn new(mut items: Vec<(Interval<T>, T)>) -> Result<Self> {
        for (cell, tag) in &items {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("empty cell {cell}")));
            }
            if !cell.contains(*tag) {
                return Err(Error::InvalidPartition(format!("tag {tag} outside cell {cell}")));
            }
        }
        items.sort_by(|a, b| a.0.lo.partial_cmp(&b.0.lo).unwrap().then(a.0.hi.partial_cmp(&b.0.hi).unwrap()));
        for w in items.windows(2) {
            let (a, b) = (&w[0].0, &w[1].0);
            // overlap only in a shared endpoint (a null set for atomless measures)
            if a.hi > b.lo && !(a.is_degenerate() && a.lo == b.lo) {
                return Err(Error::InvalidPartition(format!("cells {a} and {b} overlap")));
            }
        }
        Ok(Self { items })
    }

    pub(crate) fn from_sorted_unchecked(items: Vec<(Interval<T>, T)>) -> Self {
        Self { items }
    }

    pub fn items(&self) -> &[(Interval<T>, T)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn union_of_cells(&self) -> MeasurableSet<T> {
        MeasurableSet::from_intervals(self.items.iter().map(|i| i.0).collect())
    }

    /// True when the cells cover exactly `set`.
    pub fn is_partition_of(&self, set: &MeasurableSet<T>) -> bool {
        self.union_of_cells() == *set
    }

    /// Concatenation of partitions of disjoint sets.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut items = self.items.clone();
        items.extend_from_slice(&other.items);
        Self::new(items)
    }
}

pub fn is_delta_fine<T: Real>(p: &TaggedPartition<T>, gauge: &Gauge<T>) -> bool {
    p.items().iter().all(|(cell, tag)| gauge.admits(cell, *tag))
}

/// Builds a delta-fine partition of `set` by recursive bisection.
///
/// A cell is accepted with its midpoint as tag when the gauge admits it, else
/// with an endpoint, else it is bisected. An unbounded part becomes finite
/// cells up to `b_inf` plus the tail `(b_inf, +inf]` tagged `+inf`.
pub fn refine_to_delta_fine<T: Real>(set: &MeasurableSet<T>, gauge: &Gauge<T>) -> Result<TaggedPartition<T>> {
    refine_with_budget(set, gauge, DEFAULT_CELL_BUDGET)
}

pub fn refine_with_budget<T: Real>(set: &MeasurableSet<T>, gauge: &Gauge<T>, cap: usize) -> Result<TaggedPartition<T>> {
    let mut items = Vec::new();
    for part in set.parts() {
        if part.lo == T::neg_infinity() {
            return Err(Error::InvalidArgument("gauges are defined on [a, +inf]; lower end must be finite".into()));
        }
        let mut bounded = *part;
        let mut tail = None;
        if part.hi == T::infinity() {
            let b = gauge
                .b_inf
                .ok_or_else(|| Error::InvalidArgument("unbounded set needs a gauge with b_inf".into()))?;
            if b < part.lo || (b == part.lo && !part.closed_lo) {
                items.push((*part, T::infinity()));
                continue;
            }
            bounded = Interval { lo: part.lo, hi: b, closed_lo: part.closed_lo, closed_hi: true };
            tail = Some(Interval { lo: b, hi: T::infinity(), closed_lo: false, closed_hi: part.closed_hi });
        }
        let mut stack = vec![bounded];
        while let Some(cell) = stack.pop() {
            if cell.is_empty() {
                continue;
            }
            match choose_tag(&cell, gauge) {
                Some(tag) => items.push((cell, tag)),
                None => {
                    let m = cell.midpoint();
                    if m <= cell.lo || m >= cell.hi {
                        return Err(Error::RefinementBudgetExceeded { cap });
                    }
                    let (l, r) = cell.bisect_at(m);
                    // right first so that the left half is processed next (left-to-right output)
                    stack.push(r);
                    stack.push(l);
                }
            }
            if items.len() + stack.len() > cap {
                return Err(Error::RefinementBudgetExceeded { cap });
            }
        }
        if let Some(t) = tail {
            if !t.is_empty() {
                items.push((t, T::infinity()));
            }
        }
    }
    Ok(TaggedPartition::from_sorted_unchecked(items))
}

fn choose_tag<T: Real>(cell: &Interval<T>, gauge: &Gauge<T>) -> Option<T> {
    let mid = cell.midpoint();
    if gauge.admits(cell, mid) {
        return Some(mid);
    }
    [(cell.closed_lo, cell.lo), (cell.closed_hi, cell.hi)]
        .into_iter()
        .find(|&(closed, x)| closed && gauge.admits(cell, x))
        .map(|(_, x)| x)
}

/// `S(f, P) = sum_j f(tag_j) nu(cell_j)`, summed left to right, with `0 * inf = 0`.
pub fn riemann_sum<T: Real>(f: &Integrand<T>, p: &TaggedPartition<T>, nu: &ScalarMeasure<T>) -> Result<T> {
    let mut terms = Vec::with_capacity(p.len());
    for (cell, tag) in p.items() {
        let v = f.eval(*tag);
        let m = nu.measure_of_interval(cell);
        terms.push(product_term(v, m, *tag)?);
    }
    Ok(ordered_sum(terms))
}

/// `v * m` with the convention `0 * (+-inf) = 0`.
pub(crate) fn product_term<T: Real>(v: T, m: T, tag: T) -> Result<T> {
    if v == T::zero() || m == T::zero() {
        return Ok(T::zero());
    }
    let p = v * m;
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::NonFiniteSum { tag: tag.to_f64_lossy() })
    }
}
