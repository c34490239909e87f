//! Signed scalar measures: an absolutely continuous part, point masses, and
//! an optional mass at the ideal point `+inf`.

mod density;
mod poly;
pub mod quadrature;

pub use density::{Density, FuncDensity, QUADRATURE_TOL};
pub use poly::{PiecewisePoly, Poly};

use crate::domain::{Interval, MeasurableSet};
use crate::error::Result;
use crate::integrand::sort_dedup;
use crate::scalar::Real;

/// `nu(A) = int_A rho + sum_{a_k in A} w_k (+ tail_mass if +inf in A)`.
#[derive(Debug, Clone)]
pub struct ScalarMeasure<T: Real = f64> {
    pub density: Density<T>,
    atoms: Vec<(T, T)>,
    pub tail_mass: Option<T>,
}

impl<T: Real> ScalarMeasure<T> {
    pub fn new(density: Density<T>) -> Self {
        Self { density, atoms: Vec::new(), tail_mass: None }
    }

    pub fn zero() -> Self {
        Self::new(Density::zero())
    }

    /// Lebesgue measure on the whole line.
    pub fn lebesgue() -> Self {
        Self::new(Density::constant(T::one(), T::neg_infinity(), T::infinity()))
    }

    /// Lebesgue measure restricted to `[lo, hi]`.
    pub fn lebesgue_on(lo: T, hi: T) -> Self {
        Self::new(Density::constant(T::one(), lo, hi))
    }

    /// Point masses; weights at a repeated location are summed.
    pub fn with_atoms(mut self, atoms: impl IntoIterator<Item = (T, T)>) -> Self {
        self.atoms.extend(atoms);
        self.atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(T, T)> = Vec::with_capacity(self.atoms.len());
        for (x, w) in self.atoms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 = last.1 + w,
                _ => merged.push((x, w)),
            }
        }
        self.atoms = merged;
        self
    }

    pub fn with_tail_mass(mut self, m: T) -> Self {
        self.tail_mass = Some(m);
        self
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    /// Locations where cells should be cut: atoms and density breakpoints.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b = self.density.breakpoints();
        b.extend(self.atoms.iter().map(|a| a.0));
        sort_dedup(&mut b);
        b
    }

    pub fn measure_of_interval(&self, i: &Interval<T>) -> T {
        if i.is_empty() {
            return T::zero();
        }
        let mut total = self.density.integral(i.lo, i.hi);
        let start = self.atoms.partition_point(|a| a.0 < i.lo);
        for &(x, w) in &self.atoms[start..] {
            if x > i.hi {
                break;
            }
            if i.contains(x) {
                total = total + w;
            }
        }
        if let Some(m) = self.tail_mass {
            if i.hi == T::infinity() && i.closed_hi {
                total = total + m;
            }
        }
        total
    }

    pub fn measure_of(&self, a: &MeasurableSet<T>) -> T {
        a.parts().iter().map(|p| self.measure_of_interval(p)).fold(T::zero(), |x, y| x + y)
    }

    /// `|nu|`: density `|rho|`, weights `|w_k|`, tail `|tail_mass|`.
    pub fn total_variation(&self) -> Result<Self> {
        Ok(Self {
            density: self.density.abs()?,
            atoms: self.atoms.iter().map(|&(x, w)| (x, w.abs())).collect(),
            tail_mass: self.tail_mass.map(T::abs),
        })
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            density: self.density.scale(c),
            atoms: self.atoms.iter().map(|&(x, w)| (x, c * w)).collect(),
            tail_mass: self.tail_mass.map(|m| c * m),
        }
    }

    /// `sum_i c_i nu_i`.
    pub fn linear_combination(terms: &[(T, &ScalarMeasure<T>)]) -> Self {
        let density = Density::linear_combination(&terms.iter().map(|(c, m)| (*c, &m.density)).collect::<Vec<_>>());
        let atoms: Vec<(T, T)> = terms.iter().flat_map(|(c, m)| m.atoms.iter().map(move |&(x, w)| (x, *c * w))).collect();
        let tail = terms.iter().fold(None, |acc: Option<T>, (c, m)| match (acc, m.tail_mass) {
            (a, None) => a,
            (None, Some(t)) => Some(*c * t),
            (Some(a), Some(t)) => Some(a + *c * t),
        });
        let mut out = Self::new(density).with_atoms(atoms);
        out.tail_mass = tail;
        out
    }

    /// `g . nu`: density `g * rho`, atoms `g(a_k) w_k`; the tail mass is kept.
    pub fn weighted(&self, g: &Density<T>) -> Self {
        Self {
            density: self.density.mul(g),
            atoms: self.atoms.iter().map(|&(x, w)| (x, g.eval(x) * w)).collect(),
            tail_mass: self.tail_mass,
        }
    }

    /// True when the density and all weights are nonnegative (density checked at sign changes).
    pub fn is_nonnegative(&self) -> Result<bool> {
        if self.atoms.iter().any(|a| a.1 < T::zero()) || self.tail_mass.is_some_and(|m| m < T::zero()) {
            return Ok(false);
        }
        let mut knots = self.density.sign_changes()?;
        if let Some((lo, hi)) = self.density.support() {
            knots.extend([lo, hi]);
        }
        sort_dedup(&mut knots);
        Ok(knots.windows(2).all(|w| self.density.eval(poly_mid(w[0], w[1])) >= T::zero()))
    }
}

fn poly_mid<T: Real>(a: T, b: T) -> T {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a + (b - a) / T::lit(2.0),
        (true, false) => a + T::one(),
        (false, true) => b - T::one(),
        _ => T::zero(),
    }
}
