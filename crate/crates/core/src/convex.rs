//! Compact convex sets of `R^d` held as support values `h(u) = sup_{x in C} u.x`
//! on a direction grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{sgn, Real};
use crate::vector::{DirectionGrid, SpaceNorm};

/// Closed-form convex sets.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator<T = f64> {
    /// `prod_i [c_i - r_i, c_i + r_i]`.
    Box { center: Vec<T>, radii: Vec<T> },
    /// Ball of the space norm.
    Ball { center: Vec<T>, radius: T },
    /// `c + sum_j [-1, 1] g_j`.
    Zonotope { center: Vec<T>, generators: Vec<Vec<T>> },
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).fold(T::zero(), |s, v| s + v)
}

impl<T: Real> Generator<T> {
    pub fn singleton(p: Vec<T>) -> Self {
        let d = p.len();
        Generator::Box { center: p, radii: vec![T::zero(); d] }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[T] {
        match self {
            Generator::Box { center, .. } | Generator::Ball { center, .. } | Generator::Zonotope { center, .. } => center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        match self {
            Generator::Box { radii, .. } => {
                if radii.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: radii.len() });
                }
                if let Some(r) = radii.iter().find(|r| !(**r >= T::zero())) {
                    return Err(Error::NegativeScalar(r.to_f64_lossy()));
                }
            }
            Generator::Ball { radius, .. } => {
                if !(*radius >= T::zero()) {
                    return Err(Error::NegativeScalar(radius.to_f64_lossy()));
                }
            }
            Generator::Zonotope { generators, .. } => {
                if let Some(g) = generators.iter().find(|g| g.len() != d) {
                    return Err(Error::DimensionMismatch { expected: d, got: g.len() });
                }
            }
        }
        Ok(())
    }

    /// `sup_{x in C} u.x`; balls use the dual of `norm`.
    pub fn support(&self, u: &[T], norm: SpaceNorm) -> T {
        let c = dot(self.center(), u);
        match self {
            Generator::Box { radii, .. } => radii.iter().zip(u).fold(c, |s, (r, v)| s + *r * v.abs()),
            Generator::Ball { radius, .. } => c + *radius * norm.dual_norm(u),
            Generator::Zonotope { generators, .. } => generators.iter().fold(c, |s, g| s + dot(g, u).abs()),
        }
    }

    /// A point of `C` attaining the support value in direction `u`.
    pub fn support_point(&self, u: &[T], norm: SpaceNorm) -> Vec<T> {
        let mut x = self.center().to_vec();
        match self {
            Generator::Box { radii, .. } => {
                for i in 0..x.len() {
                    x[i] = x[i] + radii[i] * sgn(u[i]);
                }
            }
            Generator::Ball { radius, .. } => {
                for (xi, m) in x.iter_mut().zip(norm.maximizer(u)) {
                    *xi = *xi + *radius * m;
                }
            }
            Generator::Zonotope { generators, .. } => {
                for g in generators {
                    let s = sgn(dot(g, u));
                    for i in 0..x.len() {
                        x[i] = x[i] + s * g[i];
                    }
                }
            }
        }
        x
    }

    fn as_zonotope(&self) -> Option<(Vec<T>, Vec<Vec<T>>)> {
        match self {
            Generator::Box { center, radii } => {
                let d = center.len();
                let gens = radii
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| **r != T::zero())
                    .map(|(i, r)| (0..d).map(|j| if i == j { *r } else { T::zero() }).collect())
                    .collect();
                Some((center.clone(), gens))
            }
            Generator::Zonotope { center, generators } => Some((center.clone(), generators.clone())),
            Generator::Ball { .. } => None,
        }
    }

    /// Closed form of the Minkowski sum, when one exists among the three families.
    pub fn minkowski_sum(&self, other: &Self) -> Option<Self> {
        let add = |a: &[T], b: &[T]| a.iter().zip(b).map(|(x, y)| *x + *y).collect::<Vec<T>>();
        match (self, other) {
            (Generator::Box { center: c1, radii: r1 }, Generator::Box { center: c2, radii: r2 }) => {
                Some(Generator::Box { center: add(c1, c2), radii: add(r1, r2) })
            }
            (Generator::Ball { center: c1, radius: r1 }, Generator::Ball { center: c2, radius: r2 }) => {
                Some(Generator::Ball { center: add(c1, c2), radius: *r1 + *r2 })
            }
            (Generator::Ball { center, radius }, b) | (b, Generator::Ball { center, radius }) => match b.as_zonotope() {
                Some((c, g)) if g.is_empty() => Some(Generator::Ball { center: add(center, &c), radius: *radius }),
                _ => None,
            },
            (a, b) => {
                let (c1, mut g1) = a.as_zonotope()?;
                let (c2, g2) = b.as_zonotope()?;
                g1.extend(g2);
                Some(Generator::Zonotope { center: add(&c1, &c2), generators: g1 })
            }
        }
    }

    pub fn scaled(&self, lambda: T) -> Self {
        let sc = |v: &[T]| v.iter().map(|x| lambda * *x).collect::<Vec<T>>();
        match self {
            Generator::Box { center, radii } => Generator::Box { center: sc(center), radii: sc(radii) },
            Generator::Ball { center, radius } => Generator::Ball { center: sc(center), radius: lambda * *radius },
            Generator::Zonotope { center, generators } => {
                Generator::Zonotope { center: sc(center), generators: generators.iter().map(|g| sc(g)).collect() }
            }
        }
    }
}

/// A convex set through its support values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet<T: Real = f64> {
    grid: Arc<DirectionGrid<T>>,
    values: Vec<T>,
    generator: Option<Generator<T>>,
}

/// Outcome of [`validate_convexity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCheck<T = f64> {
    pub convex: bool,
    /// Most negative slack found (`>= 0` when every check passes).
    pub worst: T,
}

/// Slack below which sampled support values are rejected, relative to their scale.
pub const CONVEXITY_TOL: f64 = 1e-10;

impl<T: Real> SupportSet<T> {
    pub fn from_generator(g: Generator<T>, grid: Arc<DirectionGrid<T>>) -> Result<Self> {
        g.validate()?;
        if g.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: g.dim() });
        }
        let values = grid.iter().map(|u| g.support(u, grid.norm())).collect();
        Ok(Self { grid, values, generator: Some(g) })
    }

    pub fn from_values(grid: Arc<DirectionGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values, generator: None })
    }

    /// `{0}`.
    pub fn zero(grid: Arc<DirectionGrid<T>>) -> Self {
        let d = grid.dim();
        let values = vec![T::zero(); grid.len()];
        Self { grid, values, generator: Some(Generator::singleton(vec![T::zero(); d])) }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn generator(&self) -> Option<&Generator<T>> {
        self.generator.as_ref()
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `h_{A+B} = h_A + h_B`.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| *a + *b).collect();
        let generator = match (&self.generator, &other.generator) {
            (Some(a), Some(b)) => a.minkowski_sum(b),
            _ => None,
        };
        Ok(Self { grid: self.grid.clone(), values, generator })
    }

    /// `h_{lambda A} = lambda h_A` for `lambda >= 0`.
    pub fn scale(&self, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) {
            return Err(Error::NegativeScalar(lambda.to_f64_lossy()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| lambda * *v).collect(),
            generator: self.generator.as_ref().map(|g| g.scaled(lambda)),
        })
    }

    /// `max_u |h_A(u) - h_B(u)|`; a lower bound of the Hausdorff distance.
    pub fn hausdorff(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max))
    }

    /// `H(A, {0}) = max_u |h_A(u)|`.
    pub fn norm_of_set(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    /// `u.x <= h(u) + slack` for every grid direction.
    pub fn contains_point(&self, x: &[T], slack: T) -> bool {
        self.grid.iter().zip(&self.values).all(|(u, h)| dot(u, x) <= *h + slack)
    }

    pub fn check_convexity(&self) -> ConvexityCheck<T> {
        validate_convexity(&self.grid, &self.values)
    }
}

/// Whether sampled values can be the support function of a nonempty convex set.
///
/// Each value must not exceed the conic interpolation of nearby directions:
/// when `u = sum a_j v_j` with `a_j >= 0`, `h(u) <= sum a_j h(v_j)`. In 2D the
/// neighbours are the angularly adjacent directions; in higher dimensions,
/// triples among the nearest ones. Antipodal pairs must satisfy
/// `h(u) + h(-u) >= 0`.
pub fn validate_convexity<T: Real>(grid: &DirectionGrid<T>, values: &[T]) -> ConvexityCheck<T> {
    let scale = values.iter().map(|v| v.abs()).fold(T::one(), T::max);
    let mut worst = T::infinity();
    let mut note = |slack: T| worst = worst.min(slack);
    let rows = grid.to_rows();
    let n = rows.len();
    let tol = T::lit(1e-12);
    for i in 0..n {
        for j in i + 1..n {
            if rows[i].iter().zip(&rows[j]).all(|(a, b)| (*a + *b).abs() <= tol) {
                note(values[i] + values[j]);
            }
        }
    }
    match grid.dim() {
        1 => {}
        2 => {
            let mut order: Vec<usize> = (0..n).collect();
            let angle = |u: &[T]| u[1].atan2(u[0]);
            order.sort_by(|&a, &b| angle(&rows[a]).partial_cmp(&angle(&rows[b])).unwrap());
            for k in 0..n {
                let (p, i, q) = (order[(k + n - 1) % n], order[k], order[(k + 1) % n]);
                if let Some(c) = conic_coefficients(&[&rows[p], &rows[q]], &rows[i]) {
                    note(c[0] * values[p] + c[1] * values[q] - values[i]);
                }
            }
        }
        d => {
            const NEAR: usize = 6;
            for i in 0..n {
                let mut by_dist: Vec<(T, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (rows[i].iter().zip(&rows[j]).map(|(a, b)| (*a - *b) * (*a - *b)).fold(T::zero(), |s, v| s + v), j))
                    .collect();
                by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let near: Vec<usize> = by_dist.iter().take(NEAR.max(d)).map(|p| p.1).collect();
                for_each_combination(near.len(), d, &mut |idx| {
                    let vs: Vec<&[T]> = idx.iter().map(|&k| rows[near[k]].as_slice()).collect();
                    if let Some(c) = conic_coefficients(&vs, &rows[i]) {
                        let interp = idx.iter().zip(&c).fold(T::zero(), |s, (&k, a)| s + *a * values[near[k]]);
                        note(interp - values[i]);
                    }
                });
            }
        }
    }
    if worst == T::infinity() {
        worst = T::zero();
    }
    ConvexityCheck { convex: worst >= -T::lit(CONVEXITY_TOL) * scale, worst }
}

/// Nonnegative `a` with `sum a_j v_j = u`, when the `v_j` are independent and such `a` exists.
fn conic_coefficients<T: Real>(vs: &[&[T]], u: &[T]) -> Option<Vec<T>> {
    let d = u.len();
    let k = vs.len();
    // least squares on the k coefficients, then verify the fit
    let mut a = vec![vec![T::zero(); k]; k];
    let mut b = vec![T::zero(); k];
    for i in 0..k {
        b[i] = dot(vs[i], u);
        for j in 0..k {
            a[i][j] = dot(vs[i], vs[j]);
        }
    }
    let c = crate::vector::solve(a, b)?;
    let tol = T::lit(1e-9);
    if c.iter().any(|x| *x < -tol) {
        return None;
    }
    let fit = (0..d).all(|r| (vs.iter().zip(&c).fold(T::zero(), |s, (v, x)| s + *x * v[r]) - u[r]).abs() <= tol);
    fit.then(|| c.into_iter().map(|x| x.max(T::zero())).collect())
}

fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}
