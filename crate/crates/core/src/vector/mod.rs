//! Measures with values in `R^d`, their dual images `x* mu`, semivariation,
//! variation, and the Kluvanek-Lewis vector integral assembled from scalar
//! gauge integrals.

mod grid;

pub use grid::{DirectionGrid, SpaceNorm};

use crate::domain::{Interval, MeasurableSet};
use crate::error::{Error, Result};
use crate::hk::{hk_integrate, HkOptions};
use crate::integrand::Integrand;
use crate::measure::ScalarMeasure;
use crate::par::try_map_ordered;
use crate::scalar::Real;

/// `mu(A) = (mu_1(A), ..., mu_d(A))` with a norm on `R^d` and a list of
/// sets the caller declares `mu`-null.
#[derive(Debug, Clone)]
pub struct VectorMeasure<T: Real = f64> {
    components: Vec<ScalarMeasure<T>>,
    norm: SpaceNorm,
    null_sets: Vec<MeasurableSet<T>>,
}

/// Which scalar measure each direction integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KlMode {
    /// `x* mu`.
    #[default]
    Signed,
    /// `|x* mu|`; degenerate on grids closed under `u -> -u`.
    Variation,
}

/// The vector `x_A` with `x*(x_A) = int_A f d(x* mu)` over the grid, in the
/// least-squares sense, and the worst violation of that system.
#[derive(Debug, Clone, PartialEq)]
pub struct KlResult<T = f64> {
    pub x: Vec<T>,
    pub residual: T,
    pub mode: KlMode,
    /// The scalar integral for each grid direction.
    pub values: Vec<T>,
}

/// `x_A` is reported as not existing when the residual exceeds this many tolerances.
pub const RESIDUAL_FACTOR: f64 = 100.0;

impl<T: Real> VectorMeasure<T> {
    pub fn new(components: Vec<ScalarMeasure<T>>, norm: SpaceNorm) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("a vector measure needs at least one component".into()));
        }
        Ok(Self { components, norm, null_sets: Vec::new() })
    }

    pub fn with_null_sets(mut self, sets: impl IntoIterator<Item = MeasurableSet<T>>) -> Self {
        self.null_sets.extend(sets);
        self
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> SpaceNorm {
        self.norm
    }

    pub fn components(&self) -> &[ScalarMeasure<T>] {
        &self.components
    }

    pub fn null_sets(&self) -> &[MeasurableSet<T>] {
        &self.null_sets
    }

    pub fn measure_of(&self, a: &MeasurableSet<T>) -> Vec<T> {
        self.components.iter().map(|m| m.measure_of(a)).collect()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: n });
        }
        Ok(())
    }

    /// `x* mu`: density `x* . rho`, atoms `x* . w_k`.
    pub fn apply_functional(&self, u: &[T]) -> Result<ScalarMeasure<T>> {
        self.check_dim(u.len())?;
        let terms: Vec<(T, &ScalarMeasure<T>)> = u.iter().copied().zip(&self.components).collect();
        Ok(ScalarMeasure::linear_combination(&terms))
    }

    /// `max_u |u mu|(A)` over the grid; a lower bound of the semivariation.
    pub fn semivariation(&self, a: &MeasurableSet<T>, grid: &DirectionGrid<T>) -> Result<T> {
        self.check_dim(grid.dim())?;
        let rows = grid.to_rows();
        let vals = try_map_ordered(&rows, |u| Ok::<_, Error>(self.apply_functional(u)?.total_variation()?.measure_of(a)))?;
        Ok(vals.into_iter().fold(T::zero(), T::max))
    }

    /// `max_k sum_i ||mu(A_i)||` over the dyadic partitions of `A` up to `depth`.
    pub fn variation(&self, a: &MeasurableSet<T>, depth: u32) -> T {
        (0..=depth)
            .map(|k| {
                a.dyadic_cells(k).iter().map(|c| self.norm.norm(&self.measure_of(c))).fold(T::zero(), |x, y| x + y)
            })
            .fold(T::zero(), T::max)
    }

    fn direction_measure(&self, u: &[T], mode: KlMode) -> Result<ScalarMeasure<T>> {
        let m = self.apply_functional(u)?;
        match mode {
            KlMode::Signed => Ok(m),
            KlMode::Variation => m.total_variation(),
        }
    }

    /// `(HKL) int_A f dmu`: one scalar gauge integral per grid direction,
    /// assembled into `x_A` by least squares.
    pub fn kl_henstock_integral(
        &self,
        f: &Integrand<T>,
        a: &MeasurableSet<T>,
        grid: &DirectionGrid<T>,
        opts: &HkOptions<T>,
        mode: KlMode,
    ) -> Result<KlResult<T>> {
        self.check_dim(grid.dim())?;
        if mode == KlMode::Variation && grid.is_antipodally_closed() {
            return Err(Error::AntipodalDegeneracy);
        }
        let rows = grid.to_rows();
        let values = try_map_ordered(&rows, |u| Ok::<_, Error>(hk_integrate(f, a, &self.direction_measure(u, mode)?, opts)?.value))?;
        let x = least_squares(&rows, &values)?;
        let residual = rows
            .iter()
            .zip(&values)
            .map(|(u, v)| (dot(u, &x) - *v).abs())
            .fold(T::zero(), T::max);
        if residual > T::lit(RESIDUAL_FACTOR) * opts.tol {
            return Err(Error::NotHklIntegrable { residual: residual.to_f64_lossy() });
        }
        Ok(KlResult { x, residual, mode, values })
    }

    /// `A -> (HKL) int_A f dmu` over a family of sets.
    pub fn indefinite_integral(
        &self,
        f: &Integrand<T>,
        family: &[MeasurableSet<T>],
        grid: &DirectionGrid<T>,
        opts: &HkOptions<T>,
        mode: KlMode,
    ) -> Result<Vec<KlResult<T>>> {
        family.iter().map(|a| self.kl_henstock_integral(f, a, grid, opts, mode)).collect()
    }

    /// `max |int_A f d|u mu||` over grid directions and the set family; a lower bound of the Alexiewicz norm.
    pub fn alexiewicz_norm(
        &self,
        f: &Integrand<T>,
        grid: &DirectionGrid<T>,
        family: &[MeasurableSet<T>],
        opts: &HkOptions<T>,
    ) -> Result<T> {
        self.check_dim(grid.dim())?;
        let rows = grid.to_rows();
        let per_dir = try_map_ordered(&rows, |u| {
            let m = self.direction_measure(u, KlMode::Variation)?;
            family.iter().try_fold(T::zero(), |best, a| Ok::<_, Error>(best.max(hk_integrate(f, a, &m, opts)?.value.abs())))
        })?;
        Ok(per_dir.into_iter().fold(T::zero(), T::max))
    }

    /// `u mu` for a `d' x d` matrix `u`; the image carries `norm` and the same null sets.
    pub fn pushforward(&self, u: &[Vec<T>], norm: SpaceNorm) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let components = u
            .iter()
            .map(|row| {
                self.check_dim(row.len())?;
                let terms: Vec<(T, &ScalarMeasure<T>)> = row.iter().copied().zip(&self.components).collect();
                Ok(ScalarMeasure::linear_combination(&terms))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components, norm, null_sets: self.null_sets.clone() })
    }

    /// `sup |f|` over a dense sample of `A` minus the declared null sets,
    /// polished near the largest samples.
    pub fn ess_sup(&self, f: &Integrand<T>, a: &MeasurableSet<T>) -> T {
        let null = self.null_sets.iter().fold(MeasurableSet::empty(), |acc, n| acc.union(n));
        let live = a.difference(&null);
        let has_atom = |x: T| self.components.iter().any(|m| m.atoms().iter().any(|w| w.0 == x && w.1 != T::zero()));
        let mut best = T::zero();
        for part in live.parts() {
            if part.is_degenerate() {
                if has_atom(part.lo) {
                    best = best.max(f.eval(part.lo).abs());
                }
                continue;
            }
            best = best.max(sup_on_interval(f, part));
        }
        best
    }
}

const ESS_SAMPLES: usize = 4096;

fn sup_on_interval<T: Real>(f: &Integrand<T>, part: &Interval<T>) -> T {
    let unbounded = !part.hi.is_finite();
    let map = |s: T| -> T {
        if unbounded {
            part.lo + s / (T::one() - s)
        } else {
            part.lo + (part.hi - part.lo) * s
        }
    };
    let g = |s: T| -> T {
        let x = map(s);
        if part.contains(x) && x.is_finite() {
            let v = f.eval(x).abs();
            if v.is_nan() { T::zero() } else { v }
        } else {
            T::zero()
        }
    };
    let n = ESS_SAMPLES;
    let h = T::one() / T::from_usize_lossy(n);
    let mut samples: Vec<(T, T)> = (0..=n).map(|k| {
        let s = h * T::from_usize_lossy(k);
        (g(s), s)
    }).collect();
    let mut best = samples.iter().map(|p| p.0).fold(T::zero(), T::max);
    samples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    for &(_, s) in samples.iter().take(8) {
        best = best.max(golden_max(&g, (s - h).max(T::zero()), (s + h).min(T::one())));
    }
    best
}

fn golden_max<T: Real>(g: &dyn Fn(T) -> T, mut a: T, mut b: T) -> T {
    let r = T::lit(0.618_033_988_749_894_8);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    let mut best = gc.max(gd);
    for _ in 0..80 {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
            best = best.max(gc);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
            best = best.max(gd);
        }
    }
    best
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).fold(T::zero(), |s, v| s + v)
}

/// Least-squares solution of `rows . x = values` via the normal equations.
pub(crate) fn least_squares<T: Real>(rows: &[Vec<T>], values: &[T]) -> Result<Vec<T>> {
    let d = rows.first().map_or(0, Vec::len);
    let mut n = vec![vec![T::zero(); d]; d];
    let mut r = vec![T::zero(); d];
    for (u, &v) in rows.iter().zip(values) {
        for i in 0..d {
            r[i] = r[i] + u[i] * v;
            for j in 0..d {
                n[i][j] = n[i][j] + u[i] * u[j];
            }
        }
    }
    solve(n, r).ok_or_else(|| Error::InvalidGrid("directions do not span the space".into()))
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let d = b.len();
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..d {
            let k = a[row][col] / a[col][col];
            for c in col..d {
                a[row][c] = a[row][c] - k * a[col][c];
            }
            b[row] = b[row] - k * b[col];
        }
    }
    let mut x = vec![T::zero(); d];
    for i in (0..d).rev() {
        let s = (i + 1..d).fold(b[i], |s, j| s - a[i][j] * x[j]);
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// All dyadic subintervals `[lo + k h, lo + (k+1) h]`, `h = (hi - lo) / 2^j`, for `j <= depth`.
pub fn dyadic_family<T: Real>(lo: T, hi: T, depth: u32) -> Result<Vec<MeasurableSet<T>>> {
    let mut out = Vec::new();
    for j in 0..=depth {
        let n = 1usize << j;
        let h = (hi - lo) / T::from_usize_lossy(n);
        for k in 0..n {
            let b = if k + 1 == n { hi } else { lo + h * T::from_usize_lossy(k + 1) };
            out.push(MeasurableSet::closed(lo + h * T::from_usize_lossy(k), b)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Density, Poly};

    fn unit() -> MeasurableSet {
        MeasurableSet::closed(0.0, 1.0).unwrap()
    }

    fn split_lebesgue() -> VectorMeasure {
        VectorMeasure::new(vec![ScalarMeasure::lebesgue_on(0.0, 1.0), ScalarMeasure::lebesgue_on(1.0, 2.0)], SpaceNorm::Euclidean).unwrap()
    }

    #[test]
    fn functional_of_basis_and_diagonal() {
        let mu = VectorMeasure::new(vec![ScalarMeasure::lebesgue_on(0.0, 1.0), ScalarMeasure::lebesgue_on(0.0, 1.0).scale(2.0)], SpaceNorm::Euclidean).unwrap();
        assert_eq!(mu.apply_functional(&[1.0, 0.0]).unwrap().measure_of(&unit()), 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = mu.apply_functional(&[s, s]).unwrap();
        assert!((m.density.eval(0.5) - 3.0 * s).abs() < 1e-15);
    }

    #[test]
    fn semivariation_of_split_lebesgue() {
        let mu = split_lebesgue();
        let g = DirectionGrid::new(2, SpaceNorm::Euclidean, 64).unwrap();
        let a = MeasurableSet::closed(0.0, 2.0).unwrap();
        let v = mu.semivariation(&a, &g).unwrap();
        assert!((v - 2f64.sqrt()).abs() <= 1e-3, "{v}");
        assert_eq!(mu.semivariation(&MeasurableSet::empty(), &g).unwrap(), 0.0);
        let one = VectorMeasure::new(vec![ScalarMeasure::lebesgue()], SpaceNorm::Euclidean).unwrap();
        assert_eq!(one.semivariation(&unit(), &DirectionGrid::default_for(1, SpaceNorm::Euclidean).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn variation_examples() {
        let a = MeasurableSet::closed(0.0, 2.0).unwrap();
        assert!((split_lebesgue().variation(&a, 6) - 2.0).abs() < 1e-14);
        let curve = VectorMeasure::new(
            vec![
                ScalarMeasure::new(Density::func(0.0, std::f64::consts::PI, f64::cos)),
                ScalarMeasure::new(Density::func(0.0, std::f64::consts::PI, f64::sin)),
            ],
            SpaceNorm::Euclidean,
        )
        .unwrap();
        let v = curve.variation(&MeasurableSet::closed(0.0, std::f64::consts::PI).unwrap(), 12);
        assert!((v - std::f64::consts::PI).abs() < 1e-6, "{v}");
        let pos = VectorMeasure::new(vec![ScalarMeasure::new(Density::poly(0.0, 1.0, Poly::new(vec![1.0, 1.0])))], SpaceNorm::Euclidean).unwrap();
        assert!((pos.variation(&unit(), 4) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn kl_of_identity_against_linear_densities() {
        let mu = VectorMeasure::new(
            vec![ScalarMeasure::lebesgue_on(0.0, 1.0), ScalarMeasure::new(Density::poly(0.0, 1.0, Poly::new(vec![0.0, 2.0])))],
            SpaceNorm::Euclidean,
        )
        .unwrap();
        let g = DirectionGrid::new(2, SpaceNorm::Euclidean, 16).unwrap();
        let r = mu.kl_henstock_integral(&Integrand::new(|t| t), &unit(), &g, &HkOptions::new(1e-10), KlMode::Signed).unwrap();
        assert!((r.x[0] - 0.5).abs() < 1e-9 && (r.x[1] - 2.0 / 3.0).abs() < 1e-9, "{:?}", r.x);
        assert!(r.residual <= 1e-8);
        let z = mu.kl_henstock_integral(&Integrand::zero(), &unit(), &g, &HkOptions::new(1e-10), KlMode::Signed).unwrap();
        assert_eq!(z.x, vec![0.0, 0.0]);
        assert_eq!(z.residual, 0.0);
    }

    #[test]
    fn variation_mode_on_closed_grid_is_degenerate() {
        let mu = split_lebesgue();
        let g = DirectionGrid::new(2, SpaceNorm::Euclidean, 8).unwrap();
        let r = mu.kl_henstock_integral(&Integrand::constant(1.0), &unit(), &g, &HkOptions::new(1e-8), KlMode::Variation);
        assert_eq!(r.unwrap_err(), Error::AntipodalDegeneracy);
    }

    #[test]
    fn alexiewicz_examples() {
        let mu = VectorMeasure::new(vec![ScalarMeasure::lebesgue_on(0.0, 1.0)], SpaceNorm::Euclidean).unwrap();
        let g = DirectionGrid::default_for(1, SpaceNorm::Euclidean).unwrap();
        let fam = dyadic_family(0.0, 1.0, 8).unwrap();
        let o = HkOptions::new(1e-10);
        assert_eq!(mu.alexiewicz_norm(&Integrand::zero(), &g, &fam, &o).unwrap(), 0.0);
        assert!((mu.alexiewicz_norm(&Integrand::constant(1.0f64), &g, &fam, &o).unwrap() - 1.0).abs() < 1e-10);
        let sign = Integrand::new(|t: f64| crate::scalar::sgn(t - 0.5)).with_breakpoints([0.5]);
        assert!((mu.alexiewicz_norm(&sign, &g, &fam, &o).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn pushforward_examples() {
        let mu = VectorMeasure::new(vec![ScalarMeasure::lebesgue_on(0.0, 1.0), ScalarMeasure::lebesgue_on(0.0, 1.0)], SpaceNorm::Euclidean).unwrap();
        let s = mu.pushforward(&[vec![1.0, 1.0]], SpaceNorm::Euclidean).unwrap();
        assert_eq!(s.measure_of(&unit()), vec![2.0]);
        let id = mu.pushforward(&[vec![1.0, 0.0], vec![0.0, 1.0]], SpaceNorm::Euclidean).unwrap();
        assert_eq!(id.measure_of(&unit()), mu.measure_of(&unit()));
        let z = mu.pushforward(&[vec![0.0, 0.0]], SpaceNorm::Euclidean).unwrap();
        assert_eq!(z.measure_of(&unit()), vec![0.0]);
    }

    #[test]
    fn ess_sup_skips_null_sets() {
        let null = MeasurableSet::closed(0.3, 0.4).unwrap();
        let mu = VectorMeasure::new(vec![ScalarMeasure::lebesgue()], SpaceNorm::Euclidean).unwrap().with_null_sets([null.clone()]);
        assert!((mu.ess_sup(&Integrand::new(|t| t), &unit()) - 1.0).abs() < 1e-12);
        let spiked = Integrand::new(move |t| t + if null.contains(t) { 100.0 } else { 0.0 });
        assert!((mu.ess_sup(&spiked, &unit()) - 1.0).abs() < 1e-12);
        assert_eq!(mu.ess_sup(&Integrand::constant(-2.5), &unit()), 2.5);
    }
}
