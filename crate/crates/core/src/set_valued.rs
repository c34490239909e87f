//! Set-valued measures `M(A) = int_A Gamma d(base)` with a convex-set-valued
//! density `Gamma`, their selections, variation, and the set-valued
//! Kluvanek-Lewis-Henstock integral computed one support direction at a time.

use std::sync::Arc;

use crate::convex::{validate_convexity, Generator, SupportSet};
use crate::domain::MeasurableSet;
use crate::error::{Error, Result};
use crate::hk::{hk_integrate, HkOptions};
use crate::integrand::{sort_dedup, Integrand};
use crate::measure::{Density, ScalarMeasure};
use crate::par::try_map_ordered;
use crate::scalar::Real;
use crate::vector::{DirectionGrid, SpaceNorm, VectorMeasure};

/// Support values may violate sublinearity by this many tolerances before
/// the integral is rejected.
pub const CONVEXITY_SLACK_FACTOR: f64 = 4.0;

/// Samples per bounded part when checking an integrand for nonnegativity.
const SIGN_SAMPLES: usize = 512;

/// `t -> Gamma(t)` as a box, ball or zonotope whose parameters are densities.
/// Outside the supports of its parameters `Gamma(t)` degenerates to `{0}`.
#[derive(Debug, Clone)]
pub enum SetValuedDensity<T: Real = f64> {
    Box { center: Vec<Density<T>>, radii: Vec<Density<T>> },
    Ball { center: Vec<Density<T>>, radius: Density<T> },
    Zonotope { center: Vec<Density<T>>, generators: Vec<Vec<Density<T>>> },
}

impl<T: Real> SetValuedDensity<T> {
    /// `Gamma(t) = g` for `t` in `[lo, hi]`, `{0}` elsewhere.
    pub fn constant(g: &Generator<T>, lo: T, hi: T) -> Self {
        let c = |v: &[T]| v.iter().map(|x| Density::constant(*x, lo, hi)).collect::<Vec<_>>();
        match g {
            Generator::Box { center, radii } => SetValuedDensity::Box { center: c(center), radii: c(radii) },
            Generator::Ball { center, radius } => {
                SetValuedDensity::Ball { center: c(center), radius: Density::constant(*radius, lo, hi) }
            }
            Generator::Zonotope { center, generators } => {
                SetValuedDensity::Zonotope { center: c(center), generators: generators.iter().map(|g| c(g)).collect() }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[Density<T>] {
        match self {
            SetValuedDensity::Box { center, .. }
            | SetValuedDensity::Ball { center, .. }
            | SetValuedDensity::Zonotope { center, .. } => center,
        }
    }

    fn parameters(&self) -> Vec<&Density<T>> {
        let mut out: Vec<&Density<T>> = self.center().iter().collect();
        match self {
            SetValuedDensity::Box { radii, .. } => out.extend(radii),
            SetValuedDensity::Ball { radius, .. } => out.push(radius),
            SetValuedDensity::Zonotope { generators, .. } => out.extend(generators.iter().flatten()),
        }
        out
    }

    /// Points where some parameter may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b: Vec<T> = self.parameters().iter().flat_map(|d| d.breakpoints()).collect();
        sort_dedup(&mut b);
        b
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidArgument("set-valued density of dimension 0".into()));
        }
        let nonneg = |r: &Density<T>| -> Result<()> {
            if ScalarMeasure::new(r.clone()).is_nonnegative()? {
                Ok(())
            } else {
                Err(Error::InvalidArgument("radius functions must be nonnegative".into()))
            }
        };
        match self {
            SetValuedDensity::Box { radii, .. } => {
                if radii.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: radii.len() });
                }
                radii.iter().try_for_each(nonneg)
            }
            SetValuedDensity::Ball { radius, .. } => nonneg(radius),
            SetValuedDensity::Zonotope { generators, .. } => match generators.iter().find(|g| g.len() != d) {
                Some(g) => Err(Error::DimensionMismatch { expected: d, got: g.len() }),
                None => Ok(()),
            },
        }
    }

    /// `Gamma(t)`.
    pub fn at(&self, t: T) -> Generator<T> {
        let ev = |v: &[Density<T>]| v.iter().map(|d| d.eval(t)).collect::<Vec<T>>();
        match self {
            SetValuedDensity::Box { center, radii } => Generator::Box { center: ev(center), radii: ev(radii) },
            SetValuedDensity::Ball { center, radius } => Generator::Ball { center: ev(center), radius: radius.eval(t) },
            SetValuedDensity::Zonotope { center, generators } => {
                Generator::Zonotope { center: ev(center), generators: generators.iter().map(|g| ev(g)).collect() }
            }
        }
    }

    /// `t -> sigma(u, Gamma(t))`.
    pub fn support_density(&self, u: &[T], norm: SpaceNorm) -> Result<Density<T>> {
        let mut terms: Vec<(T, &Density<T>)> = u.iter().copied().zip(self.center()).collect();
        let owned: Vec<Density<T>>;
        match self {
            SetValuedDensity::Box { radii, .. } => terms.extend(u.iter().map(|v| v.abs()).zip(radii)),
            SetValuedDensity::Ball { radius, .. } => terms.push((norm.dual_norm(u), radius)),
            SetValuedDensity::Zonotope { generators, .. } => {
                owned = generators
                    .iter()
                    .map(|g| {
                        let pairs: Vec<(T, &Density<T>)> = u.iter().copied().zip(g).collect();
                        Density::linear_combination(&pairs).abs()
                    })
                    .collect::<Result<_>>()?;
                terms.extend(owned.iter().map(|d| (T::one(), d)));
            }
        }
        Ok(Density::linear_combination(&terms))
    }

    /// Coordinates of `t -> argmax_{x in Gamma(t)} u.x`.
    pub fn extremal_density(&self, u: &[T], norm: SpaceNorm) -> Result<Vec<Density<T>>> {
        let center = self.center();
        match self {
            SetValuedDensity::Box { radii, .. } => {
                Ok((0..u.len()).map(|i| center[i].add(&radii[i].scale(crate::scalar::sgn(u[i])))).collect())
            }
            SetValuedDensity::Ball { radius, .. } => {
                let m = norm.maximizer(u);
                Ok((0..u.len()).map(|i| center[i].add(&radius.scale(m[i]))).collect())
            }
            SetValuedDensity::Zonotope { generators, .. } => {
                let mut out = center.to_vec();
                for g in generators {
                    let pairs: Vec<(T, &Density<T>)> = u.iter().copied().zip(g).collect();
                    let s = Density::linear_combination(&pairs).sign()?;
                    for (o, gi) in out.iter_mut().zip(g) {
                        *o = o.add(&s.mul(gi));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// How a selection picks a point of `Gamma(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionRule<T = f64> {
    /// The center, which is the Steiner point of a box, ball or zonotope.
    Steiner,
    /// The support-attaining point in direction `u`.
    Extremal(Vec<T>),
}

/// `M(A) = int_A Gamma d(base)` with `base` nonnegative.
#[derive(Debug, Clone)]
pub struct SetValuedMeasure<T: Real = f64> {
    density: Arc<SetValuedDensity<T>>,
    base: ScalarMeasure<T>,
}

impl<T: Real> SetValuedMeasure<T> {
    pub fn new(density: SetValuedDensity<T>, base: ScalarMeasure<T>) -> Result<Self> {
        density.validate()?;
        if !base.is_nonnegative()? {
            return Err(Error::InvalidArgument("base measure must be nonnegative".into()));
        }
        if base.tail_mass.is_some_and(|m| m != T::zero()) {
            return Err(Error::InvalidArgument("base measure may not charge +inf".into()));
        }
        Ok(Self { density: Arc::new(density), base })
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn density(&self) -> &SetValuedDensity<T> {
        &self.density
    }

    pub fn base(&self) -> &ScalarMeasure<T> {
        &self.base
    }

    fn check_grid(&self, grid: &DirectionGrid<T>) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: grid.dim() });
        }
        Ok(())
    }

    /// The scalar measure `sigma(u, M(.))`.
    pub fn direction_measure(&self, u: &[T], norm: SpaceNorm) -> Result<ScalarMeasure<T>> {
        Ok(self.base.weighted(&self.density.support_density(u, norm)?))
    }

    fn per_direction(&self, grid: &Arc<DirectionGrid<T>>, f: impl Fn(&[T]) -> Result<T> + Sync) -> Result<SupportSet<T>> {
        self.check_grid(grid)?;
        let rows = grid.to_rows();
        let values = try_map_ordered(&rows, |u| f(u))?;
        SupportSet::from_values(grid.clone(), values)
    }

    /// `M(A)` through `h(u) = sigma(u, M(.))(A)`.
    pub fn measure_of(&self, a: &MeasurableSet<T>, grid: &Arc<DirectionGrid<T>>) -> Result<SupportSet<T>> {
        if a.is_empty() {
            self.check_grid(grid)?;
            return Ok(SupportSet::zero(grid.clone()));
        }
        self.per_direction(grid, |u| Ok(self.direction_measure(u, grid.norm())?.measure_of(a)))
    }

    /// `W_A` with `sigma(u, W_A) = (HK) int_A f d sigma(u, M(.))`, rejected when
    /// the support values are not sublinear.
    pub fn kl_henstock_integral(
        &self,
        f: &Integrand<T>,
        a: &MeasurableSet<T>,
        grid: &Arc<DirectionGrid<T>>,
        opts: &HkOptions<T>,
    ) -> Result<SupportSet<T>> {
        let w = self.per_direction(grid, |u| Ok(hk_integrate(f, a, &self.direction_measure(u, grid.norm())?, opts)?.value))?;
        ensure_convex(w, opts.tol)
    }

    /// A vector measure whose value at every set lies in `M` of that set.
    pub fn selection(&self, rule: &SelectionRule<T>, norm: SpaceNorm) -> Result<VectorMeasure<T>> {
        let coords = match rule {
            SelectionRule::Steiner => self.density.center().to_vec(),
            SelectionRule::Extremal(u) => {
                if u.len() != self.dim() {
                    return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
                }
                self.density.extremal_density(u, norm)?
            }
        };
        VectorMeasure::new(coords.iter().map(|c| self.base.weighted(c)).collect(), norm)
    }

    /// `max_k sum_i H(M(A_i), {0})` over the dyadic partitions of `A` up to `depth`.
    pub fn variation(&self, a: &MeasurableSet<T>, depth: u32, grid: &Arc<DirectionGrid<T>>) -> Result<T> {
        let mut best = T::zero();
        for k in 0..=depth {
            let mut s = T::zero();
            for cell in a.dyadic_cells(k) {
                s = s + self.measure_of(&cell, grid)?.norm_of_set();
            }
            best = best.max(s);
        }
        Ok(best)
    }

    /// `int_A H(Gamma(t), {0}) d(base)`, the limit of [`Self::variation`].
    pub fn variation_density(&self, a: &MeasurableSet<T>, grid: &Arc<DirectionGrid<T>>, opts: &HkOptions<T>) -> Result<T> {
        self.check_grid(grid)?;
        let (density, g) = (self.density.clone(), grid.clone());
        let f = Integrand::new(move |t| {
            let gen = density.at(t);
            g.iter().map(|u| gen.support(u, g.norm()).abs()).fold(T::zero(), T::max)
        })
        .with_breakpoints(self.density.breakpoints());
        Ok(hk_integrate(&f, a, &self.base, opts)?.value)
    }

    /// `A -> (HKL) int_A f dM` over a family of sets, for `f >= 0`.
    pub fn indefinite_integral(
        &self,
        f: &Integrand<T>,
        family: &[MeasurableSet<T>],
        grid: &Arc<DirectionGrid<T>>,
        opts: &HkOptions<T>,
    ) -> Result<Vec<SupportSet<T>>> {
        for a in family {
            check_nonnegative(f, a)?;
        }
        family.iter().map(|a| self.kl_henstock_integral(f, a, grid, opts)).collect()
    }

    /// `H((HKL) int_A f dM, (HK) int_A f Gamma d(base))`, the two sides computed
    /// independently: against `sigma(u, M(.))`, and as `f sigma(u, Gamma)` against the base.
    pub fn rn_equality_check(
        &self,
        f: &Integrand<T>,
        a: &MeasurableSet<T>,
        grid: &Arc<DirectionGrid<T>>,
        opts: &HkOptions<T>,
    ) -> Result<T> {
        check_nonnegative(f, a)?;
        let lhs = self.kl_henstock_integral(f, a, grid, opts)?;
        let rhs = self.per_direction(grid, |u| {
            let s = self.density.support_density(u, grid.norm())?;
            let bp = s.breakpoints();
            let g = f.product(&Integrand::new(move |t| s.eval(t)).with_breakpoints(bp));
            Ok(hk_integrate(&g, a, &self.base, opts)?.value)
        })?;
        lhs.hausdorff(&rhs)
    }
}

fn ensure_convex<T: Real>(w: SupportSet<T>, tol: T) -> Result<SupportSet<T>> {
    let check = validate_convexity(w.grid(), w.values());
    let scale = w.norm_of_set().max(T::one());
    if check.worst < -T::lit(CONVEXITY_SLACK_FACTOR) * tol * scale {
        return Err(Error::NotConvexlyIntegrable { violation: check.worst.to_f64_lossy() });
    }
    Ok(w)
}

/// Rejects `f` when a sample of `A` (breakpoints included) finds a negative value.
pub fn check_nonnegative<T: Real>(f: &Integrand<T>, a: &MeasurableSet<T>) -> Result<()> {
    let n = T::from_usize_lossy(SIGN_SAMPLES);
    for p in a.parts() {
        let mut pts: Vec<T> = f.breakpoints().iter().copied().filter(|x| p.contains(*x)).collect();
        if p.is_bounded() {
            pts.extend((0..=SIGN_SAMPLES).map(|k| p.lo + (p.hi - p.lo) * T::from_usize_lossy(k) / n));
        } else {
            pts.extend((0..=SIGN_SAMPLES).map(|k| p.lo + T::from_usize_lossy(k) / (n - T::from_usize_lossy(k) + T::one())));
        }
        if let Some(t) = pts.into_iter().filter(|t| p.contains(*t) && !f.is_exempt(*t)).find(|t| f.eval(*t) < T::zero()) {
            return Err(Error::InvalidArgument(format!("integrand must be nonnegative, f({}) < 0", t.to_f64_lossy())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Poly;

    fn grid2() -> Arc<DirectionGrid> {
        Arc::new(DirectionGrid::default_for(2, SpaceNorm::Euclidean).unwrap())
    }

    fn unit_ball() -> SetValuedMeasure {
        let g = Generator::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        SetValuedMeasure::new(SetValuedDensity::constant(&g, 0.0, 1.0), ScalarMeasure::lebesgue()).unwrap()
    }

    fn unit() -> MeasurableSet {
        MeasurableSet::closed(0.0, 1.0).unwrap()
    }

    fn ball_set(r: f64, g: &Arc<DirectionGrid>) -> SupportSet {
        SupportSet::from_generator(Generator::Ball { center: vec![0.0, 0.0], radius: r }, g.clone()).unwrap()
    }

    #[test]
    fn measure_of_examples() {
        let g = grid2();
        let m = unit_ball();
        assert!(m.measure_of(&MeasurableSet::empty(), &g).unwrap().values().iter().all(|v| *v == 0.0));
        assert!(m.measure_of(&unit(), &g).unwrap().hausdorff(&ball_set(1.0, &g)).unwrap() < 1e-12);
        let path = SetValuedDensity::Box {
            center: vec![Density::poly(0.0, 1.0, Poly::identity()), Density::zero()],
            radii: vec![Density::zero(), Density::zero()],
        };
        let m = SetValuedMeasure::new(path, ScalarMeasure::lebesgue()).unwrap();
        let s = m.measure_of(&unit(), &g).unwrap();
        assert!(g.iter().zip(s.values()).all(|(u, h)| (h - 0.5 * u[0]).abs() < 1e-14));
    }

    #[test]
    fn kl_integral_examples() {
        let g = grid2();
        let m = unit_ball();
        let opts = HkOptions::new(1e-9);
        let ind = m.kl_henstock_integral(&Integrand::indicator(&unit()), &unit(), &g, &opts).unwrap();
        assert!(ind.hausdorff(&m.measure_of(&unit(), &g).unwrap()).unwrap() < 1e-12);
        let w = m.kl_henstock_integral(&Integrand::new(|t| t), &unit(), &g, &opts).unwrap();
        assert!(w.hausdorff(&ball_set(0.5, &g)).unwrap() < 3e-9);
        let zero = m.kl_henstock_integral(&Integrand::zero(), &unit(), &g, &opts).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        let neg = m.kl_henstock_integral(&Integrand::new(|t| t - 1.0), &unit(), &g, &opts);
        assert!(matches!(neg, Err(Error::NotConvexlyIntegrable { .. })), "{neg:?}");
    }

    #[test]
    fn selections() {
        let g = grid2();
        let boxed = Generator::Box { center: vec![0.5, 0.5], radii: vec![0.5, 0.5] };
        let m = SetValuedMeasure::new(SetValuedDensity::constant(&boxed, 0.0, 1.0), ScalarMeasure::lebesgue()).unwrap();
        let e = m.selection(&SelectionRule::Extremal(vec![1.0, 0.0]), SpaceNorm::Euclidean).unwrap();
        let half = MeasurableSet::closed(0.0, 0.5).unwrap();
        let v: Vec<f64> = e.measure_of(&half);
        assert!((v[0] - 0.5).abs() < 1e-14 && (v[1] - 0.25).abs() < 1e-14, "{v:?}");
        let s = m.selection(&SelectionRule::Steiner, SpaceNorm::Euclidean).unwrap();
        assert_eq!(s.measure_of(&unit()), vec![0.5, 0.5]);
        for sel in [e, s] {
            assert!(m.measure_of(&half, &g).unwrap().contains_point(&sel.measure_of(&half), 1e-8));
        }
        let z = Generator::Zonotope { center: vec![0.0, 0.0], generators: vec![vec![1.0, 1.0], vec![1.0, -1.0]] };
        let mz = SetValuedMeasure::new(SetValuedDensity::constant(&z, 0.0, 1.0), ScalarMeasure::lebesgue()).unwrap();
        let ez = mz.selection(&SelectionRule::Extremal(vec![0.6, 0.8]), SpaceNorm::Euclidean).unwrap();
        assert_eq!(ez.measure_of(&unit()), vec![0.0, 2.0]);
    }

    #[test]
    fn variation_examples() {
        let g = grid2();
        let opts = HkOptions::new(1e-9);
        assert!((unit_ball().variation(&unit(), 4, &g).unwrap() - 1.0).abs() < 1e-12);
        let zero = SetValuedMeasure::new(
            SetValuedDensity::constant(&Generator::singleton(vec![0.0, 0.0]), 0.0, 1.0),
            ScalarMeasure::lebesgue(),
        )
        .unwrap();
        assert_eq!(zero.variation(&unit(), 4, &g).unwrap(), 0.0);
        let sq = Generator::Box { center: vec![0.0, 0.0], radii: vec![1.0, 1.0] };
        let m = SetValuedMeasure::new(SetValuedDensity::constant(&sq, 0.0, 1.0), ScalarMeasure::lebesgue()).unwrap();
        assert!((m.variation(&unit(), 3, &g).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((m.variation_density(&unit(), &g, &opts).unwrap() - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn rn_equality_and_indefinite() {
        let g = grid2();
        let opts = HkOptions::new(1e-9);
        let m = unit_ball();
        assert!(m.rn_equality_check(&Integrand::constant(1.0), &unit(), &g, &opts).unwrap() <= 2e-9);
        assert!(m.rn_equality_check(&Integrand::new(|t| t), &unit(), &g, &opts).unwrap() <= 3e-9);
        assert!(m.rn_equality_check(&Integrand::new(|t| t - 0.5), &unit(), &g, &opts).is_err());
        let fam = vec![MeasurableSet::empty(), MeasurableSet::closed(0.0, 0.5).unwrap(), MeasurableSet::from_interval(crate::domain::Interval::left_open(0.5, 1.0).unwrap()), unit()];
        let w = m.indefinite_integral(&Integrand::new(|t| t * t), &fam, &g, &opts).unwrap();
        assert_eq!(w[0].norm_of_set(), 0.0);
        assert!(w[3].hausdorff(&w[1].minkowski_sum(&w[2]).unwrap()).unwrap() <= 3e-9);
    }

    #[test]
    fn rejects_negative_radius_and_base() {
        let bad = SetValuedDensity::Ball { center: vec![Density::zero()], radius: Density::constant(-1.0, 0.0, 1.0) };
        assert!(SetValuedMeasure::new(bad, ScalarMeasure::lebesgue()).is_err());
        let g = Generator::Ball { center: vec![0.0], radius: 1.0 };
        assert!(SetValuedMeasure::new(SetValuedDensity::constant(&g, 0.0, 1.0), ScalarMeasure::lebesgue().scale(-1.0)).is_err());
    }
}
