//! Finite samples of the dual unit sphere.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Norm on `R^d`; the grid lives on the unit sphere of its dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SpaceNorm {
    #[default]
    Euclidean,
    /// `max_i |x_i|`; the dual is `sum_i |x_i|`.
    Sup,
    /// `sum_i |x_i|`; the dual is `max_i |x_i|`.
    One,
}

impl SpaceNorm {
    pub fn norm<T: Real>(self, x: &[T]) -> T {
        match self {
            SpaceNorm::Euclidean => x.iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b).sqrt(),
            SpaceNorm::Sup => x.iter().map(|v| v.abs()).fold(T::zero(), T::max),
            SpaceNorm::One => x.iter().map(|v| v.abs()).fold(T::zero(), |a, b| a + b),
        }
    }

    pub fn dual(self) -> SpaceNorm {
        match self {
            SpaceNorm::Euclidean => SpaceNorm::Euclidean,
            SpaceNorm::Sup => SpaceNorm::One,
            SpaceNorm::One => SpaceNorm::Sup,
        }
    }

    pub fn dual_norm<T: Real>(self, u: &[T]) -> T {
        self.dual().norm(u)
    }

    /// A point of the unit ball where `u . x` reaches `dual_norm(u)`.
    pub fn maximizer<T: Real>(self, u: &[T]) -> Vec<T> {
        let d = self.dual_norm(u);
        if d == T::zero() {
            return vec![T::zero(); u.len()];
        }
        match self {
            SpaceNorm::Euclidean => u.iter().map(|&v| v / d).collect(),
            SpaceNorm::Sup => u.iter().map(|&v| crate::scalar::sgn(v)).collect(),
            SpaceNorm::One => {
                let k = (0..u.len()).fold(0, |k, i| if u[i].abs() > u[k].abs() { i } else { k });
                let mut x = vec![T::zero(); u.len()];
                x[k] = crate::scalar::sgn(u[k]);
                x
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceNorm::Euclidean => "euclidean",
            SpaceNorm::Sup => "sup",
            SpaceNorm::One => "one",
        }
    }
}

impl std::str::FromStr for SpaceNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(SpaceNorm::Euclidean),
            "sup" | "max" | "linf" => Ok(SpaceNorm::Sup),
            "one" | "l1" => Ok(SpaceNorm::One),
            _ => Err(Error::InvalidArgument(format!("unknown norm '{s}'"))),
        }
    }
}

impl fmt::Display for SpaceNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Unit vectors of the dual norm, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid<T = f64> {
    dim: usize,
    norm: SpaceNorm,
    data: Vec<T>,
    antipodally_closed: bool,
}

const UNIT_TOL: f64 = 1e-12;

impl<T: Real> DirectionGrid<T> {
    /// The default grid for `dim`: 64 equal angles in 2D, a 256-point
    /// symmetric Fibonacci sphere in 3D, otherwise coordinate and diagonal directions.
    pub fn default_for(dim: usize, norm: SpaceNorm) -> Result<Self> {
        let n = match dim {
            2 => 64,
            3 => 256,
            _ => 0,
        };
        Self::new(dim, norm, n)
    }

    /// About `n` directions plus `+-e_i` (and sign vectors when the dual is the sup norm).
    pub fn new(dim: usize, norm: SpaceNorm, n: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        let mut raw: Vec<Vec<f64>> = Vec::new();
        match dim {
            1 => {}
            2 => {
                for k in 0..n {
                    let th = 2.0 * PI * k as f64 / n as f64;
                    raw.push(vec![th.cos(), th.sin()]);
                }
            }
            3 => {
                // half a Fibonacci sphere and its antipodes
                let golden = PI * (3.0 - 5f64.sqrt());
                let m = n.div_ceil(2);
                for k in 0..m {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    let v = [r * th.cos(), r * th.sin(), z];
                    raw.push(v.to_vec());
                    raw.push(v.iter().map(|x| -x).collect());
                }
            }
            _ => {
                for i in 0..dim {
                    for j in i + 1..dim {
                        for s in [1.0, -1.0] {
                            for s2 in [1.0, -1.0] {
                                let mut v = vec![0.0; dim];
                                v[i] = s;
                                v[j] = s2;
                                raw.push(v);
                            }
                        }
                    }
                }
            }
        }
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[i] = s;
                raw.push(v);
            }
        }
        if norm.dual() == SpaceNorm::Sup && dim <= 12 {
            for mask in 0..(1usize << dim) {
                raw.push((0..dim).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect());
            }
        }
        // exact zeros keep the basis vectors exact
        let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        let dirs = raw.into_iter().map(|v| v.into_iter().map(|x| T::lit(snap(x))).collect::<Vec<T>>()).map(|v| {
            let d = norm.dual_norm(&v);
            v.into_iter().map(|x| x / d).collect::<Vec<T>>()
        });
        Ok(Self::assemble(dim, norm, dirs))
    }

    /// Grid from explicit directions, each of dual norm one.
    pub fn from_directions(dim: usize, norm: SpaceNorm, dirs: Vec<Vec<T>>) -> Result<Self> {
        if dim == 0 || dirs.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        for u in &dirs {
            if u.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u.len() });
            }
            let d = norm.dual_norm(u);
            if (d - T::one()).abs() > T::lit(UNIT_TOL) {
                return Err(Error::InvalidGrid(format!("direction of dual norm {} is not a unit vector", d.to_f64_lossy())));
            }
        }
        Ok(Self::assemble(dim, norm, dirs.into_iter()))
    }

    fn assemble(dim: usize, norm: SpaceNorm, dirs: impl Iterator<Item = Vec<T>>) -> Self {
        let mut data: Vec<T> = Vec::new();
        let close = |a: &[T], b: &[T]| a.iter().zip(b).all(|(x, y)| (*x - *y).abs() <= T::lit(UNIT_TOL));
        for u in dirs {
            let dup = data.chunks(dim).any(|v| close(v, &u));
            if !dup {
                data.extend(u);
            }
        }
        let neg = |u: &[T]| u.iter().map(|&x| -x).collect::<Vec<T>>();
        let antipodally_closed = data.chunks(dim).all(|u| data.chunks(dim).any(|v| close(v, &neg(u))));
        Self { dim, norm, data, antipodally_closed }
    }

    /// One direction per antipodal pair: the one whose first nonzero coordinate is positive.
    pub fn hemisphere(&self) -> Self {
        let tol = T::lit(UNIT_TOL);
        let keep = self.iter().filter(|u| u.iter().find(|x| x.abs() > tol).is_some_and(|x| *x > T::zero())).map(<[T]>::to_vec);
        Self::assemble(self.dim, self.norm, keep)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> SpaceNorm {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_antipodally_closed(&self) -> bool {
        self.antipodally_closed
    }

    pub fn direction(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.data.chunks(self.dim)
    }

    /// Row-major copy of all directions.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.iter().map(<[T]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_in_dual_norm_with_basis() {
        for norm in [SpaceNorm::Euclidean, SpaceNorm::Sup, SpaceNorm::One] {
            for dim in 1..=4 {
                let g = DirectionGrid::<f64>::default_for(dim, norm).unwrap();
                assert!(g.iter().all(|u| (norm.dual_norm(u) - 1.0).abs() < 1e-12));
                for i in 0..dim {
                    for s in [1.0, -1.0] {
                        assert!(g.iter().any(|u| (0..dim).all(|j| u[j] == if i == j { s } else { 0.0 })));
                    }
                }
                assert!(g.is_antipodally_closed());
            }
        }
    }

    #[test]
    fn coarse_planar_grid_is_contained_in_finer() {
        let a = DirectionGrid::<f64>::new(2, SpaceNorm::Euclidean, 64).unwrap();
        let b = DirectionGrid::<f64>::new(2, SpaceNorm::Euclidean, 256).unwrap();
        assert_eq!(a.len(), 64);
        assert!(a.iter().all(|u| b.iter().any(|v| (u[0] - v[0]).abs() < 1e-14 && (u[1] - v[1]).abs() < 1e-14)));
    }

    #[test]
    fn hemisphere_breaks_antipodal_pairs() {
        let g = DirectionGrid::<f64>::default_for(2, SpaceNorm::Euclidean).unwrap().hemisphere();
        assert!(!g.is_antipodally_closed());
        assert_eq!(g.len(), 32);
    }

    #[test]
    fn rejects_non_unit_directions() {
        let r = DirectionGrid::from_directions(2, SpaceNorm::Euclidean, vec![vec![0.0, 0.0]]);
        assert!(matches!(r, Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn maximizer_attains_dual_norm() {
        let u = [0.3, -0.8, 0.1];
        for norm in [SpaceNorm::Euclidean, SpaceNorm::Sup, SpaceNorm::One] {
            let x = norm.maximizer(&u);
            let dot: f64 = u.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((dot - norm.dual_norm(&u)).abs() < 1e-15);
            assert!(norm.norm(&x) <= 1.0 + 1e-15);
        }
    }
}
