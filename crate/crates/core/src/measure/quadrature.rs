//! Adaptive Gauss-Legendre quadrature used to evaluate `nu(A)` for densities
//! that have no closed-form antiderivative.

use crate::scalar::Real;

// 10-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
const NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss10<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T) -> T {
    let c = (a + b) / T::lit(2.0);
    let h = (b - a) / T::lit(2.0);
    let mut s = T::zero();
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        let dx = h * T::lit(*x);
        s = s + T::lit(*w) * (f(c - dx) + f(c + dx));
    }
    s * h
}

/// `int_a^b f`, to absolute tolerance `tol` (relative to the magnitude when larger).
/// Infinite limits are mapped onto a finite range.
pub fn integrate<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T) -> T {
    if a >= b {
        return T::zero();
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(f, a, b, gauss10(f, a, b), tol, 0),
        (true, false) => {
            // t = a + s/(1-s)
            let g = move |s: T| {
                let one = T::one();
                let d = one - s;
                f(a + s / d) / (d * d)
            };
            integrate(&g, T::zero(), T::one(), tol)
        }
        (false, true) => {
            let g = move |s: T| {
                let one = T::one();
                let d = one - s;
                f(b - s / d) / (d * d)
            };
            integrate(&g, T::zero(), T::one(), tol)
        }
        (false, false) => integrate(f, a, T::zero(), tol / T::lit(2.0)) + integrate(f, T::zero(), b, tol / T::lit(2.0)),
    }
}

fn adapt<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, whole: T, tol: T, depth: u32) -> T {
    let m = a + (b - a) / T::lit(2.0);
    let left = gauss10(f, a, m);
    let right = gauss10(f, m, b);
    let refined = left + right;
    let scale = T::one().max(refined.abs());
    if depth >= 48 || (refined - whole).abs() <= tol * scale || m <= a || m >= b {
        return refined;
    }
    let half = tol / T::lit(2.0);
    adapt(f, a, m, left, half, depth + 1) + adapt(f, m, b, right, half, depth + 1)
}
