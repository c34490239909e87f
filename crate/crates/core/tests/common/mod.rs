//! Seeded instance generators and an independent polynomial oracle.
#![allow(dead_code)]

use gauge_measure::{Density, Integrand, MeasurableSet, PiecewisePoly, Poly, ScalarMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ascending coefficients.
#[derive(Debug, Clone)]
pub struct P(pub Vec<f64>);

impl P {
    pub fn eval(&self, t: f64) -> f64 {
        let mut s = 0.0;
        let mut p = 1.0;
        for c in &self.0 {
            s += c * p;
            p *= t;
        }
        s
    }

    pub fn mul(&self, o: &P) -> P {
        let mut c = vec![0.0; self.0.len() + o.0.len()];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        P(c)
    }

    /// `int_a^b p`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let e = (k + 1) as i32;
                c * (b.powi(e) - a.powi(e)) / (k + 1) as f64
            })
            .sum()
    }
}

/// Polynomial on each cell of `breaks`, zero outside.
#[derive(Debug, Clone)]
pub struct Pw {
    pub breaks: Vec<f64>,
    pub pieces: Vec<P>,
}

impl Pw {
    pub fn random(r: &mut ChaCha8Rng, lo: f64, hi: f64, max_pieces: usize, max_deg: usize, nonneg: bool) -> Pw {
        let k = r.gen_range(1..=max_pieces);
        let mut inner: Vec<f64> = (1..k).map(|_| r.gen_range(lo..hi)).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        let mut breaks = vec![lo];
        breaks.extend(inner);
        breaks.push(hi);
        let pieces = (0..breaks.len() - 1)
            .map(|_| {
                let deg = r.gen_range(0..=max_deg);
                if nonneg {
                    // c0 + sum c_k t^k with c_k >= 0 stays positive on [0, inf)
                    P((0..=deg).map(|i| if i == 0 { r.gen_range(0.1..2.0) } else { r.gen_range(0.0..1.5) }).collect())
                } else {
                    P((0..=deg).map(|_| r.gen_range(-2.0..2.0)).collect())
                }
            })
            .collect();
        Pw { breaks, pieces }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.breaks.len();
        if n < 2 || t < self.breaks[0] || t > self.breaks[n - 1] {
            return 0.0;
        }
        let i = self.breaks[1..n - 1].partition_point(|b| *b <= t);
        self.pieces[i].eval(t)
    }

    pub fn integrand(&self) -> Integrand {
        let me = self.clone();
        Integrand::new(move |t| me.eval(t)).with_breakpoints(self.breaks.iter().copied())
    }

    pub fn density(&self) -> Density {
        let pieces = self.pieces.iter().map(|p| Poly::new(p.0.clone())).collect();
        Density::Poly(PiecewisePoly::new(self.breaks.clone(), pieces))
    }

    pub fn measure(&self) -> ScalarMeasure {
        ScalarMeasure::new(self.density())
    }
}

/// `int_{[lo,hi]} f rho dt` from merged breakpoints and exact product antiderivatives.
pub fn oracle(f: &Pw, rho: &Pw, lo: f64, hi: f64) -> f64 {
    let mut cuts: Vec<f64> = f.breaks.iter().chain(&rho.breaks).copied().filter(|x| *x > lo && *x < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let (fp, rp) = (piece_at(f, mid), piece_at(rho, mid));
            match (fp, rp) {
                (Some(a), Some(b)) => a.mul(b).integral(w[0], w[1]),
                _ => 0.0,
            }
        })
        .sum()
}

/// Oracle over a union of closed intervals.
pub fn oracle_on(f: &Pw, rho: &Pw, set: &[(f64, f64)]) -> f64 {
    set.iter().map(|(a, b)| oracle(f, rho, *a, *b)).sum()
}

fn piece_at(p: &Pw, t: f64) -> Option<&P> {
    let n = p.breaks.len();
    if n < 2 || t < p.breaks[0] || t > p.breaks[n - 1] {
        return None;
    }
    let i = p.breaks[1..n - 1].partition_point(|b| *b <= t);
    Some(&p.pieces[i])
}

pub fn constant(c: f64, lo: f64, hi: f64) -> Pw {
    Pw { breaks: vec![lo, hi], pieces: vec![P(vec![c])] }
}

/// `k` disjoint closed intervals inside `[lo, hi]`.
pub fn random_union(r: &mut ChaCha8Rng, lo: f64, hi: f64, k: usize) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = (0..2 * k).map(|_| r.gen_range(lo..hi)).collect();
    pts.sort_by(f64::total_cmp);
    pts.chunks(2).filter(|c| c[0] < c[1]).map(|c| (c[0], c[1])).collect()
}

pub fn to_set(parts: &[(f64, f64)]) -> MeasurableSet {
    parts
        .iter()
        .fold(MeasurableSet::empty(), |acc, (a, b)| acc.union(&MeasurableSet::closed(*a, *b).unwrap()))
}

pub fn unit() -> MeasurableSet {
    MeasurableSet::closed(0.0, 1.0).unwrap()
}
