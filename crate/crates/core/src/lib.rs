//! Gauge (Henstock-Kurzweil) integration against scalar, vector-valued and
//! set-valued measures on intervals of the extended real line.
//!
//! Everything is generic over a [`Real`] scalar; the `*64` aliases at the
//! crate root fix it to `f64`.

pub mod convex;
pub mod domain;
pub mod error;
pub mod hk;
pub mod integrand;
pub mod lab;
pub mod measure;
pub mod par;
pub mod scalar;
pub mod set_valued;
pub mod vector;

pub use convex::{validate_convexity, ConvexityCheck, Generator, SupportSet};
pub use domain::{Gauge, Interval, MeasurableSet, SetOp, TaggedPartition};
pub use error::{Error, Result};
pub use hk::{hk_integrate, hk_integrate_unbounded, hk_integrate_with_partition, HkOptions, HkResult};
pub use integrand::{Integrand, SimpleFunction};
pub use measure::{Density, PiecewisePoly, Poly, ScalarMeasure};
pub use scalar::Real;
pub use set_valued::{SelectionRule, SetValuedDensity, SetValuedMeasure};
pub use vector::{dyadic_family, DirectionGrid, KlMode, KlResult, SpaceNorm, VectorMeasure};

pub type Interval64 = Interval<f64>;
pub type MeasurableSet64 = MeasurableSet<f64>;
pub type ScalarMeasure64 = ScalarMeasure<f64>;
pub type VectorMeasure64 = VectorMeasure<f64>;
pub type DirectionGrid64 = DirectionGrid<f64>;
