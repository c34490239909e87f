//! Interval and measurable-set algebra, gauges, tagged partitions and Riemann sums.

mod partition;
mod set;

pub use partition::{
    is_delta_fine, refine_to_delta_fine, refine_with_budget, riemann_sum, Gauge, TaggedPartition, DEFAULT_CELL_BUDGET,
};
pub(crate) use partition::product_term;
pub use set::{Interval, MeasurableSet, SetOp};
