//! Implicit planar domains, boundary reflection, grids, region masks and
//! Lebesgue measure.

mod domain;
mod grid;
mod point;

pub use domain::{Domain, Primitive, Rect};
pub use grid::{
    covering_number_bound, distance_to_cells, inner_parallel_set, squared_distance_transform,
    unit_ball_volume, Grid2D, ParallelSet, RegionMask,
};
pub use point::{point_segment_distance, Point2};

/// Spacing for measure-critical rasters of the study domain.
pub const FINE_SPACING: f64 = 0.005;
/// Spacing for diagnostics.
pub const COARSE_SPACING: f64 = 0.02;
