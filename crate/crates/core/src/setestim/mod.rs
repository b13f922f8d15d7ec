//! Set estimators and set distances: r-convex hulls of point clouds, the
//! Hausdorff distance and the distance in measure.

mod hull;
mod oracle;

pub use hull::{rconvex_hull, HullResult};
pub use oracle::{rconvex_membership_oracle, rconvex_oracle_mask};

use rayon::prelude::*;

use crate::geometry::{Point2, Rect, RegionMask};
use crate::spatial::KdTree;
use crate::{Error, Result};

/// Radius used for simulated ON samples.
pub const DEFAULT_R_SIMULATION: f64 = 0.4;
/// Radius used for ingested tracks.
pub const DEFAULT_R_TRACK: f64 = 0.02;

/// Non-empty set of finite planar points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point2>,
}

impl PointCloud {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("point cloud"));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid("points", format!("non-finite point ({}, {})", p.x, p.y)));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> Rect {
        Rect::bounding(&self.points).expect("cloud is non-empty")
    }
}

/// Finite point set with a nearest-neighbour index, reusable across many
/// distance evaluations.
#[derive(Debug, Clone)]
pub struct DiscreteSet {
    points: Vec<Point2>,
    tree: KdTree,
}

impl DiscreteSet {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("point set"));
        }
        let tree = KdTree::new(&points);
        Ok(DiscreteSet { points, tree })
    }

    /// Occupied cell centers of `mask`.
    pub fn from_mask(mask: &RegionMask) -> Result<Self> {
        Self::new(mask.occupied_centers())
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn distance_to(&self, q: Point2) -> f64 {
        self.tree
            .nearest(q)
            .map_or(f64::INFINITY, |(i, _)| self.points[i].dist(q))
    }
}

/// `sup_{a in from} dist(a, to)`.
pub fn directed_hausdorff(from: &[Point2], to: &DiscreteSet) -> f64 {
    from.par_iter()
        .map(|&p| to.distance_to(p))
        .reduce(|| 0.0, f64::max)
}

pub fn hausdorff(a: &DiscreteSet, b: &DiscreteSet) -> f64 {
    directed_hausdorff(&a.points, b).max(directed_hausdorff(&b.points, a))
}

pub fn hausdorff_points(a: &[Point2], b: &[Point2]) -> Result<f64> {
    Ok(hausdorff(&DiscreteSet::new(a.to_vec())?, &DiscreteSet::new(b.to_vec())?))
}

/// Masks are compared through their occupied cell centers.
pub fn hausdorff_masks(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    Ok(hausdorff(&DiscreteSet::from_mask(a)?, &DiscreteSet::from_mask(b)?))
}

/// `mu(A \ B) + mu(B \ A)` on a common grid.
pub fn distance_in_measure(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    Ok(a.symmetric_difference(b)?.measure())
}
