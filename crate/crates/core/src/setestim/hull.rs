//! Grid realisation of the r-convex hull
//! `C_r(X) = { g : no open ball B(c, r) with d(c, X) >= r contains g }`.
//!
//! With `F = { c : d(c, X) >= r }`, a cell center `g` is in the hull iff
//! `d(g, F) >= r`. Distance transforms give cheap bounds on `d(g, F)`; cells
//! the bounds cannot decide are resolved exactly, using that the nearest
//! point of `F` to any `g` outside `F` lies on an arc of some circle
//! `|c - x_i| = r` not covered by the other open disks.

use std::f64::consts::{SQRT_2, TAU};

use rayon::prelude::*;

use super::PointCloud;
use crate::contour::{mask_boundary, Polyline};
use crate::geometry::{distance_to_cells, Grid2D, Point2, RegionMask};
use crate::spatial::KdTree;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct HullResult {
    pub mask: RegionMask,
    pub boundary: Vec<Polyline>,
    pub r: f64,
}

/// Closed arc of the circle of radius `r` about `center`, running
/// counter-clockwise from angle `start` through `len` radians.
#[derive(Debug, Clone, Copy)]
struct Arc {
    start: f64,
    len: f64,
}

fn unit(theta: f64) -> Point2 {
    Point2::new(theta.cos(), theta.sin())
}

fn arc_distance(g: Point2, center: Point2, r: f64, arc: Arc) -> f64 {
    let v = g - center;
    let rho = v.norm();
    if rho == 0.0 {
        return r;
    }
    let theta = v.y.atan2(v.x);
    if (theta - arc.start).rem_euclid(TAU) <= arc.len {
        return (rho - r).abs();
    }
    let a = center + unit(arc.start) * r;
    let b = center + unit(arc.start + arc.len) * r;
    g.dist(a).min(g.dist(b))
}

/// Parts of the circle about `points[i]` outside every other open disk.
fn uncovered_arcs(points: &[Point2], tree: &KdTree, i: usize, r: f64) -> Vec<Arc> {
    let xi = points[i];
    let mut covered: Vec<(f64, f64)> = Vec::new();
    tree.for_each_within(xi, 2.0 * r, |j, xj| {
        if j == i {
            return;
        }
        let v = xj - xi;
        let d = v.norm();
        let half = (d / (2.0 * r)).acos();
        let start = (v.y.atan2(v.x) - half).rem_euclid(TAU);
        let end = start + 2.0 * half;
        if end > TAU {
            covered.push((start, TAU));
            covered.push((0.0, end - TAU));
        } else {
            covered.push((start, end));
        }
    });
    if covered.is_empty() {
        return vec![Arc { start: 0.0, len: TAU }];
    }
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut arcs = Vec::new();
    let mut cursor = 0.0;
    for (a, b) in covered {
        if a > cursor {
            arcs.push(Arc {
                start: cursor,
                len: a - cursor,
            });
        }
        cursor = f64::max(cursor, b);
    }
    if cursor < TAU {
        arcs.push(Arc {
            start: cursor,
            len: TAU - cursor,
        });
    }
    arcs
}

/// Computes the hull mask on `grid`. Cells holding a sample are always
/// occupied.
pub fn rconvex_hull(cloud: &PointCloud, r: f64, grid: Grid2D) -> Result<HullResult> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("must be positive, got {r}")));
    }
    if r < 2.0 * grid.spacing {
        return Err(Error::invalid(
            "r",
            format!(
                "{r} is below twice the grid spacing {}; the grid cannot resolve the hull",
                grid.spacing
            ),
        ));
    }
    if !grid.covers(&cloud.bbox()) {
        return Err(Error::invalid("grid", "does not cover the point cloud"));
    }

    let mut points = cloud.points().to_vec();
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    points.dedup();
    let tree = KdTree::new(&points);

    let half_diag = 0.5 * SQRT_2 * grid.spacing;
    let to_cloud: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| tree.nearest_distance(grid.center_of(k)))
        .collect();
    let in_f: Vec<bool> = to_cloud.iter().map(|&d| d >= r).collect();
    // cells whose square may meet F; the outer ring also stands in for the
    // part of F beyond the grid
    let maybe_f: Vec<bool> = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            let ring = i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.ny;
            ring || to_cloud[k] >= r - half_diag
        })
        .collect();
    let upper = distance_to_cells(&grid, &in_f);
    let lower = distance_to_cells(&grid, &maybe_f);

    // A circle has an uncovered arc only if its center is at distance
    // exactly r from F; the lower bound rules out most centers.
    let candidates: Vec<usize> = (0..points.len())
        .filter(|&i| match grid.cell_of(points[i]) {
            Some((ci, cj)) => lower[grid.index(ci, cj)] - 2.0 * half_diag <= r * (1.0 + 1e-12),
            None => true,
        })
        .collect();
    let arcs: Vec<(Point2, Vec<Arc>)> = candidates
        .par_iter()
        .map(|&i| (points[i], uncovered_arcs(&points, &tree, i, r)))
        .filter(|(_, a)| !a.is_empty())
        .collect();
    let arc_centers: Vec<Point2> = arcs.iter().map(|(c, _)| *c).collect();
    let arc_tree = KdTree::new(&arc_centers);

    let near_empty_ball = |g: Point2| -> bool {
        let mut hit = false;
        arc_tree.for_each_within(g, 2.0 * r, |k, c| {
            if !hit {
                hit = arcs[k].1.iter().any(|&a| arc_distance(g, c, r, a) < r);
            }
        });
        hit
    };

    let cells: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if in_f[k] || upper[k] < r {
                false
            } else if lower[k] - half_diag >= r {
                true
            } else {
                !near_empty_ball(grid.center_of(k))
            }
        })
        .collect();

    let mut mask = RegionMask { grid, cells };
    for p in cloud.points() {
        if let Some((i, j)) = grid.cell_of(*p) {
            mask.set(i, j, true);
        }
    }
    let boundary = mask_boundary(&mask);
    Ok(HullResult { mask, boundary, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_point_has_full_circle() {
        let pts = [Point2::ORIGIN];
        let tree = KdTree::new(&pts);
        let arcs = uncovered_arcs(&pts, &tree, 0, 1.0);
        assert_eq!(arcs.len(), 1);
        assert_eq!(arcs[0].len, TAU);
    }

    #[test]
    fn neighbour_covers_the_facing_arc() {
        // neighbour at distance r covers angles within acos(1/2) = 60 degrees
        let pts = [Point2::ORIGIN, Point2::new(1.0, 0.0)];
        let tree = KdTree::new(&pts);
        let arcs = uncovered_arcs(&pts, &tree, 0, 1.0);
        let total: f64 = arcs.iter().map(|a| a.len).sum();
        assert!((total - (TAU - 2.0 * TAU / 6.0)).abs() < 1e-12);
        for a in &arcs {
            let mid = unit(a.start + 0.5 * a.len);
            assert!(mid.dist(pts[1]) >= 1.0);
        }
    }

    #[test]
    fn arc_distance_inside_and_outside_span() {
        let arc = Arc { start: 0.0, len: std::f64::consts::FRAC_PI_2 };
        let d = arc_distance(Point2::new(2.0, 2.0), Point2::ORIGIN, 1.0, arc);
        assert!((d - (8f64.sqrt() - 1.0)).abs() < 1e-12);
        let d = arc_distance(Point2::new(-2.0, 0.0), Point2::ORIGIN, 1.0, arc);
        assert!((d - 5f64.sqrt()).abs() < 1e-12);
    }
}
