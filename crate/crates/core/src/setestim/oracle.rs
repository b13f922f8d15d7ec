//! Definitional hull membership by exhaustive search over candidate ball
//! centers: a lattice, plus the circumcenters of all point triples. Every
//! bounded component of the empty-center set contains a local maximum of
//! the distance to the cloud, and those are circumcenters, so components
//! thinner than the lattice are still found. Cubic and slow; meant for
//! tests.

use crate::geometry::{Grid2D, Point2, RegionMask};

fn is_empty_center(cloud: &[Point2], c: Point2, r: f64) -> bool {
    cloud.iter().all(|p| p.dist(c) >= r)
}

fn circumcenter(a: Point2, b: Point2, c: Point2) -> Option<Point2> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-14 {
        return None;
    }
    let (a2, b2, c2) = (a.norm_sq(), b.norm_sq(), c.norm_sq());
    Some(Point2::new(
        (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
    ))
}

fn empty_circumcenters(cloud: &[Point2], r: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    for a in 0..cloud.len() {
        for b in a + 1..cloud.len() {
            for c in b + 1..cloud.len() {
                if let Some(o) = circumcenter(cloud[a], cloud[b], cloud[c]) {
                    if is_empty_center(cloud, o, r) {
                        out.push(o);
                    }
                }
            }
        }
    }
    out
}

/// True iff no candidate `c` (a lattice point
/// `query + (i, j) * center_spacing` or an empty circumcenter) with
/// `|c - query| < r` is at distance `>= r` from every cloud point.
pub fn rconvex_membership_oracle(cloud: &[Point2], r: f64, query: Point2, center_spacing: f64) -> bool {
    if empty_circumcenters(cloud, r).iter().any(|o| o.dist(query) < r) {
        return false;
    }
    let m = (r / center_spacing).ceil() as i64;
    for i in -m..=m {
        for j in -m..=m {
            let c = Point2::new(
                query.x + i as f64 * center_spacing,
                query.y + j as f64 * center_spacing,
            );
            if c.dist(query) < r && is_empty_center(cloud, c, r) {
                return false;
            }
        }
    }
    true
}

/// [`rconvex_membership_oracle`] at every cell center of `grid`, with
/// `center_spacing = grid.spacing / refine`. The lattices of all queries
/// then coincide, so candidate emptiness is evaluated once per lattice point.
pub fn rconvex_oracle_mask(cloud: &[Point2], r: f64, grid: Grid2D, refine: usize) -> RegionMask {
    let cs = grid.spacing / refine as f64;
    let m = (r / cs).ceil() as i64;
    let lx = (grid.nx as i64 - 1) * refine as i64 + 2 * m + 1;
    let ly = (grid.ny as i64 - 1) * refine as i64 + 2 * m + 1;
    let mut empty = vec![false; (lx * ly) as usize];
    for b in 0..ly {
        for a in 0..lx {
            let c = Point2::new(
                grid.origin.x + (a - m) as f64 * cs,
                grid.origin.y + (b - m) as f64 * cs,
            );
            empty[(b * lx + a) as usize] = is_empty_center(cloud, c, r);
        }
    }
    let offsets: Vec<(i64, i64)> = (-m..=m)
        .flat_map(|i| (-m..=m).map(move |j| (i, j)))
        .filter(|&(i, j)| Point2::new(i as f64 * cs, j as f64 * cs).norm() < r)
        .collect();
    let circumcenters = empty_circumcenters(cloud, r);
    let cells = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            let (a0, b0) = (i as i64 * refine as i64 + m, j as i64 * refine as i64 + m);
            let g = grid.center(i, j);
            !offsets
                .iter()
                .any(|&(di, dj)| empty[((b0 + dj) * lx + a0 + di) as usize])
                && !circumcenters.iter().any(|o| o.dist(g) < r)
        })
        .collect();
    RegionMask { grid, cells }
}
