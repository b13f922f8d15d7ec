//! Marching-squares isolines over cell-center samples.
//!
//! Squares are formed by four neighbouring cell centers. The grid is framed
//! by a ring of virtual samples carrying `pad`, so with `pad <= level` every
//! isoline closes. Saddles are resolved by the average of the four corners.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_segment_distance, Grid2D, Point2, RegionMask};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point2>,
    pub closed: bool,
}

impl Polyline {
    /// Consecutive vertex pairs, including the closing edge.
    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }

    /// Signed area (positive counter-clockwise); zero for open polylines.
    pub fn signed_area(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        0.5 * self
            .segments()
            .map(|(a, b)| a.x * b.y - b.x * a.y)
            .sum::<f64>()
    }
}

/// Grid edge crossed by an isoline: `(i, j, 0)` joins nodes `(i,j)`-`(i+1,j)`,
/// `(i, j, 1)` joins `(i,j)`-`(i,j+1)`. Indices may be -1 or `n` on the frame.
type EdgeKey = (i64, i64, u8);

/// Closed polylines approximating `{value > level}`'s boundary.
pub fn isolines(grid: &Grid2D, values: &[f64], level: f64, pad: f64) -> Vec<Polyline> {
    assert_eq!(values.len(), grid.len());
    let (nx, ny) = (grid.nx as i64, grid.ny as i64);
    let value = |i: i64, j: i64| -> f64 {
        if i < 0 || j < 0 || i >= nx || j >= ny {
            pad
        } else {
            values[(j * nx + i) as usize]
        }
    };
    let node = |i: i64, j: i64| {
        Point2::new(
            grid.origin.x + i as f64 * grid.spacing,
            grid.origin.y + j as f64 * grid.spacing,
        )
    };

    let mut crossings: HashMap<EdgeKey, Point2> = HashMap::new();
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();

    for j in -1..ny {
        for i in -1..nx {
            let v = [value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)];
            let above = v.map(|x| x > level);
            let case = above
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &a)| acc | ((a as u8) << k));
            if case == 0 || case == 15 {
                continue;
            }
            // local edges: 0 bottom, 1 right, 2 top, 3 left
            let keys: [EdgeKey; 4] = [(i, j, 0), (i + 1, j, 1), (i, j + 1, 0), (i, j, 1)];
            let ends: [(Point2, f64, Point2, f64); 4] = [
                (node(i, j), v[0], node(i + 1, j), v[1]),
                (node(i + 1, j), v[1], node(i + 1, j + 1), v[2]),
                (node(i, j + 1), v[3], node(i + 1, j + 1), v[2]),
                (node(i, j), v[0], node(i, j + 1), v[3]),
            ];
            let center_above = 0.25 * (v[0] + v[1] + v[2] + v[3]) > level;
            let pairs: &[(usize, usize)] = match case {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 if center_above => &[(0, 1), (2, 3)],
                5 => &[(3, 0), (1, 2)],
                10 if center_above => &[(3, 0), (1, 2)],
                10 => &[(0, 1), (2, 3)],
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                for e in [a, b] {
                    crossings.entry(keys[e]).or_insert_with(|| {
                        let (p0, v0, p1, v1) = ends[e];
                        let t = ((level - v0) / (v1 - v0)).clamp(0.0, 1.0);
                        p0 + (p1 - p0) * t
                    });
                }
                segments.push((keys[a], keys[b]));
            }
        }
    }
    chain(&segments, &crossings)
}

fn chain(segments: &[(EdgeKey, EdgeKey)], crossings: &HashMap<EdgeKey, Point2>) -> Vec<Polyline> {
    let mut incident: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(s);
        incident.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    // deterministic order: walk segments in creation order
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut cur) = segments[start];
        let mut keys = vec![first, cur];
        let mut closed = false;
        loop {
            let next = incident[&cur].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segments[s];
            cur = if a == cur { b } else { a };
            if cur == first {
                closed = true;
                break;
            }
            keys.push(cur);
        }
        out.push(Polyline {
            points: keys.iter().map(|k| crossings[k]).collect(),
            closed,
        });
    }
    out
}

/// Boundary loops of an occupancy mask (isoline at 1/2 of the 0/1 field).
pub fn mask_boundary(mask: &RegionMask) -> Vec<Polyline> {
    let values: Vec<f64> = mask.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
    isolines(&mask.grid, &values, 0.5, 0.0)
}

/// Hausdorff distance between two polyline sets, refining vertex-to-vertex
/// distances with point-to-segment distances in both directions.
pub fn polyline_hausdorff(a: &[Polyline], b: &[Polyline]) -> Result<f64> {
    let directed = |from: &[Polyline], to: &[Polyline]| -> Result<f64> {
        let segs: Vec<(Point2, Point2)> = to
            .iter()
            .flat_map(|p| {
                let single = (p.points.len() == 1).then(|| (p.points[0], p.points[0]));
                p.segments().chain(single)
            })
            .collect();
        if segs.is_empty() {
            return Err(Error::EmptyInput("polyline set"));
        }
        let mut worst: f64 = 0.0;
        let mut any = false;
        for v in from.iter().flat_map(|p| p.points.iter()) {
            any = true;
            let d = segs
                .iter()
                .map(|&(s0, s1)| point_segment_distance(*v, s0, s1))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        if !any {
            return Err(Error::EmptyInput("polyline set"));
        }
        Ok(worst)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_mask_gives_one_diamond() {
        let g = Grid2D::new(Point2::ORIGIN, 1.0, 3, 3).unwrap();
        let mut m = RegionMask::empty(g);
        m.set(1, 1, true);
        let loops = mask_boundary(&m);
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closed);
        assert_eq!(loops[0].points.len(), 4);
        assert!((loops[0].signed_area().abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn border_touching_mask_still_closes() {
        let g = Grid2D::new(Point2::ORIGIN, 1.0, 4, 2).unwrap();
        let m = RegionMask::full(g);
        let loops = mask_boundary(&m);
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closed);
    }

    #[test]
    fn saddle_uses_corner_average() {
        let g = Grid2D::new(Point2::ORIGIN, 1.0, 2, 2).unwrap();
        // bl and tr high; average 0.6 > 0.5 joins them into one region
        let vals = [1.0, 0.2, 0.2, 1.0];
        let loops = isolines(&g, &vals, 0.5, 0.0);
        assert_eq!(loops.len(), 1);
        let vals = [0.6, 0.0, 0.0, 0.6];
        let loops = isolines(&g, &vals, 0.5, 0.0);
        assert_eq!(loops.len(), 2);
    }

    #[test]
    fn polyline_hausdorff_of_identical_sets_is_zero() {
        let p = Polyline {
            points: vec![Point2::ORIGIN, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            closed: true,
        };
        let one = [p];
        assert_eq!(polyline_hausdorff(&one, &one).unwrap(), 0.0);
        assert!(polyline_hausdorff(&[], &[]).is_err());
    }
}
