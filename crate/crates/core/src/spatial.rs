//! Static 2-d tree with exact nearest-neighbour and radius queries.

use crate::geometry::Point2;

const LEAF: usize = 8;

/// Implicit k-d tree: points are permuted in place so that every subrange
/// `[lo, hi)` has its median (along the depth's axis) at `(lo + hi) / 2`.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point2>,
    ids: Vec<usize>,
}

#[inline]
fn coord(p: Point2, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn new(points: &[Point2]) -> Self {
        let mut items: Vec<(Point2, usize)> = points.iter().copied().zip(0..).collect();
        build(&mut items, 0);
        let (points, ids) = items.into_iter().unzip();
        KdTree { points, ids }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index (into the construction slice) and squared distance of the
    /// nearest point.
    pub fn nearest(&self, q: Point2) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(q, 0, self.points.len(), 0, &mut best);
        Some((self.ids[best.0], best.1))
    }

    pub fn nearest_distance(&self, q: Point2) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |(_, d2)| d2.sqrt())
    }

    fn nearest_rec(&self, q: Point2, lo: usize, hi: usize, depth: usize, best: &mut (usize, f64)) {
        if hi - lo <= LEAF {
            for k in lo..hi {
                let d2 = self.points[k].dist_sq(q);
                if d2 < best.1 {
                    *best = (k, d2);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = depth % 2;
        let p = self.points[mid];
        let d2 = p.dist_sq(q);
        if d2 < best.1 {
            *best = (mid, d2);
        }
        let delta = coord(q, axis) - coord(p, axis);
        let (first, second) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.nearest_rec(q, first.0, first.1, depth + 1, best);
        if delta * delta < best.1 {
            self.nearest_rec(q, second.0, second.1, depth + 1, best);
        }
    }

    /// True iff some point lies strictly closer than `radius` to `q`.
    pub fn any_within(&self, q: Point2, radius: f64) -> bool {
        !self.points.is_empty() && self.any_rec(q, radius * radius, 0, self.points.len(), 0)
    }

    fn any_rec(&self, q: Point2, r2: f64, lo: usize, hi: usize, depth: usize) -> bool {
        if hi - lo <= LEAF {
            return self.points[lo..hi].iter().any(|p| p.dist_sq(q) < r2);
        }
        let mid = (lo + hi) / 2;
        let axis = depth % 2;
        let p = self.points[mid];
        if p.dist_sq(q) < r2 {
            return true;
        }
        let delta = coord(q, axis) - coord(p, axis);
        let (first, second) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.any_rec(q, r2, first.0, first.1, depth + 1)
            || (delta * delta < r2 && self.any_rec(q, r2, second.0, second.1, depth + 1))
    }

    /// Calls `visit(id, point)` for every point with `|p - q| < radius`.
    pub fn for_each_within(&self, q: Point2, radius: f64, mut visit: impl FnMut(usize, Point2)) {
        if !self.points.is_empty() {
            self.within_rec(q, radius * radius, 0, self.points.len(), 0, &mut visit);
        }
    }

    fn within_rec(
        &self,
        q: Point2,
        r2: f64,
        lo: usize,
        hi: usize,
        depth: usize,
        visit: &mut impl FnMut(usize, Point2),
    ) {
        if hi - lo <= LEAF {
            for k in lo..hi {
                if self.points[k].dist_sq(q) < r2 {
                    visit(self.ids[k], self.points[k]);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = depth % 2;
        let p = self.points[mid];
        if p.dist_sq(q) < r2 {
            visit(self.ids[mid], p);
        }
        let delta = coord(q, axis) - coord(p, axis);
        if delta < 0.0 || delta * delta < r2 {
            self.within_rec(q, r2, lo, mid, depth + 1, visit);
        }
        if delta >= 0.0 || delta * delta < r2 {
            self.within_rec(q, r2, mid + 1, hi, depth + 1, visit);
        }
    }
}

fn build(items: &mut [(Point2, usize)], depth: usize) {
    if items.len() <= LEAF {
        return;
    }
    let axis = depth % 2;
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| coord(a.0, axis).total_cmp(&coord(b.0, axis)));
    let (left, right) = items.split_at_mut(mid);
    build(left, depth + 1);
    build(&mut right[1..], depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn nearest_matches_linear_scan(
            pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..300),
            q in (-6.0f64..6.0, -6.0f64..6.0),
            radius in 0.0f64..3.0,
        ) {
            let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
            let q = Point2::new(q.0, q.1);
            let tree = KdTree::new(&pts);
            let (id, d2) = tree.nearest(q).unwrap();
            let brute = pts.iter().map(|p| p.dist_sq(q)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(d2, brute);
            prop_assert_eq!(pts[id].dist_sq(q), brute);

            let mut found: Vec<usize> = Vec::new();
            tree.for_each_within(q, radius, |i, _| found.push(i));
            found.sort_unstable();
            let expected: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist_sq(q) < radius * radius).collect();
            prop_assert_eq!(&found, &expected);
            prop_assert_eq!(tree.any_within(q, radius), !expected.is_empty());
        }
    }

    #[test]
    fn empty_tree() {
        let t = KdTree::new(&[]);
        assert!(t.nearest(Point2::ORIGIN).is_none());
        assert!(!t.any_within(Point2::ORIGIN, 1.0));
    }
}
