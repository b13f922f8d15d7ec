use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::point::{closest_on_segment, Point2};
use crate::{Error, Result};

/// Slack allowed when checking that a projection onto one primitive's
/// boundary also satisfies the remaining primitives.
const ON_BOUNDARY_TOL: f64 = 1e-9;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect::new(
            Point2::new(self.min.x.max(other.min.x), self.min.y.max(other.min.y)),
            Point2::new(self.max.x.min(other.max.x), self.max.y.min(other.max.y)),
        )
    }

    pub fn dilate(&self, by: f64) -> Rect {
        Rect::new(
            Point2::new(self.min.x - by, self.min.y - by),
            Point2::new(self.max.x + by, self.max.y + by),
        )
    }

    /// Bounding box of a non-empty point set.
    pub fn bounding(points: &[Point2]) -> Option<Rect> {
        let first = *points.first()?;
        let mut r = Rect::new(first, first);
        for p in &points[1..] {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }
}

/// One signed region; a [`Domain`] is the intersection of its primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    /// `((x-cx)/a)^2 + ((y-cy)/b)^2 <= 1`
    InsideEllipse { center: Point2, semi_axes: [f64; 2] },
    OutsideDisk { center: Point2, radius: f64 },
    InsideDisk { center: Point2, radius: f64 },
    /// Simple polygon, either orientation.
    InsidePolygon { vertices: Vec<Point2> },
    /// `{x : (x - point) . normal >= 0}`. Unbounded, so a domain using it
    /// needs an explicit bounding box.
    HalfPlane { point: Point2, normal: Point2 },
}

impl Primitive {
    pub(crate) fn validate(&self) -> Result<()> {
        let ok = match self {
            Primitive::InsideEllipse { center, semi_axes } => {
                center.is_finite()
                    && semi_axes.iter().all(|a| a.is_finite() && *a > 0.0)
            }
            Primitive::OutsideDisk { center, radius } | Primitive::InsideDisk { center, radius } => {
                center.is_finite() && radius.is_finite() && *radius > 0.0
            }
            Primitive::InsidePolygon { vertices } => {
                vertices.len() >= 3 && vertices.iter().all(|v| v.is_finite())
            }
            Primitive::HalfPlane { point, normal } => {
                point.is_finite() && normal.is_finite() && normal.norm() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("primitive", format!("malformed primitive {self:?}")))
        }
    }

    /// Positive iff `p` lies outside this primitive's closed region.
    pub fn violation(&self, p: Point2) -> f64 {
        match self {
            Primitive::InsideEllipse { center, semi_axes } => {
                let q = p - *center;
                let u = q.x / semi_axes[0];
                let v = q.y / semi_axes[1];
                u * u + v * v - 1.0
            }
            Primitive::OutsideDisk { center, radius } => radius - p.dist(*center),
            Primitive::InsideDisk { center, radius } => p.dist(*center) - radius,
            Primitive::InsidePolygon { vertices } => {
                if point_in_polygon(p, vertices) {
                    0.0
                } else {
                    polygon_boundary_distance(p, vertices)
                }
            }
            Primitive::HalfPlane { point, normal } => {
                let n = *normal * (1.0 / normal.norm());
                -(p - *point).dot(n)
            }
        }
    }

    /// Nearest point of this primitive's boundary to `p`, or `None` when the
    /// iterative projection fails to converge.
    pub fn project(&self, p: Point2) -> Option<Point2> {
        match self {
            Primitive::InsideEllipse { center, semi_axes } => {
                project_ellipse(p, *center, semi_axes[0], semi_axes[1])
            }
            Primitive::OutsideDisk { center, radius } | Primitive::InsideDisk { center, radius } => {
                let q = p - *center;
                let d = q.norm();
                if d == 0.0 {
                    Some(*center + Point2::new(*radius, 0.0))
                } else {
                    Some(*center + q * (radius / d))
                }
            }
            Primitive::InsidePolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| closest_on_segment(p, vertices[i], vertices[(i + 1) % n]))
                    .min_by(|a, b| a.dist_sq(p).total_cmp(&b.dist_sq(p)))
            }
            Primitive::HalfPlane { point, normal } => {
                let n = *normal * (1.0 / normal.norm());
                Some(p - n * (p - *point).dot(n))
            }
        }
    }

    /// Bounding box of the region, `None` when unbounded.
    pub fn bbox(&self) -> Option<Rect> {
        match self {
            Primitive::InsideEllipse { center, semi_axes } => Some(Rect::new(
                Point2::new(center.x - semi_axes[0], center.y - semi_axes[1]),
                Point2::new(center.x + semi_axes[0], center.y + semi_axes[1]),
            )),
            Primitive::InsideDisk { center, radius } => Some(Rect::new(
                Point2::new(center.x - radius, center.y - radius),
                Point2::new(center.x + radius, center.y + radius),
            )),
            Primitive::InsidePolygon { vertices } => Rect::bounding(vertices),
            Primitive::OutsideDisk { .. } | Primitive::HalfPlane { .. } => None,
        }
    }
}

/// Nearest point on the ellipse boundary by safeguarded Newton iteration on
/// the parametric stationarity condition, after folding `p` into the first
/// quadrant of the ellipse frame.
fn project_ellipse(p: Point2, center: Point2, a: f64, b: f64) -> Option<Point2> {
    let q = p - center;
    let (u, v) = (q.x.abs(), q.y.abs());
    // d/dt of half the squared distance to (a cos t, b sin t)
    let g = |t: f64| (b * b - a * a) * t.sin() * t.cos() + a * u * t.sin() - b * v * t.cos();
    let dg = |t: f64| (b * b - a * a) * (2.0 * t).cos() + a * u * t.cos() + b * v * t.sin();

    // g(0) <= 0 <= g(pi/2) always holds in the first quadrant
    let (mut lo, mut hi) = (0.0_f64, FRAC_PI_2);
    let mut t = (a * v).atan2(b * u);
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let gt = g(t);
        if gt == 0.0 {
            converged = true;
            break;
        }
        if gt < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let d = dg(t);
        let mut next = if d != 0.0 { t - gt / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        if step < NEWTON_TOL || hi - lo < NEWTON_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    // The axis points are always critical; keep whichever is nearest.
    let folded = Point2::new(u, v);
    let best = [t, 0.0, FRAC_PI_2]
        .into_iter()
        .map(|s| Point2::new(a * s.cos(), b * s.sin()))
        .min_by(|x, y| x.dist_sq(folded).total_cmp(&y.dist_sq(folded)))?;
    let sx = if q.x < 0.0 { -1.0 } else { 1.0 };
    let sy = if q.y < 0.0 { -1.0 } else { 1.0 };
    Some(center + Point2::new(sx * best.x, sy * best.y))
}

fn point_in_polygon(p: Point2, vertices: &[Point2]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if crate::geometry::point::point_segment_distance(p, a, b) == 0.0 {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn polygon_boundary_distance(p: Point2, vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| crate::geometry::point::point_segment_distance(p, vertices[i], vertices[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Compact planar region given as an intersection of [`Primitive`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub primitives: Vec<Primitive>,
    pub bbox: Rect,
}

impl Domain {
    /// Builds a domain whose bounding box is derived from its bounded
    /// primitives. Fails if no primitive is bounded.
    pub fn new(name: impl Into<String>, primitives: Vec<Primitive>) -> Result<Self> {
        let bbox = primitives
            .iter()
            .filter_map(Primitive::bbox)
            .reduce(|a, b| a.intersect(&b))
            .ok_or_else(|| Error::invalid("domain", "no bounded primitive; supply a bbox"))?;
        Self::with_bbox(name, primitives, bbox)
    }

    pub fn with_bbox(name: impl Into<String>, primitives: Vec<Primitive>, bbox: Rect) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::invalid("domain", "at least one primitive is required"));
        }
        for p in &primitives {
            p.validate()?;
        }
        if !(bbox.min.is_finite() && bbox.max.is_finite())
            || bbox.width() <= 0.0
            || bbox.height() <= 0.0
        {
            return Err(Error::invalid("bbox", "bounding box must be finite with positive extent"));
        }
        Ok(Domain {
            name: name.into(),
            primitives,
            bbox,
        })
    }

    /// The ellipse `4x^2/9 + y^2 <= 1` with the disk of radius 1/2 around
    /// (4/5, 0) removed.
    pub fn ellipse_minus_disk() -> Self {
        Domain::new(
            "ellipse_minus_disk",
            vec![
                Primitive::InsideEllipse {
                    center: Point2::ORIGIN,
                    semi_axes: [1.5, 1.0],
                },
                Primitive::OutsideDisk {
                    center: Point2::new(0.8, 0.0),
                    radius: 0.5,
                },
            ],
        )
        .expect("static domain is valid")
    }

    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        Domain::new("disk", vec![Primitive::InsideDisk { center, radius }])
    }

    /// Closed membership: boundary points count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        self.primitives.iter().all(|prim| prim.violation(p) <= 0.0)
    }

    /// Nearest point of the domain boundary to `p`.
    ///
    /// Each primitive's boundary projection is a candidate; candidates that
    /// violate another primitive are not on the domain boundary and are
    /// dropped. Exact ties keep the earlier primitive.
    pub fn nearest_boundary_point(&self, p: Point2) -> Result<Point2> {
        let mut best: Option<(f64, Point2)> = None;
        for (i, prim) in self.primitives.iter().enumerate() {
            let Some(b) = prim.project(p) else { continue };
            let on_boundary = self
                .primitives
                .iter()
                .enumerate()
                .all(|(j, other)| j == i || other.violation(b) <= ON_BOUNDARY_TOL);
            if !on_boundary {
                continue;
            }
            let d = b.dist_sq(p);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, b));
            }
        }
        best.map(|(_, b)| b)
            .ok_or(Error::ProjectionFailed { x: p.x, y: p.y })
    }

    /// Mirror image of `p` across the nearest boundary point: `2b - p`.
    pub fn reflect(&self, p: Point2) -> Result<Point2> {
        let b = self.nearest_boundary_point(p)?;
        if b == p {
            return Ok(p);
        }
        Ok(b + (b - p))
    }
}
