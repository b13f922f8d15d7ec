//! Trajectory CSV.
//!
//! Written files carry `# key=value` metadata lines followed by the header
//! `step,time,x,y,on`. Floats are written with 17 significant digits so a
//! write/read cycle is exact. Ingestion also accepts plain `time,x,y` files
//! as exported from GPS collars (already projected to planar coordinates).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::simulator::{StepCounts, Trajectory, TrajectoryMeta};
use crate::{Error, Result};

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    let m = &traj.meta;
    if let Some(seed) = m.seed {
        writeln!(out, "# seed={seed}").unwrap();
    }
    if let Some(h) = m.h {
        writeln!(out, "# h={h:.16e}").unwrap();
    }
    if !m.domain.is_empty() {
        writeln!(out, "# domain={}", m.domain).unwrap();
    }
    if !m.drift.is_empty() {
        writeln!(out, "# drift={}", m.drift).unwrap();
    }
    if let Some(rng) = &m.rng {
        writeln!(out, "# rng={rng}").unwrap();
    }
    if let Some(c) = &m.counts {
        writeln!(out, "# accepted={}", c.accepted).unwrap();
        writeln!(out, "# reflected={}", c.reflected).unwrap();
        writeln!(out, "# rejected={}", c.rejected).unwrap();
    }
    out.push_str("step,time,x,y,on\n");
    for i in 0..traj.len() {
        let p = traj.points[i];
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{}",
            traj.steps[i],
            traj.times[i],
            p.x,
            p.y,
            u8::from(traj.on_flags[i])
        )
        .unwrap();
    }
    out
}

pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path)?;
    parse_trajectory(&text, path)
}

/// Parses a track. Timestamps must be non-decreasing; the `on` column
/// defaults to 1 and `step` to the row index.
pub fn parse_trajectory(text: &str, path: &Path) -> Result<Trajectory> {
    let err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut meta = TrajectoryMeta::default();
    let mut counts = StepCounts::default();
    let mut has_counts = false;
    let mut columns: Option<Vec<String>> = None;
    let mut traj = Trajectory {
        points: Vec::new(),
        times: Vec::new(),
        steps: Vec::new(),
        on_flags: Vec::new(),
        meta: TrajectoryMeta::default(),
    };

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if let Some(comment) = row.strip_prefix('#') {
            if let Some((key, value)) = comment.trim().split_once('=') {
                let value = value.trim();
                let num = |v: &str| v.parse::<usize>().map_err(|e| err(line, format!("metadata `{key}`: {e}")));
                match key.trim() {
                    "seed" => meta.seed = Some(value.parse().map_err(|e| err(line, format!("metadata `seed`: {e}")))?),
                    "h" => meta.h = Some(value.parse().map_err(|e| err(line, format!("metadata `h`: {e}")))?),
                    "domain" => meta.domain = value.to_string(),
                    "drift" => meta.drift = value.to_string(),
                    "rng" => meta.rng = Some(value.to_string()),
                    "accepted" => (counts.accepted, has_counts) = (num(value)?, true),
                    "reflected" => (counts.reflected, has_counts) = (num(value)?, true),
                    "rejected" => (counts.rejected, has_counts) = (num(value)?, true),
                    _ => {}
                }
            }
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        let Some(cols) = &columns else {
            let names: Vec<String> = fields.iter().map(|f| f.to_ascii_lowercase()).collect();
            if names != ["step", "time", "x", "y", "on"] && names != ["time", "x", "y"] {
                return Err(err(
                    line,
                    format!("expected header `step,time,x,y,on` or `time,x,y`, got `{row}`"),
                ));
            }
            columns = Some(names);
            continue;
        };
        if fields.len() != cols.len() {
            return Err(err(line, format!("expected {} fields, got {}", cols.len(), fields.len())));
        }
        let full = cols.len() == 5;
        let off = usize::from(full);
        let float = |idx: usize| -> Result<f64> {
            let name = &cols[idx];
            let v: f64 = fields[idx]
                .parse()
                .map_err(|_| err(line, format!("`{name}` is not a number: `{}`", fields[idx])))?;
            if !v.is_finite() {
                return Err(err(line, format!("`{name}` must be finite, got `{}`", fields[idx])));
            }
            Ok(v)
        };
        let time = float(off)?;
        let p = Point2::new(float(off + 1)?, float(off + 2)?);
        if let Some(&prev) = traj.times.last() {
            if time < prev {
                return Err(err(line, format!("timestamp {time} is earlier than the previous {prev}")));
            }
        }
        let (step, on) = if full {
            let step = fields[0]
                .parse::<usize>()
                .map_err(|_| err(line, format!("`step` is not a non-negative integer: `{}`", fields[0])))?;
            let on = match fields[4] {
                "1" | "" => true,
                "0" => false,
                other => return Err(err(line, format!("`on` must be 0 or 1, got `{other}`"))),
            };
            (step, on)
        } else {
            (traj.len(), true)
        };
        traj.points.push(p);
        traj.times.push(time);
        traj.steps.push(step);
        traj.on_flags.push(on);
    }
    if columns.is_none() {
        return Err(Error::EmptyInput("track file has no header"));
    }
    if traj.is_empty() {
        return Err(Error::EmptyInput("track file has no rows"));
    }
    if has_counts {
        meta.counts = Some(counts);
    }
    traj.meta = meta;
    Ok(traj)
}

/// Uniform scaling and translation applied to a track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub offset: Point2,
    pub scale: f64,
}

impl Affine {
    pub fn apply(&self, p: Point2) -> Point2 {
        (p - self.offset) * self.scale
    }
}

/// Largest pairwise distance, found on the convex hull.
pub fn diameter(points: &[Point2]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            best = best.max(a.dist(*b));
        }
    }
    best
}

fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Translates the bounding-box minimum to the origin and scales the track
/// to unit diameter.
pub fn rescale_unit_diameter(traj: &Trajectory) -> Result<(Trajectory, Affine)> {
    let d = diameter(&traj.points);
    if !(d > 0.0) {
        return Err(Error::invalid("track", "all points coincide; cannot rescale"));
    }
    let offset = Point2::new(
        traj.points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
        traj.points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
    );
    let affine = Affine { offset, scale: 1.0 / d };
    let mut out = traj.clone();
    out.points.iter_mut().for_each(|p| *p = affine.apply(*p));
    Ok((out, affine))
}
