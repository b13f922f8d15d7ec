//! Standalone SVG rendering. Output is a pure function of the payload.

use std::fmt::Write as _;
use std::path::Path;

use crate::contour::Polyline;
use crate::density::DensityField;
use crate::geometry::{Point2, Rect};
use crate::simulator::Trajectory;
use crate::{Error, Result};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 10.0;
const ON_COLOR: &str = "black";
const OFF_COLOR: &str = "red";

#[derive(Debug, Clone, Copy)]
pub enum SvgPayload<'a> {
    /// Full path with ON/OFF flags; ON runs are drawn black, OFF runs red.
    Trajectory(&'a Trajectory),
    /// Boundary loops, closed loops as closed paths.
    Polylines(&'a [Polyline]),
    /// Cells shaded on a linear grayscale ramp, darker is denser.
    Density(&'a DensityField),
}

struct Frame {
    bbox: Rect,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(bbox: Rect) -> Self {
        let extent = bbox.width().max(bbox.height()).max(f64::MIN_POSITIVE);
        let scale = (WIDTH - 2.0 * MARGIN) / extent;
        Frame {
            bbox,
            scale,
            height: bbox.height() * scale + 2.0 * MARGIN,
        }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.bbox.min.x) * self.scale,
            self.height - MARGIN - (p.y - self.bbox.min.y) * self.scale,
        )
    }

    fn header(&self, out: &mut String) {
        let w = self.bbox.width() * self.scale + 2.0 * MARGIN;
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.2}\" height=\"{:.2}\" viewBox=\"0 0 {w:.2} {:.2}\">",
            self.height, self.height
        )
        .unwrap();
        writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    }
}

fn coords(frame: &Frame, points: &[Point2]) -> String {
    let mut s = String::new();
    for (k, p) in points.iter().enumerate() {
        let (x, y) = frame.map(*p);
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{x:.3},{y:.3}").unwrap();
    }
    s
}

/// Maximal runs `[start, end)` of equal ON flags.
pub fn flag_runs(flags: &[bool]) -> Vec<(usize, usize, bool)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=flags.len() {
        if i == flags.len() || flags[i] != flags[start] {
            runs.push((start, i, flags[start]));
            start = i;
        }
    }
    runs
}

pub fn render_svg(payload: SvgPayload<'_>) -> Result<String> {
    let mut out = String::new();
    match payload {
        SvgPayload::Trajectory(traj) => {
            let bbox = Rect::bounding(&traj.points).ok_or(Error::EmptyInput("trajectory"))?;
            let frame = Frame::new(bbox);
            frame.header(&mut out);
            for (start, end, on) in flag_runs(&traj.on_flags) {
                let color = if on { ON_COLOR } else { OFF_COLOR };
                writeln!(
                    out,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"0.5\" points=\"{}\"/>",
                    coords(&frame, &traj.points[start..end])
                )
                .unwrap();
            }
        }
        SvgPayload::Polylines(lines) => {
            let all: Vec<Point2> = lines.iter().flat_map(|l| l.points.iter().copied()).collect();
            let bbox = Rect::bounding(&all).ok_or(Error::EmptyInput("polylines"))?;
            let frame = Frame::new(bbox);
            frame.header(&mut out);
            for line in lines.iter().filter(|l| !l.points.is_empty()) {
                let mut d = String::new();
                for (k, p) in line.points.iter().enumerate() {
                    let (x, y) = frame.map(*p);
                    write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" }).unwrap();
                }
                if line.closed {
                    d.push('Z');
                }
                writeln!(
                    out,
                    "<path fill=\"none\" stroke=\"black\" stroke-width=\"1\" d=\"{}\"/>",
                    d.trim_end()
                )
                .unwrap();
            }
        }
        SvgPayload::Density(field) => {
            if field.values.is_empty() {
                return Err(Error::EmptyInput("density field"));
            }
            let g = &field.grid;
            let half = g.spacing / 2.0;
            let bbox = Rect::new(
                Point2::new(g.origin.x - half, g.origin.y - half),
                Point2::new(
                    g.origin.x + (g.nx as f64 - 0.5) * g.spacing,
                    g.origin.y + (g.ny as f64 - 0.5) * g.spacing,
                ),
            );
            let frame = Frame::new(bbox);
            frame.header(&mut out);
            let max = field.max();
            let side = g.spacing * frame.scale;
            for (idx, &v) in field.values.iter().enumerate() {
                if v <= 0.0 || max <= 0.0 {
                    continue;
                }
                let shade = (255.0 * (1.0 - v / max)).round() as u8;
                let c = g.center_of(idx);
                let (x, y) = frame.map(Point2::new(c.x - half, c.y + half));
                writeln!(
                    out,
                    "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{side:.3}\" height=\"{side:.3}\" fill=\"rgb({shade},{shade},{shade})\"/>"
                )
                .unwrap();
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_svg(payload: SvgPayload<'_>, path: &Path) -> Result<()> {
    let svg = render_svg(payload)?;
    std::fs::write(path, svg)?;
    Ok(())
}
