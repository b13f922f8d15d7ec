use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::domain::{Domain, Rect};
use super::point::Point2;
use crate::{Error, Result};

/// Regular lattice of square cells addressed by their centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    /// Center of cell (0, 0), the lower-left cell.
    pub origin: Point2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(origin: Point2, spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("grid", "nx and ny must be at least 1"));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("origin", "must be finite"));
        }
        Ok(Grid2D { origin, spacing, nx, ny })
    }

    /// Smallest grid whose cell centers sit on integer multiples of `spacing`
    /// and whose cells cover `rect` dilated by `pad`.
    pub fn covering(rect: &Rect, spacing: f64, pad: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        let r = rect.dilate(pad.max(0.0));
        let i0 = (r.min.x / spacing).floor();
        let j0 = (r.min.y / spacing).floor();
        let i1 = (r.max.x / spacing).ceil();
        let j1 = (r.max.y / spacing).ceil();
        let nx = (i1 - i0) as usize + 1;
        let ny = (j1 - j0) as usize + 1;
        Grid2D::new(Point2::new(i0 * spacing, j0 * spacing), spacing, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x + i as f64 * self.spacing,
            self.origin.y + j as f64 * self.spacing,
        )
    }

    pub fn center_of(&self, idx: usize) -> Point2 {
        let (i, j) = self.coords(idx);
        self.center(i, j)
    }

    /// Cell whose square contains `p` (nearest center), if inside the grid.
    pub fn cell_of(&self, p: Point2) -> Option<(usize, usize)> {
        let fi = ((p.x - self.origin.x) / self.spacing).round();
        let fj = ((p.y - self.origin.y) / self.spacing).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Extent of the cells (not the centers).
    pub fn extent(&self) -> Rect {
        let h = 0.5 * self.spacing;
        Rect::new(
            Point2::new(self.origin.x - h, self.origin.y - h),
            Point2::new(
                self.origin.x + (self.nx as f64 - 0.5) * self.spacing,
                self.origin.y + (self.ny as f64 - 0.5) * self.spacing,
            ),
        )
    }

    pub fn covers(&self, rect: &Rect) -> bool {
        let e = self.extent();
        e.min.x <= rect.min.x && e.min.y <= rect.min.y && e.max.x >= rect.max.x && e.max.y >= rect.max.y
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn centers(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.len()).map(move |idx| self.center_of(idx))
    }

    /// The same grid translated by `v`.
    pub fn translated(&self, v: Point2) -> Grid2D {
        Grid2D {
            origin: self.origin + v,
            ..*self
        }
    }
}

/// Occupancy bitmap over a [`Grid2D`]; a cell is in the set iff its center is.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub grid: Grid2D,
    pub cells: Vec<bool>,
}

impl RegionMask {
    pub fn empty(grid: Grid2D) -> Self {
        RegionMask {
            grid,
            cells: vec![false; grid.len()],
        }
    }

    pub fn full(grid: Grid2D) -> Self {
        RegionMask {
            grid,
            cells: vec![true; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(Point2) -> bool) -> Self {
        let cells = (0..grid.len()).map(|idx| f(grid.center_of(idx))).collect();
        RegionMask { grid, cells }
    }

    /// Cell-center rasterisation of a domain.
    pub fn from_domain(domain: &Domain, grid: Grid2D) -> Self {
        RegionMask::from_fn(grid, |p| domain.contains(p))
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let idx = self.grid.index(i, j);
        self.cells[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// Lebesgue measure: occupied cells times the cell area.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_area()
    }

    fn zip_with(&self, other: &RegionMask, op: impl Fn(bool, bool) -> bool) -> Result<RegionMask> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(RegionMask {
            grid: self.grid,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &RegionMask) -> Result<RegionMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &RegionMask) -> Result<RegionMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &RegionMask) -> Result<RegionMask> {
        self.zip_with(other, |a, b| a != b)
    }

    pub fn complement(&self) -> RegionMask {
        RegionMask {
            grid: self.grid,
            cells: self.cells.iter().map(|&c| !c).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn occupied_centers(&self) -> Vec<Point2> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(idx, _)| self.grid.center_of(idx))
            .collect()
    }

    /// Portable text bitmap: a `grid x0 y0 spacing nx ny` header followed by
    /// `ny` rows of `nx` characters in `{0,1}`; the first row is `j = 0`.
    pub fn to_bitmap_string(&self) -> String {
        let g = &self.grid;
        let mut out = String::with_capacity(g.len() + g.ny + 64);
        let _ = writeln!(
            out,
            "grid {:e} {:e} {:e} {} {}",
            g.origin.x, g.origin.y, g.spacing, g.nx, g.ny
        );
        for j in 0..g.ny {
            for i in 0..g.nx {
                out.push(if self.get(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_bitmap_str(text: &str) -> Result<RegionMask> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("bitmap: missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "grid" {
            return Err(Error::Config(format!("bitmap: bad header `{header}`")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bitmap: bad number `{s}`")))
        };
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Config(format!("bitmap: bad count `{s}`")))
        };
        let grid = Grid2D::new(
            Point2::new(num(fields[1])?, num(fields[2])?),
            num(fields[3])?,
            count(fields[4])?,
            count(fields[5])?,
        )?;
        let mut mask = RegionMask::empty(grid);
        let mut rows = 0;
        for (j, line) in lines.enumerate() {
            if j >= grid.ny {
                return Err(Error::Config("bitmap: too many rows".into()));
            }
            let bytes = line.trim_end().as_bytes();
            if bytes.len() != grid.nx {
                return Err(Error::Config(format!("bitmap: row {j} has {} cells", bytes.len())));
            }
            for (i, &b) in bytes.iter().enumerate() {
                match b {
                    b'0' => {}
                    b'1' => mask.set(i, j, true),
                    _ => return Err(Error::Config(format!("bitmap: bad cell in row {j}"))),
                }
            }
            rows += 1;
        }
        if rows != grid.ny {
            return Err(Error::Config(format!("bitmap: expected {} rows, found {rows}", grid.ny)));
        }
        Ok(mask)
    }
}

/// Exact squared Euclidean distance transform on a `nx x ny` lattice, in
/// units of cells. Entry `k` holds the squared distance from cell `k` to the
/// nearest cell with `sources[k] == true` (infinity when there is none).
pub fn squared_distance_transform(nx: usize, ny: usize, sources: &[bool]) -> Vec<f64> {
    assert_eq!(sources.len(), nx * ny);
    let mut field: Vec<f64> = sources
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();
    let mut buf = vec![0.0; nx.max(ny)];
    let mut out = vec![0.0; nx.max(ny)];
    let mut v = vec![0usize; nx.max(ny)];
    let mut z = vec![0.0; nx.max(ny) + 1];

    for i in 0..nx {
        for j in 0..ny {
            buf[j] = field[j * nx + i];
        }
        lower_envelope(&buf[..ny], &mut out[..ny], &mut v, &mut z);
        for j in 0..ny {
            field[j * nx + i] = out[j];
        }
    }
    for j in 0..ny {
        let row = &mut field[j * nx..(j + 1) * nx];
        buf[..nx].copy_from_slice(row);
        lower_envelope(&buf[..nx], &mut out[..nx], &mut v, &mut z);
        row.copy_from_slice(&out[..nx]);
    }
    field
}

/// One-dimensional pass of the Felzenszwalb-Huttenlocher transform.
fn lower_envelope(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        d.fill(f64::INFINITY);
        return;
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in (first + 1)..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let p = v[k];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *dq = (qf - p) * (qf - p) + f[v[k]];
    }
}

/// Euclidean distance, in length units, from every cell center of `grid`
/// to the nearest cell center flagged in `sources`.
pub fn distance_to_cells(grid: &Grid2D, sources: &[bool]) -> Vec<f64> {
    squared_distance_transform(grid.nx, grid.ny, sources)
        .into_iter()
        .map(|d2| d2.sqrt() * grid.spacing)
        .collect()
}

/// Result of [`inner_parallel_set`]; `is_empty` flags an epsilon larger than
/// the domain's inradius at this resolution.
#[derive(Debug, Clone)]
pub struct ParallelSet {
    pub mask: RegionMask,
    pub is_empty: bool,
}

/// Cells whose center `x` satisfies `B(x, eps) ⊂ S`, with the distance to
/// the complement taken from a distance transform of the rasterised domain.
/// Everything outside the grid counts as complement.
pub fn inner_parallel_set(domain: &Domain, eps: f64, grid: Grid2D) -> Result<ParallelSet> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be positive, got {eps}")));
    }
    let inside = RegionMask::from_domain(domain, grid);
    // one-cell frame of complement around the grid
    let (px, py) = (grid.nx + 2, grid.ny + 2);
    let mut sources = vec![true; px * py];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            sources[(j + 1) * px + i + 1] = !inside.get(i, j);
        }
    }
    let d2 = squared_distance_transform(px, py, &sources);
    let s = grid.spacing;
    let mut mask = RegionMask::empty(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !inside.get(i, j) {
                continue;
            }
            // nearest complement center sits about half a cell past the boundary
            let to_boundary = d2[(j + 1) * px + i + 1].sqrt() * s - 0.5 * s;
            if to_boundary >= eps {
                mask.set(i, j, true);
            }
        }
    }
    let is_empty = mask.is_empty();
    Ok(ParallelSet { mask, is_empty })
}

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(d: u32) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Upper bound `(eps/4)^(-d) mu_S / omega_d` on the `eps/2`-covering number
/// of the inner parallel set.
pub fn covering_number_bound(eps: f64, mu_s: f64, d: u32) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", "must be positive"));
    }
    if !(mu_s > 0.0 && mu_s.is_finite()) {
        return Err(Error::invalid("mu_S", "must be positive"));
    }
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    Ok((eps / 4.0).powi(-(d as i32)) * mu_s / unit_ball_volume(d))
}
