//! Kernel density estimation, the closed-form stationary density of the
//! study case, level sets and the plug-in drift estimator
//! `nu_hat = grad(log g_hat) / 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::contour::polyline_hausdorff as contour_hausdorff;
use crate::contour::{isolines, Polyline};
use crate::geometry::{Domain, Grid2D, Point2, RegionMask};
use crate::simulator::Potential;
use crate::spatial::KdTree;
use crate::{Error, Result};

/// Default bandwidth.
pub const DEFAULT_BANDWIDTH: f64 = 0.2;
/// Gaussian contributions beyond this many bandwidths are dropped
/// (relative size below `1e-14`).
const GAUSSIAN_CUTOFF: f64 = 8.0;
/// Relative density floor below which the log-gradient is refused.
pub const DRIFT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::invalid("bandwidth", format!("must be positive, got {bandwidth}")));
        }
        Ok(KernelSpec { family, bandwidth })
    }

    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, bandwidth)
    }

    /// Kernel `K(u)` on the plane, integrating to one.
    pub fn kernel(&self, u: Point2) -> f64 {
        let r2 = u.norm_sq();
        match self.family {
            KernelFamily::Gaussian => (-0.5 * r2).exp() / (2.0 * std::f64::consts::PI),
            KernelFamily::Epanechnikov => {
                if r2 < 1.0 {
                    2.0 / std::f64::consts::PI * (1.0 - r2)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    True { potential: String, domain: String },
    Kde { n: usize, kernel: KernelSpec },
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl DensityField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid("values", format!("density values must be finite and non-negative, got {v}")));
        }
        Ok(DensityField {
            grid,
            values,
            provenance: Provenance::Other,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Riemann sum of the values.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest value over the occupied cells of `region` (the infimum of
    /// the density on the set it rasterises).
    pub fn min_over(&self, region: &RegionMask) -> Result<f64> {
        if region.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        self.values
            .iter()
            .zip(&region.cells)
            .filter(|(_, &c)| c)
            .map(|(&v, _)| v)
            .reduce(f64::min)
            .ok_or(Error::EmptyInput("region"))
    }

    /// Largest absolute difference over the occupied cells of `region`.
    pub fn sup_distance(&self, other: &DensityField, region: &RegionMask) -> Result<f64> {
        if other.grid != self.grid || region.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok((0..self.values.len())
            .filter(|&k| region.cells[k])
            .map(|k| (self.values[k] - other.values[k]).abs())
            .fold(0.0, f64::max))
    }
}

/// `g_hat(x) = (1 / (n h^2)) sum_i K((x - X_i) / h)` at every cell center.
pub fn kde(points: &[Point2], kernel: KernelSpec, grid: Grid2D) -> Result<DensityField> {
    if points.is_empty() {
        return Err(Error::EmptyInput("sample for density estimation"));
    }
    let h = kernel.bandwidth;
    let norm = 1.0 / (points.len() as f64 * h * h);
    let values = match kernel.family {
        KernelFamily::Gaussian => gaussian_kde(points, h, grid),
        KernelFamily::Epanechnikov => {
            let tree = KdTree::new(points);
            (0..grid.len())
                .into_par_iter()
                .map(|k| {
                    let c = grid.center_of(k);
                    let mut sum = 0.0;
                    tree.for_each_within(c, h, |_, p| sum += kernel.kernel((c - p) * (1.0 / h)));
                    sum
                })
                .collect()
        }
    };
    Ok(DensityField {
        grid,
        values: values.into_iter().map(|v| v * norm).collect(),
        provenance: Provenance::Kde {
            n: points.len(),
            kernel,
        },
    })
}

/// Unnormalised Gaussian sums using the product form
/// `K(u) = phi(u_x) phi(u_y)`: one row of the grid at a time, each point
/// contributes `phi_y` times its precomputed `phi_x` profile.
fn gaussian_kde(points: &[Point2], h: f64, grid: Grid2D) -> Vec<f64> {
    let reach = GAUSSIAN_CUTOFF * h;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let column_range = |x: f64| -> (usize, usize) {
        let lo = ((x - reach - grid.origin.x) / grid.spacing).ceil().max(0.0) as usize;
        let hi = (((x + reach - grid.origin.x) / grid.spacing).floor() + 1.0).clamp(0.0, grid.nx as f64) as usize;
        (lo.min(hi), hi)
    };
    let profiles: Vec<(usize, Vec<f64>)> = points
        .iter()
        .map(|p| {
            let (lo, hi) = column_range(p.x);
            let row = (lo..hi)
                .map(|i| phi((grid.origin.x + i as f64 * grid.spacing - p.x) / h))
                .collect();
            (lo, row)
        })
        .collect();
    let mut values = vec![0.0; grid.len()];
    values
        .par_chunks_mut(grid.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = grid.origin.y + j as f64 * grid.spacing;
            for (p, (lo, profile)) in points.iter().zip(&profiles) {
                let dy = (y - p.y) / h;
                if dy.abs() > GAUSSIAN_CUTOFF {
                    continue;
                }
                let wy = phi(dy);
                for (v, wx) in row[*lo..*lo + profile.len()].iter_mut().zip(profile) {
                    *v += wy * wx;
                }
            }
        });
    values
}

/// `e^{-f} 1_S / c` with `c` the Riemann sum of `e^{-f} 1_S` over the grid.
pub fn true_density(domain: &Domain, potential: &Potential, grid: Grid2D) -> Result<DensityField> {
    let raw: Vec<f64> = grid
        .centers()
        .map(|p| if domain.contains(p) { (-potential.value(p)).exp() } else { 0.0 })
        .collect();
    let c = raw.iter().sum::<f64>() * grid.cell_area();
    if !(c > 0.0) {
        return Err(Error::invalid("domain", "no cell center of the grid lies inside the domain"));
    }
    Ok(DensityField {
        grid,
        values: raw.into_iter().map(|v| v / c).collect(),
        provenance: Provenance::True {
            potential: potential.name(),
            domain: domain.name.clone(),
        },
    })
}

/// Cells of `{field > lambda}`.
pub fn level_set_mask(field: &DensityField, lambda: f64) -> RegionMask {
    RegionMask {
        grid: field.grid,
        cells: field.values.iter().map(|&v| v > lambda).collect(),
    }
}

/// Closed polylines approximating the boundary of `{field > lambda}`.
pub fn level_set_contours(field: &DensityField, lambda: f64) -> Result<Vec<Polyline>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
    }
    Ok(isolines(&field.grid, &field.values, lambda, 0.0))
}

/// Level `lambda` whose superlevel set `{field > lambda}` carries (just
/// above) `mass` of the field's total mass.
pub fn mass_level(field: &DensityField, mass: f64) -> Result<f64> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::invalid("mass", format!("must lie in (0, 1), got {mass}")));
    }
    let mut sorted: Vec<f64> = field.values.iter().copied().filter(|&v| v > 0.0).collect();
    if sorted.is_empty() {
        return Err(Error::EmptyInput("density field"));
    }
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    let mut acc = 0.0;
    for w in sorted.windows(2) {
        acc += w[0];
        if acc >= mass * total {
            return Ok(w[1]);
        }
    }
    Ok(0.0)
}

/// `grad(log field) / 2` at `point`: central differences of the log values
/// at the four cell centers around `point`, bilinearly interpolated.
pub fn drift_estimate(field: &DensityField, point: Point2) -> Result<Point2> {
    let g = field.grid;
    let u = (point.x - g.origin.x) / g.spacing;
    let v = (point.y - g.origin.y) / g.spacing;
    let (i0, j0) = (u.floor(), v.floor());
    // the four interpolation nodes need a full stencil each
    if !(i0 >= 1.0 && j0 >= 1.0 && i0 + 2.0 < g.nx as f64 && j0 + 2.0 < g.ny as f64) {
        return Err(Error::invalid(
            "point",
            format!("({}, {}) is too close to the grid edge for drift estimation", point.x, point.y),
        ));
    }
    let (i0, j0) = (i0 as usize, j0 as usize);
    let (fu, fv) = (u - i0 as f64, v - j0 as f64);
    let floor = DRIFT_FLOOR * field.max();
    let log_at = |i: usize, j: usize| -> Result<f64> {
        let val = field.get(i, j);
        if val <= floor {
            return Err(Error::DensityTooSmall { x: point.x, y: point.y });
        }
        Ok(val.ln())
    };
    let grad_at = |i: usize, j: usize| -> Result<Point2> {
        let gx = (log_at(i + 1, j)? - log_at(i - 1, j)?) / (2.0 * g.spacing);
        let gy = (log_at(i, j + 1)? - log_at(i, j - 1)?) / (2.0 * g.spacing);
        Ok(Point2::new(gx, gy))
    };
    let grad = grad_at(i0, j0)? * ((1.0 - fu) * (1.0 - fv))
        + grad_at(i0 + 1, j0)? * (fu * (1.0 - fv))
        + grad_at(i0, j0 + 1)? * ((1.0 - fu) * fv)
        + grad_at(i0 + 1, j0 + 1)? * (fu * fv);
    Ok(grad * 0.5)
}

#[cfg(test)]
mod tests;
