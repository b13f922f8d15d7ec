//! Trends in the observation length: `d_H` and `d_mu` against `T`, and
//! density/level-set accuracy against the number of window endpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replicate_seed, summarize, StudyTarget};
use crate::bounds::rate_curve;
use crate::density::{contour_hausdorff, kde, level_set_contours, mass_level, true_density, KernelSpec};
use crate::geometry::{inner_parallel_set, Grid2D, COARSE_SPACING};
use crate::setestim::{distance_in_measure, DEFAULT_R_SIMULATION};
use crate::simulator::{endpoint_subsample, simulate, OnOffSchedule, Potential, SimParams};
use crate::{Error, Result};

fn median(values: &[f64]) -> Result<f64> {
    summarize(values).map(|s| s.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub h: f64,
    pub delta1: usize,
    pub delta2: usize,
    pub r: f64,
    pub spacing: f64,
    pub master_seed: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            h: 0.01,
            delta1: 250,
            delta2: 500,
            r: DEFAULT_R_SIMULATION,
            spacing: 0.01,
            master_seed: 7,
        }
    }
}

/// Replicate values and medians at one observation length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub t_steps: usize,
    pub time: f64,
    pub dh_points: Vec<f64>,
    pub dh_hull: Vec<f64>,
    pub dmu_hull: Vec<f64>,
    pub median_dh_points: f64,
    pub median_dh_hull: f64,
    pub median_dmu_hull: f64,
    /// `(log(T)^2 / T)^(1/2)` at `T = time`, when `time > 1`.
    pub rate: Option<f64>,
}

/// For each replicate one path of `max(t_steps)` steps is simulated; the
/// ON points among its first `T` steps are scored for every `T`.
pub fn run_convergence_diagnostic(
    t_steps: &[usize],
    reps: usize,
    config: &ConvergenceConfig,
) -> Result<Vec<ConvergencePoint>> {
    if t_steps.is_empty() || t_steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("T", "observation lengths must be non-empty and increasing"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    let sched = OnOffSchedule::new(config.delta1, config.delta2)?;
    let target = StudyTarget::study(config.spacing, config.r)?;
    let t_max = *t_steps.last().expect("non-empty");

    // rows: replicate, columns: T, entries: (dH points, dH hull, dmu hull)
    let rows: Vec<Vec<(f64, f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|k| -> Result<Vec<(f64, f64, f64)>> {
            let path = simulate(&SimParams::study(config.h, t_max, replicate_seed(config.master_seed, 0, k)))?;
            t_steps
                .iter()
                .map(|&t| {
                    let on: Vec<_> = (0..t).filter(|&i| sched.is_on(i)).map(|i| path.points[i]).collect();
                    let hull = target.hull(&on, config.r)?;
                    Ok((
                        target.hausdorff(&on)?,
                        target.hull_hausdorff(&hull)?,
                        distance_in_measure(&hull, &target.domain_mask)?,
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    t_steps
        .iter()
        .enumerate()
        .map(|(c, &t)| {
            let dh_points: Vec<f64> = rows.iter().map(|r| r[c].0).collect();
            let dh_hull: Vec<f64> = rows.iter().map(|r| r[c].1).collect();
            let dmu_hull: Vec<f64> = rows.iter().map(|r| r[c].2).collect();
            let time = t as f64 * config.h;
            Ok(ConvergencePoint {
                t_steps: t,
                time,
                median_dh_points: median(&dh_points)?,
                median_dh_hull: median(&dh_hull)?,
                median_dmu_hull: median(&dmu_hull)?,
                dh_points,
                dh_hull,
                dmu_hull,
                rate: (time > 1.0).then(|| rate_curve(&[time], 2).map(|v| v[0])).transpose()?,
            })
        })
        .collect()
}

/// Density estimation from the window endpoints of on-off paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrendConfig {
    pub h: f64,
    pub delta1: usize,
    pub delta2: usize,
    /// Bandwidth at `n = n_ref`.
    pub bandwidth: f64,
    /// Bandwidth shrinks like `(n / n_ref)^(-bandwidth_exponent)`.
    pub bandwidth_exponent: f64,
    pub n_ref: usize,
    /// Probability mass of the compared superlevel set.
    pub level_mass: f64,
    /// Distance from the boundary of the region where sup errors are taken.
    pub interior_margin: f64,
    pub spacing: f64,
    pub master_seed: u64,
}

impl Default for DensityTrendConfig {
    fn default() -> Self {
        DensityTrendConfig {
            h: 0.01,
            delta1: 50,
            delta2: 50,
            bandwidth: 0.2,
            bandwidth_exponent: 1.0 / 6.0,
            n_ref: 500,
            level_mass: 0.2,
            interior_margin: 0.4,
            spacing: COARSE_SPACING,
            master_seed: 11,
        }
    }
}

impl DensityTrendConfig {
    pub fn bandwidth_for(&self, n: usize) -> f64 {
        self.bandwidth * (n as f64 / self.n_ref as f64).powf(-self.bandwidth_exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrendPoint {
    pub n: usize,
    pub bandwidth: f64,
    /// Hausdorff distance between the true and estimated level-set contours.
    pub contour_dh: Vec<f64>,
    /// Sup-norm density error away from the boundary.
    pub sup_error: Vec<f64>,
    pub median_contour_dh: f64,
    pub median_sup_error: f64,
}

/// For each `n` and replicate, simulates `n` ON windows, estimates the
/// density from the window endpoints and compares it with the true one.
pub fn run_density_trend(ns: &[usize], reps: usize, config: &DensityTrendConfig) -> Result<Vec<DensityTrendPoint>> {
    if ns.is_empty() || ns.contains(&0) || reps == 0 {
        return Err(Error::invalid("n", "need at least one positive sample size and one replicate"));
    }
    let domain = crate::geometry::Domain::ellipse_minus_disk();
    let grid = Grid2D::covering(&domain.bbox, config.spacing, 1.0)?;
    let truth = true_density(&domain, &Potential::study(), grid)?;
    let lambda = mass_level(&truth, config.level_mass)?;
    let true_contours = level_set_contours(&truth, lambda)?;
    let interior = inner_parallel_set(&domain, config.interior_margin, grid)?.mask;
    let sched = OnOffSchedule::new(config.delta1, config.delta2)?;

    ns.iter()
        .enumerate()
        .map(|(c, &n)| {
            let bandwidth = config.bandwidth_for(n);
            let kernel = KernelSpec::gaussian(bandwidth)?;
            let scores: Vec<(f64, f64)> = (0..reps)
                .into_par_iter()
                .map(|k| -> Result<(f64, f64)> {
                    let seed = replicate_seed(config.master_seed, c, k);
                    let path = simulate(&SimParams::study(config.h, sched.steps_for_windows(n), seed))?;
                    let sample = endpoint_subsample(&path, &sched, n)?;
                    let est = kde(&sample, kernel, grid)?;
                    let contours = level_set_contours(&est, lambda)?;
                    let dh = if contours.is_empty() {
                        f64::INFINITY
                    } else {
                        contour_hausdorff(&true_contours, &contours)?
                    };
                    Ok((dh, est.sup_distance(&truth, &interior)?))
                })
                .collect::<Result<_>>()?;
            let contour_dh: Vec<f64> = scores.iter().map(|s| s.0).collect();
            let sup_error: Vec<f64> = scores.iter().map(|s| s.1).collect();
            Ok(DensityTrendPoint {
                n,
                bandwidth,
                median_contour_dh: median(&contour_dh)?,
                median_sup_error: median(&sup_error)?,
                contour_dh,
                sup_error,
            })
        })
        .collect()
}
