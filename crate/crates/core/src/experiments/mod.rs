//! Seeded replication harness: on-off versus contiguous observation of the
//! same simulated path, scored by Hausdorff distance and by distance in
//! measure of the r-convex hull, plus convergence and density trends.

mod trend;

pub use trend::{
    run_convergence_diagnostic, run_density_trend, ConvergenceConfig, ConvergencePoint, DensityTrendConfig,
    DensityTrendPoint,
};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, Grid2D, RegionMask, FINE_SPACING};
use crate::setestim::{
    directed_hausdorff, distance_in_measure, hausdorff, rconvex_hull, DiscreteSet, PointCloud,
    DEFAULT_R_SIMULATION,
};
use crate::simulator::{apply_schedule, prefix_window, simulate, OnOffSchedule, SimParams, RNG_NAME};
use crate::{Error, Result};

/// Largest tolerated fraction of failed replicates.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Cartesian grid of configurations `(h, delta1, delta2)`, schedule lengths
/// in steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentGrid {
    pub h_values: Vec<f64>,
    pub delta1_steps: Vec<usize>,
    pub delta2_steps: Vec<usize>,
    pub n_steps: usize,
    pub reps: usize,
    pub r: f64,
    pub master_seed: u64,
    /// Raster spacing for the domain and the hulls.
    pub spacing: f64,
}

impl Default for ExperimentGrid {
    /// The full 27-cell grid with 50 replicates.
    fn default() -> Self {
        ExperimentGrid {
            h_values: vec![0.001, 0.002, 0.003],
            delta1_steps: vec![100, 250, 500],
            delta2_steps: vec![100, 250, 500],
            n_steps: 100_000,
            reps: 50,
            r: DEFAULT_R_SIMULATION,
            master_seed: 20_240_601,
            spacing: FINE_SPACING,
        }
    }
}

impl ExperimentGrid {
    /// Same cells, 10 replicates.
    pub fn desk() -> Self {
        ExperimentGrid {
            reps: 10,
            ..Self::default()
        }
    }

    /// One-cell grid.
    pub fn single(h: f64, delta1: usize, delta2: usize) -> Self {
        ExperimentGrid {
            h_values: vec![h],
            delta1_steps: vec![delta1],
            delta2_steps: vec![delta2],
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_values.is_empty() || self.delta1_steps.is_empty() || self.delta2_steps.is_empty() {
            return Err(Error::invalid("grid", "h, delta1 and delta2 lists must be non-empty"));
        }
        if let Some(h) = self.h_values.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::invalid("h", format!("must be positive, got {h}")));
        }
        if self.delta1_steps.contains(&0) {
            return Err(Error::invalid("delta1", "must be at least one step"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps", "must be at least 1"));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::invalid("r", format!("must be positive, got {}", self.r)));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be positive, got {}", self.spacing)));
        }
        for &d1 in &self.delta1_steps {
            if self.n_steps < d1 {
                return Err(Error::invalid(
                    "n_steps",
                    format!("{} steps cannot hold one ON window of {d1}", self.n_steps),
                ));
            }
        }
        Ok(())
    }

    /// Cells in row-major order `(h, delta1, delta2)`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &h in &self.h_values {
            for &delta1 in &self.delta1_steps {
                for &delta2 in &self.delta2_steps {
                    let sched = OnOffSchedule {
                        delta1_steps: delta1,
                        delta2_steps: delta2,
                    };
                    let p = sched.windows_within(self.n_steps);
                    out.push(Cell {
                        index: out.len(),
                        h,
                        delta1,
                        delta2,
                        p,
                        n_sim: sched.steps_for_windows(p),
                    });
                }
            }
        }
        out
    }
}

/// One configuration: `p` windows, simulated for exactly
/// `n_sim = p delta1 + (p - 1) delta2` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub h: f64,
    pub delta1: usize,
    pub delta2: usize,
    pub p: usize,
    pub n_sim: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `rep` of configuration `cell`.
pub fn replicate_seed(master_seed: u64, cell: usize, rep: usize) -> u64 {
    splitmix64(splitmix64(master_seed ^ splitmix64(cell as u64)) ^ rep as u64)
}

/// `(mean, median)`; the median of an even count averages the two middles.
pub fn summarize(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("values to summarize"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok((mean, median))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "dH_onoff")]
    DhOnoff,
    #[serde(rename = "dH_contiguous")]
    DhContiguous,
    #[serde(rename = "dmu_onoff")]
    DmuOnoff,
    #[serde(rename = "dmu_contiguous")]
    DmuContiguous,
    #[serde(rename = "gain_dH")]
    GainDh,
    #[serde(rename = "gain_dmu")]
    GainDmu,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::DhOnoff => "dH_onoff",
            Metric::DhContiguous => "dH_contiguous",
            Metric::DmuOnoff => "dmu_onoff",
            Metric::DmuContiguous => "dmu_contiguous",
            Metric::GainDh => "gain_dH",
            Metric::GainDmu => "gain_dmu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    /// Per-replicate values, `None` for failed replicates.
    pub values: Vec<Option<f64>>,
    pub failures: usize,
    /// Summaries over successful replicates (for gain tables, the gains).
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

impl CellResult {
    fn from_values(cell: Cell, values: Vec<Option<f64>>) -> Self {
        let ok: Vec<f64> = values.iter().flatten().copied().collect();
        let summary = summarize(&ok).ok();
        CellResult {
            cell,
            failures: values.len() - ok.len(),
            values,
            mean: summary.map(|s| s.0),
            median: summary.map(|s| s.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metric: Metric,
    pub cells: Vec<CellResult>,
}

impl ResultTable {
    pub fn cell(&self, h: f64, delta1: usize, delta2: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.cell.h == h && c.cell.delta1 == delta1 && c.cell.delta2 == delta2)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }
}

/// Per cell `1 - mean_onoff / mean_contiguous` (as `mean`) and
/// `1 - median_onoff / median_contiguous` (as `median`); undefined when a
/// denominator is zero or missing.
pub fn efficiency_gain(onoff: &ResultTable, contiguous: &ResultTable) -> Result<ResultTable> {
    if onoff.cells.len() != contiguous.cells.len()
        || onoff.cells.iter().zip(&contiguous.cells).any(|(a, b)| a.cell != b.cell)
    {
        return Err(Error::invalid("tables", "on-off and contiguous tables cover different cells"));
    }
    let metric = match onoff.metric {
        Metric::DhOnoff | Metric::DhContiguous => Metric::GainDh,
        _ => Metric::GainDmu,
    };
    let gain = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if b != 0.0 => Some(1.0 - a / b),
        _ => None,
    };
    let cells = onoff
        .cells
        .iter()
        .zip(&contiguous.cells)
        .map(|(a, b)| CellResult {
            cell: a.cell,
            values: Vec::new(),
            failures: a.failures + b.failures,
            mean: gain(a.mean, b.mean),
            median: gain(a.median, b.median),
        })
        .collect();
    Ok(ResultTable { metric, cells })
}

/// Rasters of the study domain shared by all replicates.
pub struct StudyTarget {
    pub domain: Domain,
    /// Domain cell centers at `spacing`, the reference set for `d_H`.
    pub reference: DiscreteSet,
    /// Common grid for hulls, the domain's box padded by `2 r`.
    pub hull_grid: Grid2D,
    pub domain_mask: RegionMask,
}

impl StudyTarget {
    pub fn new(domain: Domain, spacing: f64, r: f64) -> Result<Self> {
        let fine = Grid2D::covering(&domain.bbox, spacing, spacing)?;
        let reference = DiscreteSet::from_mask(&RegionMask::from_domain(&domain, fine))?;
        let hull_grid = Grid2D::covering(&domain.bbox, spacing, 2.0 * r)?;
        let domain_mask = RegionMask::from_domain(&domain, hull_grid);
        Ok(StudyTarget {
            domain,
            reference,
            hull_grid,
            domain_mask,
        })
    }

    pub fn study(spacing: f64, r: f64) -> Result<Self> {
        Self::new(Domain::ellipse_minus_disk(), spacing, r)
    }

    /// `d_H(points, S)` against the rasterised domain.
    pub fn hausdorff(&self, points: &[crate::geometry::Point2]) -> Result<f64> {
        let set = DiscreteSet::new(points.to_vec())?;
        Ok(hausdorff(&set, &self.reference))
    }

    /// `d_H(C_r(points), S)` through the hull's occupied cell centers.
    pub fn hull_hausdorff(&self, hull: &RegionMask) -> Result<f64> {
        let centers = DiscreteSet::from_mask(hull)?;
        Ok(directed_hausdorff(centers.points(), &self.reference)
            .max(directed_hausdorff(self.reference.points(), &centers)))
    }

    pub fn hull(&self, points: &[crate::geometry::Point2], r: f64) -> Result<RegionMask> {
        Ok(rconvex_hull(&PointCloud::new(points.to_vec())?, r, self.hull_grid)?.mask)
    }

    /// `d_mu(C_r(points), S)` on the common hull grid.
    pub fn hull_measure_distance(&self, points: &[crate::geometry::Point2], r: f64) -> Result<f64> {
        distance_in_measure(&self.hull(points, r)?, &self.domain_mask)
    }
}

/// Which metrics to compute per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSet {
    pub hausdorff: bool,
    pub measure: bool,
}

/// Raw values of one replicate: `[dH_onoff, dH_contiguous, dmu_onoff, dmu_contiguous]`.
type ReplicateValues = [Option<f64>; 4];

fn run_replicate(grid: &ExperimentGrid, cell: &Cell, seed: u64, target: &StudyTarget, which: MetricSet) -> Result<ReplicateValues> {
    let params = SimParams {
        domain: target.domain.clone(),
        ..SimParams::study(cell.h, cell.n_sim, seed)
    };
    let path = simulate(&params)?;
    let sched = OnOffSchedule::new(cell.delta1, cell.delta2)?;
    let onoff = apply_schedule(&path, &sched).points;
    let contiguous = prefix_window(&path, cell.p * cell.delta1)?.points;
    let mut out = [None; 4];
    if which.hausdorff {
        out[0] = Some(target.hausdorff(&onoff)?);
        out[1] = Some(target.hausdorff(&contiguous)?);
    }
    if which.measure {
        out[2] = Some(target.hull_measure_distance(&onoff, grid.r)?);
        out[3] = Some(target.hull_measure_distance(&contiguous, grid.r)?);
    }
    Ok(out)
}

/// Timing and seeds of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellManifest {
    pub cell: Cell,
    pub seeds: Vec<u64>,
    /// Sum of per-replicate compute times.
    pub compute_seconds: f64,
    pub failures: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub crate_version: String,
    pub rng: String,
    pub grid: ExperimentGrid,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub cells: Vec<CellManifest>,
}

/// All four raw tables of a run plus its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSet {
    pub tables: Vec<ResultTable>,
    pub manifest: RunManifest,
}

impl TableSet {
    pub fn get(&self, metric: Metric) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.metric == metric)
    }

    /// Tables followed by the gains derived from them.
    pub fn with_gains(&self) -> Result<Vec<ResultTable>> {
        let mut out = self.tables.clone();
        if let (Some(a), Some(b)) = (self.get(Metric::DhOnoff), self.get(Metric::DhContiguous)) {
            out.push(efficiency_gain(a, b)?);
        }
        if let (Some(a), Some(b)) = (self.get(Metric::DmuOnoff), self.get(Metric::DmuContiguous)) {
            out.push(efficiency_gain(a, b)?);
        }
        Ok(out)
    }
}

/// Runs every replicate of every cell. `progress(done, total)` is called
/// after each cell. Failed replicates are recorded; more than
/// [`MAX_FAILURE_RATE`] of them fails the run.
pub fn run_tables(
    grid: &ExperimentGrid,
    which: MetricSet,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<TableSet> {
    grid.validate()?;
    let started = Instant::now();
    let started_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let target = StudyTarget::study(grid.spacing, grid.r)?;
    let cells = grid.cells();

    let mut per_cell: Vec<(Vec<ReplicateValues>, Vec<bool>, f64)> = Vec::new();
    for (done, cell) in cells.iter().enumerate() {
        let runs: Vec<(Option<ReplicateValues>, f64)> = (0..grid.reps)
            .into_par_iter()
            .map(|k| {
                let t = Instant::now();
                let seed = replicate_seed(grid.master_seed, cell.index, k);
                let v = run_replicate(grid, cell, seed, &target, which).ok();
                (v, t.elapsed().as_secs_f64())
            })
            .collect();
        let failed = runs.iter().map(|(v, _)| v.is_none()).collect();
        let values = runs.iter().map(|(v, _)| v.unwrap_or([None; 4])).collect();
        let seconds = runs.iter().map(|(_, s)| s).sum();
        per_cell.push((values, failed, seconds));
        progress(done + 1, cells.len());
    }

    let failures: usize = per_cell.iter().map(|(_, f, _)| f.iter().filter(|&&x| x).count()).sum();
    let total = cells.len() * grid.reps;
    if failures as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(Error::TooManyFailures { failed: failures, total });
    }

    let metrics = [Metric::DhOnoff, Metric::DhContiguous, Metric::DmuOnoff, Metric::DmuContiguous];
    let wanted = |m: usize| if m < 2 { which.hausdorff } else { which.measure };
    let tables = (0..4)
        .filter(|&m| wanted(m))
        .map(|m| ResultTable {
            metric: metrics[m],
            cells: cells
                .iter()
                .zip(&per_cell)
                .map(|(cell, (values, _, _))| CellResult::from_values(*cell, values.iter().map(|v| v[m]).collect()))
                .collect(),
        })
        .collect();
    let manifest = RunManifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_NAME.to_string(),
        grid: grid.clone(),
        started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        cells: cells
            .iter()
            .zip(&per_cell)
            .map(|(cell, (_, failed, seconds))| CellManifest {
                cell: *cell,
                seeds: (0..grid.reps).map(|k| replicate_seed(grid.master_seed, cell.index, k)).collect(),
                compute_seconds: *seconds,
                failures: failed.iter().filter(|&&x| x).count(),
            })
            .collect(),
    };
    Ok(TableSet { tables, manifest })
}

/// On-off and contiguous Hausdorff tables.
pub fn run_hausdorff_tables(grid: &ExperimentGrid) -> Result<(ResultTable, ResultTable)> {
    let set = run_tables(
        grid,
        MetricSet {
            hausdorff: true,
            measure: false,
        },
        |_, _| {},
    )?;
    let mut t = set.tables.into_iter();
    Ok((t.next().expect("on-off table"), t.next().expect("contiguous table")))
}

/// On-off and contiguous distance-in-measure tables for the r-convex hulls.
pub fn run_measure_tables(grid: &ExperimentGrid) -> Result<(ResultTable, ResultTable)> {
    let set = run_tables(
        grid,
        MetricSet {
            hausdorff: false,
            measure: true,
        },
        |_, _| {},
    )?;
    let mut t = set.tables.into_iter();
    Ok((t.next().expect("on-off table"), t.next().expect("contiguous table")))
}

#[cfg(test)]
mod tests;
