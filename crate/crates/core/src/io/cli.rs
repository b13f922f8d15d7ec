//! Command-line front end. Every subcommand reads the run configuration,
//! applies flag overrides, writes its outputs under the output directory and
//! prints a one-line summary.
//!
//! Exit status: 0 on success, 1 on invalid input or usage, 2 on runtime
//! failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::config::RunConfig;
use super::svg::{flag_runs, write_svg, SvgPayload};
use super::table::{density_csv, level_sets_csv, polylines_csv, table_csv, table_json};
use super::track::{read_trajectory, rescale_unit_diameter, write_trajectory, Affine};
use crate::bounds::{advise_schedule, bound_report, ErgodicityParams};
use crate::density::{drift_estimate, kde, level_set_contours, mass_level, true_density, DensityField};
use crate::experiments::{run_tables, ExperimentGrid, MetricSet, StudyTarget};
use crate::geometry::{Grid2D, Point2, Rect};
use crate::setestim::{rconvex_hull, PointCloud};
use crate::simulator::{simulate, Trajectory};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "homerange", version, about = "Home-range estimation from on-off observed trajectories")]
pub struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Simulation seed; for `experiment`, the master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: $HOMERANGE_OUT, then `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replicates per cell (`experiment` only).
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Number of simulation steps.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Where the point set comes from: a track file, or a fresh simulation.
#[derive(Debug, Args)]
pub struct Source {
    /// Track CSV (`step,time,x,y,on` or `time,x,y`); overrides the config.
    #[arg(long)]
    pub track: Option<PathBuf>,
    /// Rescale the track to unit diameter first.
    #[arg(long)]
    pub rescale: bool,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub source: Source,
    /// Kernel bandwidth.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Use the true stationary density of the configured domain and drift.
    #[arg(long = "true")]
    pub truth: bool,
    /// Estimate from the last point of each ON run only.
    #[arg(long)]
    pub endpoints: bool,
}

#[derive(Debug, Args)]
pub struct ErgodicityArgs {
    /// Mixing rate in `beta * exp(-alpha * t)`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Mixing constant in `beta * exp(-alpha * t)`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Lower bound of the stationary density on the domain.
    #[arg(long = "c")]
    pub c_inf: Option<f64>,
    /// Area of the domain.
    #[arg(long = "muS")]
    pub mu_s: Option<f64>,
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Hausdorff,
    Measure,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a trajectory and flag it with the on-off schedule.
    Simulate,
    /// Apply the on-off schedule to a track and write the ON subsequence.
    Schedule {
        #[command(flatten)]
        source: Source,
    },
    /// r-convex hull of the ON points.
    Hull {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        spacing: Option<f64>,
    },
    /// Hausdorff distance and distance in measure to the configured domain.
    Distances {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        spacing: Option<f64>,
    },
    /// Kernel density estimate on a grid.
    Density(DensityArgs),
    /// Level-set contours of the density.
    Levelsets {
        #[command(flatten)]
        density: DensityArgs,
        /// Absolute levels (repeatable).
        #[arg(long)]
        level: Vec<f64>,
        /// Probability masses (repeatable).
        #[arg(long)]
        mass: Vec<f64>,
    },
    /// Plug-in drift estimate `grad log g / 2` at probe points.
    Drift {
        #[command(flatten)]
        density: DensityArgs,
        /// Probe point `x,y` (repeatable).
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Vec<Point2>,
    },
    /// Probability bounds for contiguous and on-off observation.
    Bounds {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: Option<f64>,
        #[command(flatten)]
        params: ErgodicityArgs,
    },
    /// Split a battery budget into ON windows.
    Advise {
        #[arg(long)]
        battery: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1_000_000)]
        p_max: u64,
        #[arg(long)]
        delta2: Option<f64>,
        #[command(flatten)]
        params: ErgodicityArgs,
    },
    /// Replicated simulation tables.
    Experiment {
        #[arg(long, value_enum, default_value_t = TableKind::Both)]
        table: TableKind,
        /// Full 27-cell grid with 50 replicates instead of the configured grid.
        #[arg(long)]
        full: bool,
    },
    /// Validate a track and write it back in canonical form.
    Ingest {
        #[command(flatten)]
        source: Source,
    },
}

fn parse_point(s: &str) -> std::result::Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in `{s}`: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in `{s}`: {e}"))?;
    Ok(Point2::new(x, y))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("HOMERANGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("HOMERANGE_THREADS must be a positive integer, got `{v}`")))?;
    // a second call in the same process keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

struct Context {
    config: RunConfig,
    out: PathBuf,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.simulation.seed = seed;
        }
        if let Some(steps) = cli.steps {
            config.simulation.n_steps = steps;
        }
        if let Command::Experiment { full, .. } = cli.command {
            if full {
                config.experiment = ExperimentGrid::default();
            }
            if let Some(seed) = cli.seed {
                config.experiment.master_seed = seed;
            }
            if let Some(steps) = cli.steps {
                config.experiment.n_steps = steps;
            }
            if let Some(reps) = cli.reps {
                config.experiment.reps = reps;
            }
        }
        config.validate()?;
        let out = cli
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .or_else(|| std::env::var_os("HOMERANGE_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Context { config, out })
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path(name)?;
        std::fs::write(&p, contents)?;
        Ok(p)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    /// Track from `--track` or the config, else a simulated path flagged by
    /// the schedule. The second value is the rescaling applied, if any.
    fn trajectory(&self, source: &Source) -> Result<(Trajectory, Option<Affine>)> {
        let track = source.track.clone().or_else(|| self.config.track.clone());
        let traj = match track {
            Some(p) => read_trajectory(&p)?,
            None => simulate(&self.config.sim_params())?.with_schedule(&self.config.on_off()?),
        };
        if source.rescale {
            let (t, a) = rescale_unit_diameter(&traj)?;
            Ok((t, Some(a)))
        } else {
            Ok((traj, None))
        }
    }

    fn density(&self, args: &DensityArgs) -> Result<(DensityField, usize)> {
        let est = &self.config.estimator;
        let spacing = args.spacing.unwrap_or(est.spacing);
        if args.truth {
            let potential = self
                .config
                .simulation
                .drift
                .potential()
                .ok_or_else(|| Error::Config("the configured drift has no potential".into()))?;
            let grid = Grid2D::covering(&self.config.domain.bbox, spacing, spacing)?;
            return Ok((true_density(&self.config.domain, &potential, grid)?, 0));
        }
        let (traj, _) = self.trajectory(&args.source)?;
        let points = if args.endpoints {
            flag_runs(&traj.on_flags)
                .into_iter()
                .filter(|r| r.2)
                .map(|(_, end, _)| traj.points[end - 1])
                .collect()
        } else {
            traj.on_points()
        };
        if points.is_empty() {
            return Err(Error::EmptyInput("no ON points"));
        }
        let mut kernel = est.kernel_spec()?;
        if let Some(b) = args.bandwidth {
            kernel = crate::density::KernelSpec::new(kernel.family, b)?;
        }
        let bbox = Rect::bounding(&points).ok_or(Error::EmptyInput("points"))?;
        let grid = Grid2D::covering(&bbox, spacing, 3.0 * kernel.bandwidth)?;
        Ok((kde(&points, kernel, grid)?, points.len()))
    }
}

#[derive(Serialize)]
struct HullSummary {
    r: f64,
    spacing: f64,
    n_points: usize,
    area: f64,
    loops: usize,
    rescale: Option<Affine>,
}

#[derive(Serialize)]
struct DistanceSummary {
    r: f64,
    spacing: f64,
    n_points: usize,
    hausdorff_points: f64,
    hausdorff_hull: f64,
    measure_hull: f64,
}

#[derive(Serialize)]
struct DriftRow {
    x: f64,
    y: f64,
    drift: Option<[f64; 2]>,
    error: Option<String>,
}

fn ergodicity(args: &ErgodicityArgs, config: &RunConfig) -> Result<ErgodicityParams> {
    let base = config.bounds;
    let pick = |flag: Option<f64>, from: Option<f64>, name: &'static str| {
        flag.or(from)
            .ok_or_else(|| Error::invalid(name, "required (flag or `bounds` config section)"))
    };
    ErgodicityParams::new(
        pick(args.alpha, base.map(|b| b.alpha), "alpha")?,
        pick(args.beta, base.map(|b| b.beta), "beta")?,
        pick(args.c_inf, base.map(|b| b.c_inf), "c")?,
        pick(args.mu_s, base.map(|b| b.mu_s), "muS")?,
        args.d,
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

pub fn run(cli: &Cli) -> Result<String> {
    let ctx = Context::new(cli)?;
    let cfg = &ctx.config;
    match &cli.command {
        Command::Simulate => {
            let params = cfg.sim_params();
            let traj = simulate(&params)?.with_schedule(&cfg.on_off()?);
            let csv = ctx.path("trajectory.csv")?;
            write_trajectory(&traj, &csv)?;
            ctx.write_json("manifest.json", &serde_json::json!({
                "crate_version": env!("CARGO_PKG_VERSION"),
                "simulation": params,
                "schedule": cfg.schedule,
                "meta": traj.meta,
                "output": "trajectory.csv",
            }))?;
            write_svg(SvgPayload::Trajectory(&traj), &ctx.path("trajectory.svg")?)?;
            let rej = traj.meta.counts.as_ref().map_or(0.0, |c| c.rejection_rate());
            Ok(format!(
                "simulated {} steps (seed {}, h {}, rejection rate {rej:.4}) -> {}",
                traj.len(),
                params.seed,
                params.h,
                csv.display()
            ))
        }
        Command::Schedule { source } => {
            let (traj, _) = ctx.trajectory(source)?;
            let sched = cfg.on_off()?;
            let flagged = traj.with_schedule(&sched);
            let on = crate::simulator::apply_schedule(&traj, &sched);
            write_trajectory(&flagged, &ctx.path("scheduled.csv")?)?;
            let p = ctx.path("on_points.csv")?;
            write_trajectory(&on, &p)?;
            write_svg(SvgPayload::Trajectory(&flagged), &ctx.path("scheduled.svg")?)?;
            Ok(format!(
                "schedule {}/{}: kept {} of {} points -> {}",
                sched.delta1_steps,
                sched.delta2_steps,
                on.len(),
                traj.len(),
                p.display()
            ))
        }
        Command::Hull { source, r, spacing } => {
            let (traj, affine) = ctx.trajectory(source)?;
            let r = r.unwrap_or(cfg.estimator.r);
            let spacing = spacing.unwrap_or(cfg.estimator.spacing.min(r / 4.0));
            let cloud = PointCloud::new(traj.on_points())?;
            let grid = Grid2D::covering(&cloud.bbox(), spacing, r)?;
            let hull = rconvex_hull(&cloud, r, grid)?;
            let p = ctx.write("hull_boundary.csv", &polylines_csv(&hull.boundary))?;
            if !hull.boundary.is_empty() {
                write_svg(SvgPayload::Polylines(&hull.boundary), &ctx.path("hull.svg")?)?;
            }
            let summary = HullSummary {
                r,
                spacing,
                n_points: cloud.len(),
                area: hull.mask.measure(),
                loops: hull.boundary.len(),
                rescale: affine,
            };
            ctx.write_json("hull.json", &summary)?;
            Ok(format!(
                "r-convex hull (r {r}) of {} points: area {:.6}, {} boundary loops -> {}",
                summary.n_points,
                summary.area,
                summary.loops,
                p.display()
            ))
        }
        Command::Distances { source, r, spacing } => {
            let (traj, _) = ctx.trajectory(source)?;
            let r = r.unwrap_or(cfg.estimator.r);
            let spacing = spacing.unwrap_or(cfg.estimator.spacing.min(r / 4.0));
            let points = traj.on_points();
            let target = StudyTarget::new(cfg.domain.clone(), spacing, r)?;
            let hull = target.hull(&points, r)?;
            let summary = DistanceSummary {
                r,
                spacing,
                n_points: points.len(),
                hausdorff_points: target.hausdorff(&points)?,
                hausdorff_hull: target.hull_hausdorff(&hull)?,
                measure_hull: crate::setestim::distance_in_measure(&hull, &target.domain_mask)?,
            };
            let p = ctx.write_json("distances.json", &summary)?;
            Ok(format!(
                "d_H(points, S) {:.6}, d_H(hull, S) {:.6}, d_mu(hull, S) {:.6} -> {}",
                summary.hausdorff_points,
                summary.hausdorff_hull,
                summary.measure_hull,
                p.display()
            ))
        }
        Command::Density(args) => {
            let (field, n) = ctx.density(args)?;
            let p = ctx.write("density.csv", &density_csv(&field))?;
            write_svg(SvgPayload::Density(&field), &ctx.path("density.svg")?)?;
            Ok(format!(
                "density on {}x{} grid from {n} points: mass {:.4}, max {:.6} -> {}",
                field.grid.nx,
                field.grid.ny,
                field.mass(),
                field.max(),
                p.display()
            ))
        }
        Command::Levelsets { density, level, mass } => {
            let (field, _) = ctx.density(density)?;
            let mut levels: Vec<f64> = if level.is_empty() && mass.is_empty() {
                cfg.estimator.levels.clone()
            } else {
                level.clone()
            };
            let masses = if level.is_empty() && mass.is_empty() {
                cfg.estimator.level_masses.clone()
            } else {
                mass.clone()
            };
            for m in masses {
                levels.push(mass_level(&field, m)?);
            }
            if levels.is_empty() {
                return Err(Error::invalid("level", "no levels or masses requested"));
            }
            let sets = levels
                .iter()
                .map(|&l| Ok((l, level_set_contours(&field, l)?)))
                .collect::<Result<Vec<_>>>()?;
            let p = ctx.write("levelsets.csv", &level_sets_csv(&sets))?;
            let all: Vec<_> = sets.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
            if !all.is_empty() {
                write_svg(SvgPayload::Polylines(&all), &ctx.path("levelsets.svg")?)?;
            }
            Ok(format!("{} level sets, {} loops -> {}", sets.len(), all.len(), p.display()))
        }
        Command::Drift { density, at } => {
            let (field, _) = ctx.density(density)?;
            let probes: Vec<Point2> = if at.is_empty() {
                (0..5)
                    .flat_map(|i| (0..5).map(move |j| Point2::new(-0.9 + 0.2 * i as f64, -0.4 + 0.2 * j as f64)))
                    .collect()
            } else {
                at.clone()
            };
            let rows: Vec<DriftRow> = probes
                .iter()
                .map(|&q| match drift_estimate(&field, q) {
                    Ok(v) => DriftRow {
                        x: q.x,
                        y: q.y,
                        drift: Some([v.x, v.y]),
                        error: None,
                    },
                    Err(e) => DriftRow {
                        x: q.x,
                        y: q.y,
                        drift: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            let mut csv = String::from("x,y,drift_x,drift_y\n");
            for row in &rows {
                let (dx, dy) = row.drift.map_or(("NA".into(), "NA".into()), |d| {
                    (format!("{:.16e}", d[0]), format!("{:.16e}", d[1]))
                });
                csv.push_str(&format!("{:.16e},{:.16e},{dx},{dy}\n", row.x, row.y));
            }
            let p = ctx.write("drift.csv", &csv)?;
            let refused = rows.iter().filter(|r| r.drift.is_none()).count();
            Ok(format!("drift at {} probes ({refused} refused) -> {}", rows.len(), p.display()))
        }
        Command::Bounds {
            epsilon,
            p,
            delta1,
            delta2,
            params,
        } => {
            let params = ergodicity(params, cfg)?;
            let report = bound_report(*epsilon, *p, *delta1, *delta2, &params)?;
            let path = ctx.write_json("bounds.json", &report)?;
            Ok(format!(
                "bound_contiguous_raw {} bound_onoff_raw {} feasible {} -> {}",
                fmt_opt(report.bound_contiguous_raw),
                fmt_opt(report.bound_onoff_raw),
                report.feasible,
                path.display()
            ))
        }
        Command::Advise {
            battery,
            epsilon,
            p_max,
            delta2,
            params,
        } => {
            let params = ergodicity(params, cfg)?;
            let advice = advise_schedule(*battery, *epsilon, &params, *p_max, *delta2)?;
            let path = ctx.write_json("advice.json", &advice)?;
            Ok(format!(
                "p {} windows of delta1 {:.6} (minimum {:.6}), bound {} -> {}",
                advice.p,
                advice.delta1,
                advice.min_delta1,
                fmt_opt(advice.report.bound_onoff.or(advice.report.bound_contiguous)),
                path.display()
            ))
        }
        Command::Experiment { table, .. } => {
            let grid = cfg.experiment.clone();
            let which = MetricSet {
                hausdorff: *table != TableKind::Measure,
                measure: *table != TableKind::Hausdorff,
            };
            let set = run_tables(&grid, which, |done, total| eprintln!("cell {done}/{total} done"))?;
            let tables = set.with_gains()?;
            for t in &tables {
                ctx.write(&format!("{}.csv", t.metric.name()), &table_csv(t))?;
                ctx.write(&format!("{}.json", t.metric.name()), &(table_json(t)? + "\n"))?;
            }
            let p = ctx.write_json("manifest.json", &set.manifest)?;
            Ok(format!(
                "{} cells x {} reps, {} tables in {:.1}s -> {}",
                grid.cells().len(),
                grid.reps,
                tables.len(),
                set.manifest.wall_clock_seconds,
                p.display()
            ))
        }
        Command::Ingest { source } => {
            if source.track.is_none() && cfg.track.is_none() {
                return Err(Error::invalid("track", "ingest needs --track or a `track` in the config"));
            }
            let (traj, affine) = ctx.trajectory(source)?;
            let p = ctx.path("track.csv")?;
            write_trajectory(&traj, &p)?;
            write_svg(SvgPayload::Trajectory(&traj), &ctx.path("track.svg")?)?;
            if let Some(a) = affine {
                ctx.write_json("rescale.json", &a)?;
            }
            let on = traj.on_flags.iter().filter(|&&f| f).count();
            Ok(format!("ingested {} points ({on} ON) -> {}", traj.len(), p.display()))
        }
    }
}
