//! Reflected Brownian motion with drift and on-off observation schedules.
//!
//! Each step proposes `y = x + z + h * nu(x)` with `z ~ N(0, h I)`; a
//! proposal outside the domain is replaced by its mirror image across the
//! nearest boundary point, and if that also falls outside the walker stays
//! put.

mod drift;
mod schedule;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use drift::{Drift, Potential};
pub use schedule::OnOffSchedule;

use crate::geometry::{Domain, Point2};
use crate::{Error, Result};

/// Identifier of the pinned generator, written to trajectory metadata.
pub const RNG_NAME: &str = "chacha12-ziggurat";

/// Default start for the ellipse-minus-disk domain, away from the hole.
pub const DEFAULT_START: Point2 = Point2::new(0.0, -0.5);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub domain: Domain,
    pub h: f64,
    pub n_steps: usize,
    pub start: Point2,
    pub drift: Drift,
    pub seed: u64,
}

impl SimParams {
    /// Ellipse-minus-disk domain, drift `-(x, y)`, start [`DEFAULT_START`].
    pub fn study(h: f64, n_steps: usize, seed: u64) -> Self {
        SimParams {
            domain: Domain::ellipse_minus_disk(),
            h,
            n_steps,
            start: DEFAULT_START,
            drift: Drift::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::invalid("h", format!("must be positive, got {}", self.h)));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        if !self.start.is_finite() || !self.domain.contains(self.start) {
            return Err(Error::StartOutsideDomain {
                x: self.start.x,
                y: self.start.y,
                domain: self.domain.name.clone(),
            });
        }
        Ok(())
    }
}

/// How a step resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Accepted,
    Reflected,
    Rejected,
}

/// One step of the reflection scheme from `x` with Gaussian increment `z`.
pub fn step(domain: &Domain, drift: &Drift, h: f64, x: Point2, z: Point2) -> (Point2, StepKind) {
    let y = x + z + drift.at(x) * h;
    if domain.contains(y) {
        return (y, StepKind::Accepted);
    }
    match domain.reflect(y) {
        Ok(sym) if domain.contains(sym) => (sym, StepKind::Reflected),
        _ => (x, StepKind::Rejected),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounts {
    pub accepted: usize,
    pub reflected: usize,
    pub rejected: usize,
}

impl StepCounts {
    pub fn rejection_rate(&self) -> f64 {
        let total = self.accepted + self.reflected + self.rejected;
        if total == 0 {
            0.0
        } else {
            self.rejected as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub domain: String,
    pub drift: String,
    pub rng: Option<String>,
    pub counts: Option<StepCounts>,
}

/// Time-indexed planar path. `steps[i]` is the original step index of
/// `points[i]`, so subsequences keep their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Point2>,
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub on_flags: Vec<bool>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn select(&self, keep: impl Fn(usize) -> bool) -> Trajectory {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        Trajectory {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            times: idx.iter().map(|&i| self.times[i]).collect(),
            steps: idx.iter().map(|&i| self.steps[i]).collect(),
            on_flags: idx.iter().map(|&i| self.on_flags[i]).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Same path with `on_flags` set from the schedule (nothing dropped).
    pub fn with_schedule(&self, sched: &OnOffSchedule) -> Trajectory {
        let mut t = self.clone();
        t.on_flags = t.steps.iter().map(|&s| sched.is_on(s)).collect();
        t
    }

    /// Points flagged ON.
    pub fn on_points(&self) -> Vec<Point2> {
        self.points
            .iter()
            .zip(&self.on_flags)
            .filter(|(_, &on)| on)
            .map(|(p, _)| *p)
            .collect()
    }
}

/// Simulates `n_steps` positions (the start included) of the reflected
/// diffusion. Deterministic in `params.seed`.
pub fn simulate(params: &SimParams) -> Result<Trajectory> {
    params.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let sd = params.h.sqrt();
    let mut points = Vec::with_capacity(params.n_steps);
    let mut counts = StepCounts::default();
    let mut x = params.start;
    points.push(x);
    for _ in 1..params.n_steps {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let (next, kind) = step(&params.domain, &params.drift, params.h, x, Point2::new(zx * sd, zy * sd));
        match kind {
            StepKind::Accepted => counts.accepted += 1,
            StepKind::Reflected => counts.reflected += 1,
            StepKind::Rejected => counts.rejected += 1,
        }
        x = next;
        points.push(x);
    }
    let n = points.len();
    Ok(Trajectory {
        points,
        times: (0..n).map(|i| i as f64 * params.h).collect(),
        steps: (0..n).collect(),
        on_flags: vec![true; n],
        meta: TrajectoryMeta {
            seed: Some(params.seed),
            h: Some(params.h),
            domain: params.domain.name.clone(),
            drift: params.drift.name(),
            rng: Some(RNG_NAME.to_string()),
            counts: Some(counts),
        },
    })
}

/// The ON subsequence under `sched`, keyed by original step index.
pub fn apply_schedule(traj: &Trajectory, sched: &OnOffSchedule) -> Trajectory {
    let mut kept = traj.select(|i| sched.is_on(traj.steps[i]));
    kept.on_flags.iter_mut().for_each(|f| *f = true);
    kept
}

/// The first `n_keep` points: the contiguous-observation baseline.
pub fn prefix_window(traj: &Trajectory, n_keep: usize) -> Result<Trajectory> {
    if n_keep == 0 || n_keep > traj.len() {
        return Err(Error::invalid(
            "n_keep",
            format!("must be in 1..={}, got {n_keep}", traj.len()),
        ));
    }
    Ok(traj.select(|i| i < n_keep))
}

/// Final point of each of the first `n` ON windows of a full (unscheduled)
/// trajectory: indices `(k+1)*delta1 + k*delta2 - 1`.
pub fn endpoint_subsample(traj: &Trajectory, sched: &OnOffSchedule, n: usize) -> Result<Vec<Point2>> {
    let available = sched.complete_windows(traj.len());
    if n > available {
        return Err(Error::NotEnoughWindows {
            requested: n,
            available,
        });
    }
    Ok((0..n).map(|k| traj.points[sched.window_end(k)]).collect())
}
