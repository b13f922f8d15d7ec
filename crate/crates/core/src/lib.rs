//! Home-range estimation from intermittently observed reflected diffusions.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: implicit planar domains, boundary reflection, grids, region
//!   masks and their Lebesgue measure.
//! - [`simulator`]: reflected Brownian motion with drift and duty-cycled
//!   ("on-off") observation schedules.
//! - [`setestim`]: r-convex hulls, Hausdorff distance and distance in measure.
//! - [`density`]: kernel density estimation, level-set contours and the
//!   plug-in drift estimator.
//! - [`bounds`]: closed-form probability bounds for on-off versus contiguous
//!   observation and a battery-constrained schedule advisor.
//! - [`experiments`]: seeded replication harness for the simulation tables.
//! - [`io`]: configuration, track CSV, table/JSON/SVG emission and the CLI.

pub mod bounds;
pub mod contour;
pub mod density;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod setestim;
pub mod simulator;
pub mod spatial;

pub use error::{Error, Result};
pub use geometry::{Domain, Grid2D, Point2, RegionMask};
pub use simulator::{OnOffSchedule, SimParams, Trajectory};
