//! Configuration, track ingestion, CSV/JSON/SVG emission and the CLI.

pub mod cli;
pub mod config;
pub mod svg;
pub mod table;
pub mod track;

pub use config::RunConfig;
pub use svg::{render_svg, write_svg, SvgPayload};
pub use table::{density_csv, level_sets_csv, polylines_csv, table_csv, table_json};
pub use track::{parse_trajectory, read_trajectory, rescale_unit_diameter, trajectory_csv, write_trajectory, Affine};

#[cfg(test)]
mod tests;
